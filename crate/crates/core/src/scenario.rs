//! The `splitcross-scenario v1` text format.
//!
//! ```text
//! splitcross-scenario v1
//! # comment
//! name = z2-z3
//! generators = s t
//! splitting F amalgam
//!   factor-a = cyclic s 2
//!   factor-b = cyclic t 3
//!   map = s -> s
//!   map = t -> t
//! end
//! set X = standard F
//! set tX = standard F left t
//! expect crosses; tX; X; false; source=basic
//! ```
//!
//! Inside a `splitting` block the keys are `factor-a`, `factor-b`, `edge`
//! (`<word in A> | <word in B>`, repeatable), `stable`, `map`
//! (`<generator> -> <tokens>`), `back` (`<local> -> <global word>`) and
//! `transversal` (`shortlex`, `reversed` or `explicit 0 3`). Factors are
//! `free a`, `cyclic s 2`, `klein x y` or
//! `table e x y z / 0 1 2 3 / 1 0 3 2 / ...`.
//!
//! Top-level keys: `name`, `description`, `generators`, `abelian`, `note`
//! (repeatable), `splitting <name> amalgam|hnn`, `set`, `expect`. Unknown
//! keys are errors.

use crate::corpus::{build_scenario, Check, Expectation, NamedSet, Scenario, SetDecl, Source};
use crate::error::{Error, Result};
use crate::factor::{FactorSpec, Transversal};
use crate::splitting::{SplitKind, SplittingSpec};

pub const HEADER: &str = "splitcross-scenario v1";

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        msg: msg.into(),
    }
}

fn key_value(text: &str, line: usize) -> Result<(&str, &str)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| syntax(line, format!("expected `key = value`, found {text:?}")))?;
    Ok((k.trim(), v.trim()))
}

fn parse_factor(text: &str, line: usize) -> Result<FactorSpec> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.as_slice() {
        ["free", l] => Ok(FactorSpec::Free(l.to_string())),
        ["cyclic", l, n] => Ok(FactorSpec::Cyclic {
            letter: l.to_string(),
            order: n.parse().map_err(|_| syntax(line, format!("bad order {n:?}")))?,
        }),
        ["klein", x, y] => Ok(FactorSpec::Klein {
            x: x.to_string(),
            y: y.to_string(),
        }),
        ["table", ..] => {
            let mut chunks = text["table".len()..].split('/');
            let names: Vec<String> = chunks
                .next()
                .unwrap_or("")
                .split_whitespace()
                .map(str::to_string)
                .collect();
            let rows = chunks
                .map(|r| {
                    r.split_whitespace()
                        .map(|x| x.parse::<usize>().map_err(|_| syntax(line, format!("bad entry {x:?}"))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FactorSpec::Table { names, rows })
        }
        _ => Err(syntax(line, format!("unrecognised factor {text:?}"))),
    }
}

fn emit_factor(f: &FactorSpec) -> String {
    match f {
        FactorSpec::Free(l) => format!("free {l}"),
        FactorSpec::Cyclic { letter, order } => format!("cyclic {letter} {order}"),
        FactorSpec::Klein { x, y } => format!("klein {x} {y}"),
        FactorSpec::Table { names, rows } => {
            let mut s = format!("table {}", names.join(" "));
            for r in rows {
                let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!(" / {}", r.join(" ")));
            }
            s
        }
    }
}

fn arrow(text: &str, line: usize) -> Result<(String, String)> {
    let (a, b) = text
        .split_once("->")
        .ok_or_else(|| syntax(line, format!("expected `name -> value`, found {text:?}")))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn parse_transversal(text: &str, line: usize) -> Result<Transversal> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.as_slice() {
        ["shortlex"] => Ok(Transversal::Shortlex),
        ["reversed"] => Ok(Transversal::Reversed),
        ["explicit", rest @ ..] => Ok(Transversal::Explicit(
            rest.iter()
                .map(|x| x.parse().map_err(|_| syntax(line, format!("bad index {x:?}"))))
                .collect::<Result<_>>()?,
        )),
        _ => Err(syntax(line, format!("unknown transversal {text:?}"))),
    }
}

fn emit_transversal(t: &Transversal) -> String {
    match t {
        Transversal::Shortlex => "shortlex".into(),
        Transversal::Reversed => "reversed".into(),
        Transversal::Explicit(v) => {
            let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("explicit {}", v.join(" "))
        }
    }
}

/// `set <name> = standard|tree <splitting> [left <word>] [complement]` or
/// `set <name> = predicate <coord> <intervals> [complement]`.
fn parse_set(text: &str, line: usize) -> Result<NamedSet> {
    let (name, rest) = key_value(text, line)?;
    let (rest, complement) = match rest.strip_suffix("complement") {
        Some(r) => (r.trim(), true),
        None => (rest, false),
    };
    let (body, left) = match rest.split_once(" left ") {
        Some((b, l)) => (b.trim(), l.trim().to_string()),
        None => (rest, String::new()),
    };
    let parts: Vec<&str> = body.split_whitespace().collect();
    let decl = match parts.as_slice() {
        ["standard", s] => SetDecl::Standard { splitting: s.to_string() },
        ["tree", s] => SetDecl::Tree { splitting: s.to_string() },
        ["predicate", c, v] => SetDecl::Predicate {
            coord: c.parse().map_err(|_| syntax(line, format!("bad coordinate {c:?}")))?,
            values: v.to_string(),
        },
        _ => return Err(syntax(line, format!("unrecognised set {body:?}"))),
    };
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(syntax(line, format!("bad set name {name:?}")));
    }
    Ok(NamedSet {
        name: name.to_string(),
        decl,
        left,
        complement,
    })
}

fn emit_set(s: &NamedSet) -> String {
    let mut out = format!("set {} = ", s.name);
    match &s.decl {
        SetDecl::Standard { splitting } => out.push_str(&format!("standard {splitting}")),
        SetDecl::Tree { splitting } => out.push_str(&format!("tree {splitting}")),
        SetDecl::Predicate { coord, values } => out.push_str(&format!("predicate {coord} {values}")),
    }
    if !s.left.is_empty() {
        out.push_str(&format!(" left {}", s.left));
    }
    if s.complement {
        out.push_str(" complement");
    }
    out
}

/// Splits on commas outside square brackets.
fn split_list(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_expect(text: &str, line: usize) -> Result<Expectation> {
    let mut fields: Vec<&str> = text.split(';').map(str::trim).collect();
    let source = match fields.last().and_then(|f| f.strip_prefix("source=")) {
        Some(s) => {
            let s = Source(s.trim().to_string());
            fields.pop();
            s
        }
        None => return Err(syntax(line, "expectation needs a trailing `source=...` field")),
    };
    let num = |s: &str| s.parse::<usize>().map_err(|_| syntax(line, format!("bad number {s:?}")));
    let st = |s: &str| s.to_string();
    let check = match fields.as_slice() {
        ["crosses", x, y, v] => Check::Crosses {
            x: st(x),
            y: st(y),
            value: v.parse().map_err(|_| syntax(line, format!("bad boolean {v:?}")))?,
        },
        ["intersection", d, e, n] => Check::Intersection { d: st(d), e: st(e), count: num(n)? },
        ["intersection-nonzero", d, e] => Check::IntersectionNonzero { d: st(d), e: st(e) },
        ["tree-bounds", d, e, a, b] => Check::TreeBounds {
            d: st(d),
            e: st(e),
            b12: num(a)?,
            b21: num(b)?,
        },
        ["subtree-edges", s, gens, n] => Check::SubtreeEdges {
            splitting: st(s),
            gens: split_list(gens),
            count: num(n)?,
        },
        ["translation-length", s, w, n] => Check::TranslationLength {
            splitting: st(s),
            word: st(w),
            length: num(n)?,
        },
        ["probe-one-sided", x, y, radii] => Check::ProbeOneSided {
            x: st(x),
            y: st(y),
            radii: radii.split_whitespace().map(num).collect::<Result<_>>()?,
        },
        ["equality-withheld", d, e] => Check::EqualityWithheld { d: st(d), e: st(e) },
        [kind, ..] => return Err(Error::UnknownKey { key: format!("expect {kind}"), line }),
        [] => return Err(syntax(line, "empty expectation")),
    };
    Ok(Expectation { check, source })
}

fn emit_expect(e: &Expectation) -> String {
    let body = match &e.check {
        Check::Crosses { x, y, value } => format!("crosses; {x}; {y}; {value}"),
        Check::Intersection { d, e, count } => format!("intersection; {d}; {e}; {count}"),
        Check::IntersectionNonzero { d, e } => format!("intersection-nonzero; {d}; {e}"),
        Check::TreeBounds { d, e, b12, b21 } => format!("tree-bounds; {d}; {e}; {b12}; {b21}"),
        Check::SubtreeEdges { splitting, gens, count } => {
            format!("subtree-edges; {splitting}; {}; {count}", gens.join(", "))
        }
        Check::TranslationLength { splitting, word, length } => {
            format!("translation-length; {splitting}; {word}; {length}")
        }
        Check::ProbeOneSided { x, y, radii } => {
            let r: Vec<String> = radii.iter().map(|r| r.to_string()).collect();
            format!("probe-one-sided; {x}; {y}; {}", r.join(" "))
        }
        Check::EqualityWithheld { d, e } => format!("equality-withheld; {d}; {e}"),
    };
    format!("expect {body}; source={}", e.source.0)
}

struct Block {
    spec: SplittingSpec,
    line: usize,
}

fn splitting_key(b: &mut Block, key: &str, value: &str, line: usize) -> Result<()> {
    let s = &mut b.spec;
    match key {
        "factor-a" => s.factors_a.push(parse_factor(value, line)?),
        "factor-b" => s.factors_b.push(parse_factor(value, line)?),
        "edge" => {
            let (a, c) = value
                .split_once('|')
                .ok_or_else(|| syntax(line, "edge needs `<A word> | <B word>`"))?;
            s.edge_a.push(a.trim().to_string());
            s.edge_b.push(c.trim().to_string());
        }
        "stable" => s.stable = Some(value.to_string()),
        "map" => s.map.push(arrow(value, line)?),
        "back" => s.back.push(arrow(value, line)?),
        "transversal" => s.transversal = parse_transversal(value, line)?,
        _ => return Err(Error::UnknownKey { key: key.into(), line }),
    }
    Ok(())
}

pub fn parse_scenario_text(text: &str) -> Result<Scenario> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let first = lines.by_ref().find(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some((_, l)) if l == HEADER => {}
        Some((n, l)) => return Err(syntax(n, format!("expected header {HEADER:?}, found {l:?}"))),
        None => return Err(syntax(1, "empty scenario file")),
    }
    let mut sc = Scenario {
        name: String::new(),
        description: String::new(),
        generators: Vec::new(),
        abelian: false,
        splittings: Vec::new(),
        sets: Vec::new(),
        expectations: Vec::new(),
        notes: Vec::new(),
    };
    let mut block: Option<Block> = None;
    for (n, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(b) = block.as_mut() {
            if l == "end" {
                sc.splittings.push(block.take().unwrap().spec);
                continue;
            }
            let (k, v) = key_value(l, n)?;
            splitting_key(b, k, v, n)?;
            continue;
        }
        let (word, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match word {
            "splitting" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let (name, kind) = match parts.as_slice() {
                    [name, "amalgam"] => (name, SplitKind::Amalgam),
                    [name, "hnn"] => (name, SplitKind::Hnn),
                    _ => return Err(syntax(n, "expected `splitting <name> amalgam|hnn`")),
                };
                block = Some(Block {
                    spec: SplittingSpec {
                        name: name.to_string(),
                        kind,
                        factors_a: vec![],
                        factors_b: vec![],
                        edge_a: vec![],
                        edge_b: vec![],
                        stable: None,
                        map: vec![],
                        back: vec![],
                        transversal: Transversal::Shortlex,
                    },
                    line: n,
                });
            }
            "set" => sc.sets.push(parse_set(rest, n)?),
            "expect" => sc.expectations.push(parse_expect(rest, n)?),
            _ => {
                let (k, v) = key_value(l, n)?;
                match k {
                    "name" => sc.name = v.to_string(),
                    "description" => sc.description = v.to_string(),
                    "generators" => sc.generators = v.split_whitespace().map(str::to_string).collect(),
                    "abelian" => {
                        sc.abelian = v
                            .parse()
                            .map_err(|_| syntax(n, format!("bad boolean {v:?}")))?
                    }
                    "note" => sc.notes.push(v.to_string()),
                    _ => return Err(Error::UnknownKey { key: k.into(), line: n }),
                }
            }
        }
    }
    if let Some(b) = block {
        return Err(syntax(b.line, format!("splitting {} has no `end`", b.spec.name)));
    }
    if sc.name.is_empty() {
        return Err(syntax(1, "missing `name`"));
    }
    if sc.generators.is_empty() {
        return Err(syntax(1, "missing `generators`"));
    }
    Ok(sc)
}

pub fn emit_scenario(sc: &Scenario) -> String {
    let mut out = vec![HEADER.to_string(), format!("name = {}", sc.name)];
    if !sc.description.is_empty() {
        out.push(format!("description = {}", sc.description));
    }
    out.push(format!("generators = {}", sc.generators.join(" ")));
    if sc.abelian {
        out.push("abelian = true".into());
    }
    for note in &sc.notes {
        out.push(format!("note = {note}"));
    }
    for s in &sc.splittings {
        let kind = match s.kind {
            SplitKind::Amalgam => "amalgam",
            SplitKind::Hnn => "hnn",
        };
        out.push(format!("splitting {} {kind}", s.name));
        for f in &s.factors_a {
            out.push(format!("  factor-a = {}", emit_factor(f)));
        }
        for f in &s.factors_b {
            out.push(format!("  factor-b = {}", emit_factor(f)));
        }
        for (a, b) in s.edge_a.iter().zip(&s.edge_b) {
            out.push(format!("  edge = {a} | {b}"));
        }
        if let Some(t) = &s.stable {
            out.push(format!("  stable = {t}"));
        }
        for (a, b) in &s.map {
            out.push(format!("  map = {a} -> {b}"));
        }
        for (a, b) in &s.back {
            out.push(format!("  back = {a} -> {b}"));
        }
        if s.transversal != Transversal::Shortlex {
            out.push(format!("  transversal = {}", emit_transversal(&s.transversal)));
        }
        out.push("end".into());
    }
    for s in &sc.sets {
        out.push(emit_set(s));
    }
    for e in &sc.expectations {
        out.push(emit_expect(e));
    }
    out.push(String::new());
    out.join("\n")
}

/// `builtin:<name>` or the text of a scenario file.
pub fn resolve_builtin(spec: &str) -> Option<Result<Scenario>> {
    spec.strip_prefix("builtin:").map(build_scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::BUILTIN;

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN {
            let sc = build_scenario(name).unwrap();
            let text = emit_scenario(&sc);
            let back = parse_scenario_text(&text).unwrap();
            assert_eq!(back, sc, "{text}");
        }
    }

    #[test]
    fn minimal_file_parses() {
        let text = "splitcross-scenario v1\nname = m\ngenerators = s t\nsplitting F amalgam\n  factor-a = cyclic s 2\n  factor-b = cyclic t 3\n  map = s -> s\n  map = t -> t\nend\nset X = standard F\n";
        let sc = parse_scenario_text(text).unwrap();
        let inst = sc.instantiate().unwrap();
        assert_eq!(inst.sets.len(), 1);
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let text = "splitcross-scenario v1\nname = m\ncolour = red\n";
        assert_eq!(
            parse_scenario_text(text),
            Err(Error::UnknownKey { key: "colour".into(), line: 3 })
        );
        let text = "splitcross-scenario v1\nname = m\ngenerators = s\nsplitting F amalgam\n  flavour = x\nend\n";
        assert!(matches!(parse_scenario_text(text), Err(Error::UnknownKey { line: 5, .. })));
    }

    #[test]
    fn header_is_required() {
        assert!(matches!(parse_scenario_text("name = m\n"), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn table_factors_round_trip() {
        let f = FactorSpec::Table {
            names: vec!["e".into(), "x".into()],
            rows: vec![vec![0, 1], vec![1, 0]],
        };
        assert_eq!(parse_factor(&emit_factor(&f), 1).unwrap(), f);
    }

    #[test]
    fn lists_respect_brackets() {
        assert_eq!(split_list("[a,b], a c"), vec!["[a,b]", "a c"]);
    }
}
