//! Command dispatch for the `splitcross` binary.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use splitcross::corpus::{build_scenario, Instance, Scenario, BUILTIN};
use splitcross::crossing::{crosses, CrossingVerdict, Method};
use splitcross::error::Error;
use splitcross::intersection::{
    intersection_number, verify_identities, CheckOutcome, IdentityCheck, IntersectionConfig,
    IntersectionReport,
};
use splitcross::scenario::{emit_scenario, parse_scenario_text};
use splitcross::tree::minimal_subtree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "splitcross", version, about = "Intersection numbers of group splittings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal form of a word in each splitting.
    Normalize(WordArgs),
    /// Translation length of a word on each Bass-Serre tree.
    Tlen(WordArgs),
    /// Crossing verdicts for a pair of sets, or all ordered pairs.
    Cross(PairArgs),
    /// Minimal invariant subtree of a subgroup.
    MinSubtree(SubtreeArgs),
    /// Intersection number reports.
    Intersect(PairArgs),
    /// Swap, complement and perturbation checks.
    Verify(PairArgs),
    /// Built-in scenarios.
    CorpusList(Common),
    /// Print a scenario in the text format.
    Emit(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Tree,
    Truncated,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Exact => Method::Exact,
            MethodArg::Tree => Method::Tree,
            MethodArg::Truncated => Method::Truncated,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// A scenario file (text or JSON) or `builtin:<name>`.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, env = "SPLITCROSS_RADIUS", default_value_t = 6)]
    pub radius: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct WordArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub word: String,
    /// Restrict to one splitting.
    #[arg(long)]
    pub splitting: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub common: Common,
    /// First set (X for `cross`, D otherwise).
    #[arg(long)]
    pub first: Option<String>,
    /// Second set (Y for `cross`, E otherwise).
    #[arg(long)]
    pub second: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SubtreeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub splitting: Option<String>,
    /// Subgroup generators separated by `,` (outside brackets).
    #[arg(long)]
    pub gens: Option<String>,
}

/// Output of one command: rendered text and an exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Alphabet(_)
        | Error::Syntax { .. }
        | Error::UnknownKey { .. }
        | Error::Unresolved(_)
        | Error::InvalidTable(_)
        | Error::InvalidSplitting(_)
        | Error::InvalidTransversal(_)
        | Error::Scenario(_)
        | Error::UnknownScenario(_)
        | Error::Io(_)
        | Error::Unsupported(_) => EXIT_PARSE,
        Error::Inconclusive { .. } => EXIT_INCOMPLETE,
        _ => EXIT_INTERNAL,
    }
}

/// Reads `builtin:<name>`, a JSON document or a text scenario.
pub fn load_scenario(spec: &str) -> Result<Scenario, Error> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return build_scenario(name);
    }
    let text = std::fs::read_to_string(Path::new(spec))
        .map_err(|e| Error::Io(format!("{spec}: {e}")))?;
    parse_scenario_source(&text)
}

pub fn parse_scenario_source(text: &str) -> Result<Scenario, Error> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Syntax {
            line: e.line(),
            msg: e.to_string(),
        })
    } else {
        parse_scenario_text(text)
    }
}

pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    // The reproduction line names the binary rather than its path.
    let line = std::iter::once("splitcross".to_string())
        .chain(args.iter().skip(1).map(|a| {
            let a = a.to_string_lossy();
            if a.contains(char::is_whitespace) { format!("{a:?}") } else { a.into_owned() }
        }))
        .collect::<Vec<_>>()
        .join(" ");
    match Cli::try_parse_from(&args) {
        Ok(cli) => run(&cli, &line),
        Err(e) => Outcome {
            output: e.to_string(),
            code: if e.use_stderr() { EXIT_PARSE } else { EXIT_OK },
        },
    }
}

fn common(c: &Command) -> &Common {
    match c {
        Command::Normalize(a) | Command::Tlen(a) => &a.common,
        Command::Cross(a) | Command::Intersect(a) | Command::Verify(a) => &a.common,
        Command::MinSubtree(a) => &a.common,
        Command::CorpusList(c) | Command::Emit(c) => c,
    }
}

pub fn run(cli: &Cli, line: &str) -> Outcome {
    let c = common(&cli.command);
    let result = dispatch(cli).map(|(text, value, complete)| {
        let output = match c.format {
            Format::Text => format!("{text}command: {line}\n"),
            Format::Structured => {
                let doc = json!({ "command": line, "complete": complete, "result": value });
                serde_json::to_string_pretty(&doc).expect("json") + "\n"
            }
        };
        Outcome {
            output,
            code: if complete { EXIT_OK } else { EXIT_INCOMPLETE },
        }
    });
    match result {
        Ok(o) => o,
        Err(Failure::Error(e)) => Outcome {
            output: format!("error: {e}\n"),
            code: exit_code_for(&e),
        },
        Err(Failure::Check(msg)) => Outcome {
            output: format!("check failed: {msg}\n"),
            code: EXIT_INTERNAL,
        },
    }
}

enum Failure {
    Error(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Produced = (String, Value, bool);

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn dispatch(cli: &Cli) -> Result<Produced, Failure> {
    let c = common(&cli.command);
    if let Command::CorpusList(_) = cli.command {
        let mut text = String::new();
        let mut list = Vec::new();
        for name in BUILTIN {
            let sc = build_scenario(name)?;
            let _ = writeln!(text, "{name:16} {}", sc.description);
            list.push(json!({ "name": name, "description": sc.description }));
        }
        return Ok((text, Value::Array(list), true));
    }
    let spec = c
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Scenario("--scenario is required".into()))?;
    let sc = load_scenario(spec)?;
    if let Command::Emit(_) = cli.command {
        return Ok((emit_scenario(&sc), to_value(&sc), true));
    }
    let inst = sc.instantiate()?;
    match &cli.command {
        Command::Normalize(a) => normalize(&inst, a, false),
        Command::Tlen(a) => normalize(&inst, a, true),
        Command::Cross(a) => cross(&inst, a),
        Command::MinSubtree(a) => min_subtree(&inst, a),
        Command::Intersect(a) => intersect(&inst, a),
        Command::Verify(a) => verify(&inst, a),
        Command::CorpusList(_) | Command::Emit(_) => unreachable!(),
    }
}

fn normalize(inst: &Instance, a: &WordArgs, tlen: bool) -> Result<Produced, Failure> {
    let g = &inst.group;
    let w = g.parse(&a.word)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    if g.is_abelian() {
        let v = g.vector(&w);
        let _ = writeln!(text, "{} = {:?}", a.word, v);
        rows.push(json!({ "vector": v }));
        return Ok((text, Value::Array(rows), true));
    }
    for (i, s) in g.splittings().iter().enumerate() {
        if a.splitting.as_deref().is_some_and(|n| n != s.name()) {
            continue;
        }
        let nf = s.normalize(&w);
        if tlen {
            let l = s.cyclic_length(&w);
            let _ = writeln!(text, "{}: translation length {l}", s.name());
            rows.push(json!({ "splitting": s.name(), "translation_length": l }));
        } else {
            let shown = s.fmt_nf(&nf);
            let in_x = s.in_standard_nf(&nf);
            let _ = writeln!(text, "{}: {shown} (in standard set: {in_x})", s.name());
            rows.push(json!({
                "splitting": s.name(),
                "normal_form": shown,
                "length": nf.length(),
                "in_standard_set": in_x,
                "index": i,
            }));
        }
    }
    if rows.is_empty() {
        return Err(Error::Scenario(format!("no splitting named {:?}", a.splitting)).into());
    }
    Ok((text, Value::Array(rows), true))
}

/// Explicit pair, or every pair of distinct sets (ordered when `ordered`).
fn pairs(inst: &Instance, a: &PairArgs, ordered: bool) -> Result<Vec<(String, String)>, Failure> {
    match (&a.first, &a.second) {
        (Some(x), Some(y)) => {
            inst.set(x)?;
            inst.set(y)?;
            Ok(vec![(x.clone(), y.clone())])
        }
        (None, None) => {
            let names: Vec<&String> = inst.sets.iter().map(|(n, _)| n).collect();
            let mut out = Vec::new();
            for (i, x) in names.iter().enumerate() {
                for (j, y) in names.iter().enumerate() {
                    if i < j || (ordered && i > j) {
                        out.push((x.to_string(), y.to_string()));
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::Scenario("give both --first and --second, or neither".into()).into()),
    }
}

fn verdict_line(x: &str, y: &str, v: &CrossingVerdict) -> String {
    let cert = if v.certified { "certified" } else { "advisory" };
    let radius = v.radius.map(|r| format!(", radius {r}")).unwrap_or_default();
    format!("{x} crosses {y}: {} ({cert}, {}{radius})", v.label(), v.method)
}

fn cross(inst: &Instance, a: &PairArgs) -> Result<Produced, Failure> {
    let g = &inst.group;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut complete = true;
    for (x, y) in pairs(inst, a, true)? {
        let v = crosses(g, inst.set(&x)?, inst.set(&y)?, a.common.method.into(), a.common.radius)?;
        complete &= v.crosses.is_some() && v.certified;
        let _ = writeln!(text, "{}", verdict_line(&x, &y, &v));
        rows.push(json!({ "x": x, "y": y, "verdict": to_value(&v) }));
    }
    Ok((text, Value::Array(rows), complete))
}

fn split_gens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn min_subtree(inst: &Instance, a: &SubtreeArgs) -> Result<Produced, Failure> {
    let g = &inst.group;
    let radius = a.common.radius.min(4);
    let mut jobs: Vec<(usize, String, Vec<String>)> = Vec::new();
    match (&a.splitting, &a.gens) {
        (Some(s), Some(gens)) => jobs.push((inst.splitting_index(s)?, gens.clone(), split_gens(gens))),
        (None, None) => {
            // Each edge group acting on every other splitting's tree.
            for i in 0..g.splittings().len() {
                for (j, t) in g.splittings().iter().enumerate() {
                    if i != j {
                        let gens: Vec<String> = t.edge_generators().iter().map(|w| g.fmt(w)).collect();
                        jobs.push((i, format!("edge group of {}", t.name()), gens));
                    }
                }
            }
        }
        _ => return Err(Error::Scenario("give both --splitting and --gens, or neither".into()).into()),
    }
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut complete = true;
    for (i, label, gens) in jobs {
        let words = gens.iter().map(|w| g.parse(w)).collect::<Result<Vec<_>, _>>()?;
        let s = g.splitting(i);
        let m = minimal_subtree(s, &words, radius);
        complete &= m.complete;
        let _ = writeln!(
            text,
            "{label} in the tree of {}: {} quotient edge(s) ({}{})",
            s.name(),
            m.quotient_edge_count,
            m.method,
            if m.complete { "" } else { ", incomplete" }
        );
        rows.push(json!({
            "splitting": s.name(),
            "subgroup": label,
            "generators": gens,
            "summary": to_value(&m),
        }));
    }
    Ok((text, Value::Array(rows), complete))
}

fn config(c: &Common) -> IntersectionConfig {
    IntersectionConfig {
        radius: c.radius,
        method: c.method.into(),
        ..IntersectionConfig::default()
    }
}

pub fn render_report(r: &IntersectionReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "i({}, {}) at radius {}", r.d, r.e, r.radius);
    let bound = |b: Option<usize>| b.map_or("n/a".to_string(), |x| x.to_string());
    let _ = writeln!(
        t,
        "  tree bounds: {} (Λ in the tree of E), {} (Σ in the tree of D){}",
        bound(r.tree_lower_bound_12),
        bound(r.tree_lower_bound_21),
        if r.tree_bounds_complete { "" } else { " [incomplete]" }
    );
    for c in &r.crossing {
        let _ = writeln!(
            t,
            "  crossing coset Σ·{}·Λ: {} ({}{})",
            c.rep_text,
            c.verdict.method,
            if c.verdict.certified { "certified" } else { "advisory" },
            if c.rep_stable { "" } else { ", representative not stable" }
        );
    }
    for c in &r.unknown {
        let _ = writeln!(t, "  undecided coset Σ·{}·Λ", c.rep_text);
    }
    let _ = writeln!(
        t,
        "  count: {} ({} certified) at radius {}; complete: {}",
        r.truncated_count, r.certified_count, r.radius, r.complete
    );
    match r.certified_exact {
        Some(n) => {
            let _ = writeln!(t, "  certified exact: {n}");
        }
        None => {
            let _ = writeln!(t, "  certified exact: not established");
        }
    }
    for h in &r.hypothesis_notes {
        let _ = writeln!(
            t,
            "  probe at Σ·{}·Λ, radius {}: {} (far points {} in E, {} in E*)",
            h.rep_text, h.radius, h.outcome, h.far_in_y, h.far_in_complement
        );
    }
    let _ = writeln!(
        t,
        "  equality with the tree count: {}",
        if r.equality_claimed { "claimed" } else { "withheld" }
    );
    for n in &r.notes {
        let _ = writeln!(t, "  note: {n}");
    }
    t
}

fn intersect(inst: &Instance, a: &PairArgs) -> Result<Produced, Failure> {
    let g = &inst.group;
    let cfg = config(&a.common);
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut complete = true;
    for (d, e) in pairs(inst, a, false)? {
        let r = intersection_number(g, inst.set(&d)?, inst.set(&e)?, &cfg)?;
        complete &= r.complete;
        let _ = writeln!(text, "{d} vs {e}");
        text.push_str(&render_report(&r));
        rows.push(json!({ "d": d, "e": e, "report": to_value(&r) }));
    }
    Ok((text, Value::Array(rows), complete))
}

pub fn render_checks(checks: &[IdentityCheck]) -> String {
    let mut t = String::new();
    for c in checks {
        let o = match c.outcome {
            CheckOutcome::Pass => "pass",
            CheckOutcome::Fail => "FAIL",
            CheckOutcome::Inconclusive => "inconclusive",
        };
        let _ = writeln!(t, "  [{o}] {}: {}", c.name, c.detail);
    }
    t
}

fn verify(inst: &Instance, a: &PairArgs) -> Result<Produced, Failure> {
    let g = &inst.group;
    let cfg = config(&a.common);
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut complete = true;
    let mut failed = Vec::new();
    for (d, e) in pairs(inst, a, false)? {
        let (base, checks) = verify_identities(g, inst.set(&d)?, inst.set(&e)?, &cfg)?;
        let _ = writeln!(text, "{d} vs {e}: {} crossing coset(s)", base.truncated_count);
        text.push_str(&render_checks(&checks));
        for c in &checks {
            match c.outcome {
                CheckOutcome::Fail => failed.push(format!("{d} vs {e}: {}", c.name)),
                CheckOutcome::Inconclusive => complete = false,
                CheckOutcome::Pass => {}
            }
        }
        rows.push(json!({ "d": d, "e": e, "count": base.truncated_count, "checks": to_value(&checks) }));
    }
    if !failed.is_empty() {
        return Err(Failure::Check(format!("{}\n{text}", failed.join("; "))));
    }
    Ok((text, Value::Array(rows), complete))
}
