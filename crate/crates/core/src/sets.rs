//! Almost invariant subsets of a group.
//!
//! A set is built from a source (the standard set of a splitting, the
//! tree halfspace `{g : ge ⊂ E}`, or a coordinate predicate on Z^k) and then
//! translated on either side, complemented, or perturbed by finitely many
//! cosets of its invariance subgroup. Membership of `w` in `l·S·r` is
//! membership of `l⁻¹ w r⁻¹` in `S`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, Subgroup};
use crate::splitting::SideTag;
use crate::tree::{in_tree_halfspace, nesting_nf, Nesting};
use crate::word::Word;

/// Closed interval of integers; `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(a), Some(b)) if a > b)
    }

    fn contains(&self, x: i64) -> bool {
        self.lo.map_or(true, |a| a <= x) && self.hi.map_or(true, |b| x <= b)
    }
}

/// A finite union of intervals, kept sorted and disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet(Vec<Interval>);

impl IntervalSet {
    pub fn new(parts: Vec<Interval>) -> Self {
        let mut parts: Vec<Interval> = parts.into_iter().filter(|i| !i.is_empty()).collect();
        parts.sort_by_key(|i| i.lo.map_or(i128::MIN, |a| a as i128));
        let mut out: Vec<Interval> = Vec::new();
        for p in parts {
            if let Some(last) = out.last_mut() {
                // Merge overlapping or adjacent pieces.
                let touches = match (last.hi, p.lo) {
                    (None, _) | (_, None) => true,
                    (Some(h), Some(l)) => l as i128 <= h as i128 + 1,
                };
                if touches {
                    last.hi = match (last.hi, p.hi) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(a.max(b)),
                    };
                    continue;
                }
            }
            out.push(p);
        }
        IntervalSet(out)
    }

    pub fn all() -> Self {
        IntervalSet(vec![Interval { lo: None, hi: None }])
    }

    pub fn point(x: i64) -> Self {
        IntervalSet(vec![Interval {
            lo: Some(x),
            hi: Some(x),
        }])
    }

    pub fn at_least(x: i64) -> Self {
        IntervalSet(vec![Interval { lo: Some(x), hi: None }])
    }

    pub fn parts(&self) -> &[Interval] {
        &self.0
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_infinite(&self) -> bool {
        self.0.iter().any(|i| i.lo.is_none() || i.hi.is_none())
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut from: Option<i64> = None;
        let mut open_left = true;
        for i in &self.0 {
            match i.lo {
                None => {}
                Some(a) => out.push(Interval {
                    lo: if open_left { None } else { from },
                    hi: Some(a - 1),
                }),
            }
            match i.hi {
                None => return IntervalSet::new(out),
                Some(b) => {
                    from = Some(b + 1);
                    open_left = false;
                }
            }
        }
        out.push(Interval {
            lo: if open_left { None } else { from },
            hi: None,
        });
        IntervalSet::new(out)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                let lo = match (a.lo, b.lo) {
                    (None, x) | (x, None) => x,
                    (Some(x), Some(y)) => Some(x.max(y)),
                };
                let hi = match (a.hi, b.hi) {
                    (None, x) | (x, None) => x,
                    (Some(x), Some(y)) => Some(x.min(y)),
                };
                out.push(Interval { lo, hi });
            }
        }
        IntervalSet::new(out)
    }

    pub fn shift(&self, d: i64) -> Self {
        IntervalSet(
            self.0
                .iter()
                .map(|i| Interval {
                    lo: i.lo.map(|a| a + d),
                    hi: i.hi.map(|b| b + d),
                })
                .collect(),
        )
    }

    /// Parses `"1.."`, `"..-1"`, `"0"`, `"2..5"`, joined by `|`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Syntax {
            line: 0,
            msg: format!("bad interval list {text:?}"),
        };
        let mut parts = Vec::new();
        for piece in text.split('|') {
            let piece = piece.trim();
            let num = |s: &str| -> Result<Option<i64>> {
                let s = s.trim();
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad())
                }
            };
            let iv = match piece.split_once("..") {
                Some((a, b)) => Interval {
                    lo: num(a)?,
                    hi: num(b)?,
                },
                None => {
                    let x = num(piece)?.ok_or_else(bad)?;
                    Interval {
                        lo: Some(x),
                        hi: Some(x),
                    }
                }
            };
            parts.push(iv);
        }
        Ok(IntervalSet::new(parts))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1..0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|i| match (i.lo, i.hi) {
                (Some(a), Some(b)) if a == b => a.to_string(),
                (a, b) => format!(
                    "{}..{}",
                    a.map(|x| x.to_string()).unwrap_or_default(),
                    b.map(|x| x.to_string()).unwrap_or_default()
                ),
            })
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetSource {
    /// First-letter standard set of a splitting (index into the group's list).
    Standard { splitting: usize },
    /// `{g : ge ⊂ E}` in the Bass–Serre tree of a splitting.
    Tree { splitting: usize },
    /// `{v ∈ Z^k : v[coord] ∈ values}`.
    Predicate { coord: usize, values: IntervalSet },
    /// `base ∪ H·extra`, with `H` the invariance subgroup of `base`.
    Perturbed { base: Box<HalfspaceSet>, extra: Vec<Word> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceSet {
    pub source: SetSource,
    pub left: Word,
    pub right: Word,
    pub complement: bool,
}

/// One of the four corners `X^(*) ∩ Y^(*)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CornerTag {
    pub x: SideTag,
    pub y: SideTag,
}

impl CornerTag {
    pub const ALL: [CornerTag; 4] = [
        CornerTag { x: SideTag::X, y: SideTag::X },
        CornerTag { x: SideTag::XStar, y: SideTag::X },
        CornerTag { x: SideTag::X, y: SideTag::XStar },
        CornerTag { x: SideTag::XStar, y: SideTag::XStar },
    ];

    pub fn selects(self, in_x: bool, in_y: bool) -> bool {
        (in_x == (self.x == SideTag::X)) && (in_y == (self.y == SideTag::X))
    }

    pub fn index(self) -> usize {
        CornerTag::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for CornerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |t: SideTag, n: &str| match t {
            SideTag::X => n.to_string(),
            SideTag::XStar => format!("{n}*"),
        };
        write!(f, "{}∩{}", s(self.x, "X"), s(self.y, "Y"))
    }
}

/// A set that is exactly a (translated, possibly complemented) tree halfspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitView {
    pub splitting: usize,
    pub left: Word,
    pub complement: bool,
}

impl HalfspaceSet {
    fn plain(source: SetSource) -> Self {
        HalfspaceSet {
            source,
            left: Word::identity(),
            right: Word::identity(),
            complement: false,
        }
    }

    pub fn standard(splitting: usize) -> Self {
        Self::plain(SetSource::Standard { splitting })
    }

    pub fn tree(splitting: usize) -> Self {
        Self::plain(SetSource::Tree { splitting })
    }

    pub fn predicate(coord: usize, values: IntervalSet) -> Self {
        Self::plain(SetSource::Predicate { coord, values })
    }

    /// `g·self`
    pub fn translate(&self, g: &Word) -> Self {
        let mut s = self.clone();
        s.left = g.mul(&self.left);
        s
    }

    /// `self·g`
    pub fn translate_right(&self, g: &Word) -> Self {
        let mut s = self.clone();
        s.right = self.right.mul(g);
        s
    }

    pub fn complemented(&self) -> Self {
        let mut s = self.clone();
        s.complement = !s.complement;
        s
    }

    /// Adds the cosets `H·w` for `w ∈ extra`.
    pub fn perturbed(&self, extra: Vec<Word>) -> Self {
        Self::plain(SetSource::Perturbed {
            base: Box::new(self.clone()),
            extra,
        })
    }

    /// Splitting index behind the set, if any.
    pub fn splitting(&self) -> Option<usize> {
        match &self.source {
            SetSource::Standard { splitting } | SetSource::Tree { splitting } => Some(*splitting),
            SetSource::Perturbed { base, .. } => base.splitting(),
            SetSource::Predicate { .. } => None,
        }
    }

    fn source_invariance(&self, g: &Group) -> Subgroup {
        match &self.source {
            SetSource::Standard { splitting } | SetSource::Tree { splitting } => Subgroup::Edge {
                splitting: *splitting,
                conj: Word::identity(),
            },
            SetSource::Predicate { coord, .. } => Subgroup::Coordinate {
                axes: (0..g.alphabet().len()).filter(|i| i != coord).collect(),
            },
            SetSource::Perturbed { base, .. } => base.invariance_subgroup(g),
        }
    }

    /// The subgroup `H` with `H·self = self`.
    pub fn invariance_subgroup(&self, g: &Group) -> Subgroup {
        self.source_invariance(g).conjugate(&self.left)
    }

    pub fn contains(&self, g: &Group, w: &Word) -> Result<bool> {
        let h = self.left.inverse().mul(w).mul(&self.right.inverse());
        Ok(self.source_contains(g, &h)? != self.complement)
    }

    fn source_contains(&self, g: &Group, h: &Word) -> Result<bool> {
        match &self.source {
            SetSource::Standard { splitting } => {
                check_splitting(g, *splitting)?;
                Ok(g.splitting(*splitting).in_standard_set(h))
            }
            SetSource::Tree { splitting } => {
                check_splitting(g, *splitting)?;
                let s = g.splitting(*splitting);
                Ok(in_tree_halfspace(s, &s.normalize(h)))
            }
            SetSource::Predicate { coord, values } => {
                if !g.is_abelian() || *coord >= g.alphabet().len() {
                    return Err(Error::Oracle("coordinate predicate needs Z^k".into()));
                }
                Ok(values.contains(g.vector(h)[*coord]))
            }
            SetSource::Perturbed { base, extra } => {
                if base.contains(g, h)? {
                    return Ok(true);
                }
                let inv = base.invariance_subgroup(g);
                let k = inv.coset_key(g, h)?;
                for e in extra {
                    if inv.coset_key(g, e)? == k {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Exact tree description, when the set is a translated halfspace.
    pub fn split_view(&self, g: &Group) -> Option<SplitView> {
        let splitting = match &self.source {
            SetSource::Standard { splitting } | SetSource::Tree { splitting } => *splitting,
            _ => return None,
        };
        if !g.is_identity(&self.right) {
            return None;
        }
        Some(SplitView {
            splitting,
            left: self.left.clone(),
            complement: self.complement,
        })
    }

    /// The halfspace this set differs from by finitely many cosets, looking
    /// through perturbations.
    pub fn underlying_view(&self, g: &Group) -> Option<SplitView> {
        if let Some(v) = self.split_view(g) {
            return Some(v);
        }
        let SetSource::Perturbed { base, .. } = &self.source else { return None };
        let inner = base.underlying_view(g)?;
        if !g.is_identity(&self.right) {
            return None;
        }
        Some(SplitView {
            splitting: inner.splitting,
            left: self.left.mul(&inner.left),
            complement: inner.complement != self.complement,
        })
    }

    /// For predicate sets on Z^k: the coordinate and the effective value set.
    pub fn predicate_view(&self, g: &Group) -> Option<(usize, IntervalSet)> {
        let SetSource::Predicate { coord, values } = &self.source else { return None };
        let d = g.vector(&self.left)[*coord] + g.vector(&self.right)[*coord];
        let v = values.shift(d);
        Some((*coord, if self.complement { v.complement() } else { v }))
    }

    pub fn describe(&self, g: &Group) -> String {
        let base = match &self.source {
            SetSource::Standard { splitting } => format!("X[{}]", g.splitting(*splitting).name()),
            SetSource::Tree { splitting } => format!("T[{}]", g.splitting(*splitting).name()),
            SetSource::Predicate { coord, values } => {
                format!("{{{} ∈ {values}}}", g.alphabet().name(*coord as u16))
            }
            SetSource::Perturbed { base, extra } => {
                let e: Vec<String> = extra.iter().map(|w| g.fmt(w)).collect();
                format!("({} ∪ H·{{{}}})", base.describe(g), e.join(", "))
            }
        };
        let mut s = base;
        if !self.left.is_empty() {
            s = format!("{}·{s}", g.fmt(&self.left));
        }
        if !self.right.is_empty() {
            s = format!("{s}·{}", g.fmt(&self.right));
        }
        if self.complement {
            s = format!("({s})*");
        }
        s
    }
}

fn check_splitting(g: &Group, k: usize) -> Result<()> {
    if k < g.splittings().len() {
        Ok(())
    } else {
        Err(Error::Unresolved(format!("splitting #{k}")))
    }
}

/// Membership in the corner `X^(*) ∩ Y^(*)`.
pub fn corner_member(
    g: &Group,
    x: &HalfspaceSet,
    y: &HalfspaceSet,
    c: CornerTag,
    w: &Word,
) -> Result<bool> {
    Ok(c.selects(x.contains(g, w)?, y.contains(g, w)?))
}

/// Relation between `h·Y` and `Y` for a set with an exact tree description.
pub fn nesting_test(g: &Group, h: &Word, y: &HalfspaceSet) -> Result<Nesting> {
    let v = y
        .split_view(g)
        .ok_or_else(|| Error::Unsupported("nesting needs a splitting or tree set".into()))?;
    let s = g.splitting(v.splitting);
    let conj = v.left.inverse().mul(h).mul(&v.left);
    let n = nesting_nf(s, &s.normalize(&conj));
    Ok(if v.complement { flip(n) } else { n })
}

/// The relation seen from the complement: `gY ⊊ Y` iff `gY* ⊋ Y*`.
fn flip(n: Nesting) -> Nesting {
    match n {
        Nesting::Equal => Nesting::Equal,
        Nesting::ProperSubset => Nesting::ProperSuperset,
        Nesting::ProperSuperset => Nesting::ProperSubset,
        Nesting::InsideComplement => Nesting::CoversComplement,
        Nesting::CoversComplement => Nesting::InsideComplement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::tests::{genus2_c, genus2_d};
    use crate::word::Alphabet;

    fn z2() -> Group {
        Group::abelian(Alphabet::new(&["n", "m"]).unwrap())
    }

    #[test]
    fn interval_algebra() {
        let pos = IntervalSet::parse("1..").unwrap();
        assert_eq!(pos.complement(), IntervalSet::parse("..0").unwrap());
        assert_eq!(pos.complement().complement(), pos);
        let mid = IntervalSet::parse("-2..3|5").unwrap();
        assert_eq!(mid.complement().to_string(), "..-3|4|6..");
        assert!(!mid.is_infinite());
        assert_eq!(pos.intersect(&mid).to_string(), "1..3|5");
        assert!(IntervalSet::all().complement().is_empty());
        assert_eq!(IntervalSet::parse("0|1").unwrap().to_string(), "0..1");
    }

    #[test]
    fn plane_corners() {
        let g = z2();
        let x = HalfspaceSet::predicate(0, IntervalSet::at_least(1));
        let y = HalfspaceSet::predicate(1, IntervalSet::point(0));
        let v = |n: i64, m: i64| g.from_vector(&[n, m]);
        let c = |a, b| CornerTag { x: a, y: b };
        use SideTag::*;
        assert!(corner_member(&g, &x, &y, c(X, X), &v(3, 0)).unwrap());
        assert!(corner_member(&g, &x, &y, c(XStar, X), &v(-1, 0)).unwrap());
        assert!(!corner_member(&g, &x, &y, c(X, XStar), &v(3, 0)).unwrap());
    }

    #[test]
    fn translates_and_invariance() {
        let g = z2();
        let x = HalfspaceSet::predicate(0, IntervalSet::at_least(1));
        let shifted = x.translate(&g.from_vector(&[2, 5]));
        assert!(!shifted.contains(&g, &g.from_vector(&[2, 0])).unwrap());
        assert!(shifted.contains(&g, &g.from_vector(&[3, -7])).unwrap());
        assert_eq!(shifted.predicate_view(&g).unwrap().1.to_string(), "3..");
        assert_eq!(
            x.invariance_subgroup(&g),
            Subgroup::Coordinate { axes: vec![1] }
        );
    }

    #[test]
    fn standard_and_tree_sources_agree() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        let g = Group::split(a, vec![d, c]).unwrap();
        for k in 0..2 {
            let x = HalfspaceSet::standard(k);
            let t = HalfspaceSet::tree(k);
            for w in &g.ball(3).words {
                assert_eq!(x.contains(&g, w).unwrap(), t.contains(&g, w).unwrap());
            }
        }
    }

    #[test]
    fn membership_is_invariant() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        let g = Group::split(a.clone(), vec![d, c]).unwrap();
        let h = a.parse_word("b c").unwrap();
        for k in 0..2 {
            let x = HalfspaceSet::standard(k).translate(&h);
            let sub = x.invariance_subgroup(&g);
            let gens = sub.generators(&g);
            for w in g.ball(2).words.iter() {
                let m = x.contains(&g, w).unwrap();
                for s in &gens {
                    assert_eq!(x.contains(&g, &s.mul(w)).unwrap(), m);
                    assert_eq!(x.contains(&g, &s.inverse().mul(w)).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn nesting_examples() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        let g = Group::split(a.clone(), vec![d, c]).unwrap();
        let y = HalfspaceSet::standard(0);
        assert_eq!(nesting_test(&g, &Word::identity(), &y).unwrap(), Nesting::Equal);
        let sigma = a.parse_word("[a,b]").unwrap();
        assert_eq!(nesting_test(&g, &sigma, &y).unwrap(), Nesting::Equal);
        // The curve word a·c crosses the separating curve.
        let n = nesting_test(&g, &a.parse_word("a c").unwrap(), &y).unwrap();
        assert!(n.is_strict_self_nesting());
        let nc = nesting_test(&g, &a.parse_word("a c").unwrap(), &y.complemented()).unwrap();
        assert!(nc.is_strict_self_nesting());
        assert_ne!(n, nc);
    }

    #[test]
    fn perturbation_adds_cosets() {
        let (a, d) = genus2_d();
        let g = Group::split(a.clone(), vec![d]).unwrap();
        let y = HalfspaceSet::standard(0);
        let extra = a.parse_word("c").unwrap();
        assert!(!y.contains(&g, &extra).unwrap());
        let p = y.perturbed(vec![extra.clone()]);
        assert!(p.contains(&g, &extra).unwrap());
        assert!(p.contains(&g, &a.parse_word("[a,b] c").unwrap()).unwrap());
        assert!(!p.contains(&g, &a.parse_word("c a").unwrap()).unwrap());
        assert_eq!(p.underlying_view(&g).unwrap().splitting, 0);
    }
}
