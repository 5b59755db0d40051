//! Sets evaluated over a ball of the Cayley graph.
//!
//! Membership in `l·X_k` along the ball is computed incrementally: the
//! normal form of `l⁻¹·w` is the form of `l⁻¹·parent(w)` extended by one
//! letter. Quotient questions (coboundaries, almost equality, corner
//! images) only ever look at coset names, so they are radius-bounded
//! evidence and are always reported with their radius.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Ball, CosetKey, ElemKey, Group, Subgroup};
use crate::sets::{CornerTag, HalfspaceSet, SetSource};
use crate::splitting::NormalForm;
use crate::tree::in_tree_halfspace;
use crate::word::{Symbol, Word};

pub struct Sweep<'a> {
    group: &'a Group,
    pub ball: Ball,
}

/// Shape of the last three entries of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    Stable,
    Growing,
    Mixed,
}

pub fn classify(trace: &[usize]) -> Growth {
    if trace.len() < 3 {
        return Growth::Mixed;
    }
    let t = &trace[trace.len() - 3..];
    if t[0] == t[1] && t[1] == t[2] {
        Growth::Stable
    } else if t[0] < t[1] && t[1] < t[2] {
        Growth::Growing
    } else {
        Growth::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlmostEqual {
    AlmostEqual,
    NotAlmostEqual,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlmostEqualReport {
    /// Symmetric-difference coset count within each radius `0..=R`.
    pub trace: Vec<usize>,
    pub verdict: AlmostEqual,
}

impl<'a> Sweep<'a> {
    pub fn new(group: &'a Group, radius: usize) -> Self {
        Sweep {
            group,
            ball: group.ball(radius),
        }
    }

    pub fn group(&self) -> &Group {
        self.group
    }

    pub fn radius(&self) -> usize {
        self.ball.radius
    }

    pub fn len(&self) -> usize {
        self.ball.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ball.is_empty()
    }

    /// Word length of each ball element.
    pub fn lengths(&self) -> Vec<usize> {
        self.ball.words.iter().map(|w| w.len()).collect()
    }

    /// `start·w` in splitting `k` for every ball element `w`.
    pub fn along(&self, k: usize, start: &NormalForm) -> Vec<NormalForm> {
        let s = self.group.splitting(k);
        let mut out: Vec<NormalForm> = Vec::with_capacity(self.ball.len());
        out.push(start.clone());
        for i in 1..self.ball.len() {
            let (p, letter) = self.ball.parent[i];
            let nf = s.extend_word(&out[p], &Word::letter(letter));
            out.push(nf);
        }
        out
    }

    fn vectors(&self) -> Vec<Vec<i64>> {
        self.ball
            .keys
            .iter()
            .zip(&self.ball.words)
            .map(|(k, w)| match k {
                ElemKey::Vector(v) => v.clone(),
                ElemKey::Form(_) => self.group.vector(w),
            })
            .collect()
    }

    pub fn membership(&self, set: &HalfspaceSet) -> Result<Vec<bool>> {
        let g = self.group;
        let flip = set.complement;
        let out: Vec<bool> = match &set.source {
            SetSource::Standard { splitting } | SetSource::Tree { splitting } => {
                let k = *splitting;
                if k >= g.splittings().len() {
                    return Err(Error::Unresolved(format!("splitting #{k}")));
                }
                let s = g.splitting(k);
                let tree = matches!(set.source, SetSource::Tree { .. });
                let start = s.normalize(&set.left.inverse());
                let r_inv = set.right.inverse();
                self.along(k, &start)
                    .into_iter()
                    .map(|nf| {
                        let nf = if r_inv.is_empty() { nf } else { s.extend_word(&nf, &r_inv) };
                        let m = if tree { in_tree_halfspace(s, &nf) } else { s.in_standard_nf(&nf) };
                        m != flip
                    })
                    .collect()
            }
            SetSource::Predicate { .. } => {
                let (coord, values) = set
                    .predicate_view(g)
                    .filter(|_| g.is_abelian())
                    .ok_or_else(|| Error::Oracle("coordinate predicate needs Z^k".into()))?;
                // predicate_view already folds in translates and the complement.
                return Ok(self
                    .vectors()
                    .iter()
                    .map(|v| values.contains(v[coord]))
                    .collect());
            }
            SetSource::Perturbed { base, extra } => {
                let inner = base.translate(&set.left).translate_right(&set.right);
                let mut m = self.membership(&inner)?;
                let sub = inner.invariance_subgroup(g);
                let targets: HashSet<CosetKey> = extra
                    .iter()
                    .map(|e| sub.coset_key(g, &set.left.mul(e).mul(&set.right)))
                    .collect::<Result<_>>()?;
                let keys = self.coset_keys(&sub)?;
                for (x, k) in m.iter_mut().zip(&keys) {
                    *x = *x || targets.contains(k);
                }
                m.into_iter().map(|x| x != flip).collect()
            }
        };
        Ok(out)
    }

    /// Name of the right coset `Σw` for every ball element.
    pub fn coset_keys(&self, sub: &Subgroup) -> Result<Vec<CosetKey>> {
        let g = self.group;
        match sub {
            Subgroup::Trivial => Ok(self.ball.keys.iter().cloned().map(CosetKey::Element).collect()),
            Subgroup::Coordinate { axes } => Ok(self
                .vectors()
                .into_iter()
                .map(|mut v| {
                    for &i in axes {
                        v[i] = 0;
                    }
                    CosetKey::Vector(v)
                })
                .collect()),
            _ => self.ball.words.iter().map(|w| sub.coset_key(g, w)).collect(),
        }
    }

    /// Distinct coset names of the masked elements within each radius in `radii`.
    pub fn image_counts(&self, mask: &[bool], keys: &[CosetKey], radii: &[usize]) -> Vec<usize> {
        radii
            .iter()
            .map(|&r| {
                self.ball
                    .within(r)
                    .filter(|&i| mask[i])
                    .map(|i| &keys[i])
                    .collect::<HashSet<_>>()
                    .len()
            })
            .collect()
    }

    /// Corner image counts `[X∩Y, X*∩Y, X∩Y*, X*∩Y*]` for each radius.
    pub fn corner_counts(
        &self,
        x: &[bool],
        y: &[bool],
        keys: &[CosetKey],
        radii: &[usize],
    ) -> Vec<[usize; 4]> {
        let mut sets: Vec<[HashSet<&CosetKey>; 4]> = radii.iter().map(|_| Default::default()).collect();
        for i in 0..self.ball.len() {
            let len = self.ball.words[i].len();
            let c = CornerTag::ALL
                .iter()
                .position(|c| c.selects(x[i], y[i]))
                .unwrap();
            for (slot, &r) in sets.iter_mut().zip(radii) {
                if len <= r {
                    slot[c].insert(&keys[i]);
                }
            }
        }
        sets.into_iter()
            .map(|s| [s[0].len(), s[1].len(), s[2].len(), s[3].len()])
            .collect()
    }

    /// Quotient edges `(Hw, s)` of `H\Γ` with exactly one endpoint in the
    /// set, counted within each radius `0..=R`. An edge counts at radius `r`
    /// once some lift has both endpoints in the ball of radius `r`.
    pub fn coboundary_trace(&self, set: &HalfspaceSet) -> Result<Vec<usize>> {
        let g = self.group;
        let m = self.membership(set)?;
        let keys = self.coset_keys(&set.invariance_subgroup(g))?;
        let mut first: HashMap<(CosetKey, Symbol), usize> = HashMap::new();
        let letters = g.alphabet().letters();
        for i in 0..self.ball.len() {
            let li = self.ball.words[i].len();
            for &s in &letters {
                let k = g.extend_key(&self.ball.keys[i], &Word::letter(s));
                let Some(j) = self.ball.find(&k) else { continue };
                if m[i] == m[j] {
                    continue;
                }
                let id = if s.inverse { (keys[j].clone(), s.inv()) } else { (keys[i].clone(), s) };
                let r = li.max(self.ball.words[j].len());
                let e = first.entry(id).or_insert(r);
                *e = (*e).min(r);
            }
        }
        Ok((0..=self.radius())
            .map(|r| first.values().filter(|&&x| x <= r).count())
            .collect())
    }

    /// Symmetric difference of two sets over the same quotient `H\G`.
    pub fn almost_equal(&self, a: &HalfspaceSet, b: &HalfspaceSet) -> Result<AlmostEqualReport> {
        let g = self.group;
        let ha = a.invariance_subgroup(g);
        let hb = b.invariance_subgroup(g);
        if !same_subgroup(g, &ha, &hb) {
            return Err(Error::Unsupported(
                "almost equality needs both sets on one quotient".into(),
            ));
        }
        let ma = self.membership(a)?;
        let mb = self.membership(b)?;
        let keys = self.coset_keys(&ha)?;
        let diff: Vec<bool> = ma.iter().zip(&mb).map(|(x, y)| x != y).collect();
        let radii: Vec<usize> = (0..=self.radius()).collect();
        let trace = self.image_counts(&diff, &keys, &radii);
        let verdict = match classify(&trace) {
            Growth::Stable => AlmostEqual::AlmostEqual,
            Growth::Growing => AlmostEqual::NotAlmostEqual,
            Growth::Mixed => AlmostEqual::Inconclusive,
        };
        Ok(AlmostEqualReport { trace, verdict })
    }
}

/// Equal subgroups, comparing edge conjugates modulo the edge group.
pub fn same_subgroup(g: &Group, a: &Subgroup, b: &Subgroup) -> bool {
    match (a, b) {
        (
            Subgroup::Edge {
                splitting: i,
                conj: x,
            },
            Subgroup::Edge {
                splitting: j,
                conj: y,
            },
        ) => {
            // xCx⁻¹ = yCy⁻¹ iff x and y name the same edge x·e = y·e.
            let s = g.splitting(*i);
            i == j && s.normalize(x).coset_key() == s.normalize(y).coset_key()
        }
        _ => a == b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::IntervalSet;
    use crate::splitting::tests::{genus2_c, genus2_d, z2_z3};
    use crate::word::Alphabet;

    fn genus2() -> Group {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        Group::split(a, vec![d, c]).unwrap()
    }

    #[test]
    fn incremental_membership_matches_direct() {
        let g = genus2();
        let sw = Sweep::new(&g, 3);
        let l = g.parse("b c^-1").unwrap();
        let r = g.parse("d").unwrap();
        for k in 0..2 {
            for set in [
                HalfspaceSet::standard(k).translate(&l),
                HalfspaceSet::tree(k).translate_right(&r).complemented(),
                HalfspaceSet::standard(k).perturbed(vec![g.parse("a d").unwrap()]),
            ] {
                let m = sw.membership(&set).unwrap();
                for (w, x) in sw.ball.words.iter().zip(&m) {
                    assert_eq!(set.contains(&g, w).unwrap(), *x, "{}", g.fmt(w));
                }
            }
        }
    }

    #[test]
    fn plane_coboundary_is_one_edge() {
        let g = Group::abelian(Alphabet::new(&["n", "m"]).unwrap());
        let sw = Sweep::new(&g, 4);
        let x = HalfspaceSet::predicate(0, IntervalSet::at_least(1));
        let t = sw.coboundary_trace(&x).unwrap();
        assert_eq!(t, vec![0, 1, 1, 1, 1]);
        // Even values: one more crossing edge every step.
        let even = HalfspaceSet::predicate(0, IntervalSet::parse("-8|-6|-4|-2|0|2|4|6|8").unwrap());
        let t = sw.coboundary_trace(&even).unwrap();
        assert_eq!(classify(&t), Growth::Growing);
    }

    #[test]
    fn genus_two_coboundaries_stabilise() {
        let g = genus2();
        let sw = Sweep::new(&g, 4);
        for k in 0..2 {
            let t = sw.coboundary_trace(&HalfspaceSet::standard(k)).unwrap();
            assert_eq!(classify(&t), Growth::Stable, "{t:?}");
        }
    }

    #[test]
    fn almost_equality_examples() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        let sw = Sweep::new(&g, 6);
        let x = HalfspaceSet::standard(0);
        let one = x.perturbed(vec![g.parse("t s t").unwrap()]);
        let r = sw.almost_equal(&x, &one).unwrap();
        assert_eq!(r.verdict, AlmostEqual::AlmostEqual);
        assert_eq!(*r.trace.last().unwrap(), 1);
        let xg = x.translate_right(&g.parse("s").unwrap());
        assert_eq!(sw.almost_equal(&x, &xg).unwrap().verdict, AlmostEqual::AlmostEqual);
        assert_eq!(
            sw.almost_equal(&x, &x.complemented()).unwrap().verdict,
            AlmostEqual::NotAlmostEqual
        );

        let z = Group::abelian(Alphabet::new(&["n", "m"]).unwrap());
        let sw = Sweep::new(&z, 5);
        let x = HalfspaceSet::predicate(0, IntervalSet::at_least(1));
        assert_eq!(
            sw.almost_equal(&x, &x.complemented()).unwrap().verdict,
            AlmostEqual::NotAlmostEqual
        );
    }

    #[test]
    fn standard_set_right_translate_is_almost_equal() {
        let g = genus2();
        let sw = Sweep::new(&g, 4);
        for k in 0..2 {
            let x = HalfspaceSet::standard(k);
            for gen in ["a", "b", "c", "d"] {
                let xg = x.translate_right(&g.parse(gen).unwrap());
                assert_eq!(
                    sw.almost_equal(&x, &xg).unwrap().verdict,
                    AlmostEqual::AlmostEqual,
                    "{k} {gen}"
                );
            }
        }
    }
}
