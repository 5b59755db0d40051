//! Finite automata over free-product normal forms.
//!
//! When G is a free product of finite groups, elements are exactly the
//! words `x₁ x₂ … x_n` of nontrivial factor elements with neighbours in
//! different factors. For the sets handled here, membership of a form of
//! length at least `L` depends only on its first `L` letters, so each corner
//! is accepted by a trie of depth `L` closed off by absorbing states that
//! remember the accept bit and the last factor.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{Syl, VElem};
use crate::group::{Group, Subgroup};
use crate::sets::{CornerTag, HalfspaceSet, SetSource};
use crate::splitting::{NormalForm, Side, Token};
use crate::word::Word;

/// A nontrivial element of one free factor of the primary splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlatLetter {
    pub side: Side,
    pub syl: Syl,
}

impl FlatLetter {
    /// Global factor id: side and factor index.
    pub fn factor(&self) -> (Side, u16) {
        (self.side, self.syl.factor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    pub start: usize,
    /// `trans[state][letter]`
    pub trans: Vec<Vec<Option<usize>>>,
    pub accept: Vec<bool>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.trans.len()
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        seen[self.start] = true;
        let mut queue = VecDeque::from([self.start]);
        while let Some(q) = queue.pop_front() {
            for t in self.trans[q].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, row) in self.trans.iter().enumerate() {
            for t in row.iter().flatten() {
                rev[*t].push(q);
            }
        }
        let mut seen = self.accept.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| seen[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// The language is infinite iff some cycle runs through useful states.
    pub fn is_infinite(&self) -> bool {
        let r = self.reachable();
        let c = self.coreachable();
        let useful: Vec<bool> = r.iter().zip(&c).map(|(a, b)| *a && *b).collect();
        // Kahn's algorithm on the useful subgraph; leftovers lie on cycles.
        let n = self.state_count();
        let mut indeg = vec![0usize; n];
        for q in (0..n).filter(|&q| useful[q]) {
            for &t in self.trans[q].iter().flatten() {
                if useful[t] {
                    indeg[t] += 1;
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| useful[q] && indeg[q] == 0).collect();
        let mut removed = 0;
        while let Some(q) = queue.pop_front() {
            removed += 1;
            for &t in self.trans[q].iter().flatten() {
                if useful[t] {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        queue.push_back(t);
                    }
                }
            }
        }
        removed < useful.iter().filter(|&&u| u).count()
    }

    /// Number of accepted words of each length `0..=n`.
    pub fn count_by_length(&self, n: usize) -> Vec<u128> {
        let mut cur = vec![0u128; self.state_count()];
        cur[self.start] = 1;
        let mut out = Vec::with_capacity(n + 1);
        for step in 0..=n {
            out.push(
                cur.iter()
                    .zip(&self.accept)
                    .filter(|(_, a)| **a)
                    .map(|(c, _)| *c)
                    .sum(),
            );
            if step == n {
                break;
            }
            let mut next = vec![0u128; self.state_count()];
            for (q, row) in self.trans.iter().enumerate() {
                if cur[q] == 0 {
                    continue;
                }
                for t in row.iter().flatten() {
                    next[*t] += cur[q];
                }
            }
            cur = next;
        }
        out
    }
}

/// All flat letters of a free product of finite groups, or an error.
pub fn flat_letters(g: &Group) -> Result<Vec<FlatLetter>> {
    if !g.is_free_product_of_finite() {
        return Err(Error::Unsupported(
            "automata need a free product of finite groups".into(),
        ));
    }
    let p = g.splitting(0);
    let mut out = Vec::new();
    for side in [Side::A, Side::B] {
        let v = p.vertex(side);
        for f in 0..v.factor_count() as u16 {
            let order = v.table(f).expect("finite factor").order();
            for val in 1..order as i64 {
                out.push(FlatLetter {
                    side,
                    syl: Syl { factor: f, val },
                });
            }
        }
    }
    Ok(out)
}

/// The flat normal form of an element (primary splitting syllables expanded).
pub fn flatten(g: &Group, w: &Word) -> Vec<FlatLetter> {
    match g.splitting(0).normalize(w) {
        NormalForm::Amalgam { syllables, .. } => syllables
            .iter()
            .flat_map(|(side, x)| x.0.iter().map(move |&syl| FlatLetter { side: *side, syl }))
            .collect(),
        NormalForm::Hnn { .. } => Vec::new(),
    }
}

pub fn flat_to_word(g: &Group, letters: &[FlatLetter]) -> Word {
    let p = g.splitting(0);
    let toks: Vec<Token> = letters
        .iter()
        .map(|l| Token::Vertex(l.side, VElem(vec![l.syl])))
        .collect();
    p.tokens_to_global(&toks)
}

/// Is membership in the standard set of splitting `k` read off the first flat letter?
/// True when `k` has trivial edge group and every factor maps into one vertex group.
fn first_letter_determined(g: &Group, letters: &[FlatLetter], k: usize) -> bool {
    let s = g.splitting(k);
    if s.kind() != crate::splitting::SplitKind::Amalgam || s.image(0).order() != Some(1) {
        return false;
    }
    let mut side_of: std::collections::HashMap<(Side, u16), Side> = Default::default();
    for l in letters {
        let nf = s.normalize(&flat_to_word(g, &[*l]));
        let NormalForm::Amalgam { syllables, .. } = nf else { return false };
        if syllables.len() != 1 {
            return false;
        }
        if *side_of.entry(l.factor()).or_insert(syllables[0].0) != syllables[0].0 {
            return false;
        }
    }
    true
}

fn trivial_subgroup(g: &Group, sub: &Subgroup) -> bool {
    match sub {
        Subgroup::Trivial => true,
        Subgroup::Edge { splitting, .. } => g.splitting(*splitting).image(0).order() == Some(1),
        Subgroup::Coordinate { .. } => false,
        Subgroup::Generated(gens) => gens.iter().all(|w| g.is_identity(w)),
    }
}

/// Length `L` such that membership of a form of length at least `L` is
/// decided by its first `L` letters; `None` if the set is not of that kind.
pub fn prefix_depth(g: &Group, letters: &[FlatLetter], set: &HalfspaceSet) -> Option<usize> {
    if !g.is_identity(&set.right) {
        return None;
    }
    match &set.source {
        SetSource::Standard { splitting } | SetSource::Tree { splitting } => {
            first_letter_determined(g, letters, *splitting)
                .then(|| flatten(g, &set.left).len() + 1)
        }
        SetSource::Perturbed { base, extra } => {
            if !trivial_subgroup(g, &base.invariance_subgroup(g)) {
                return None;
            }
            let inner = prefix_depth(g, letters, &base.translate(&set.left))?;
            let far = extra
                .iter()
                .map(|e| flatten(g, &set.left.mul(e)).len() + 1)
                .max()
                .unwrap_or(0);
            Some(inner.max(far))
        }
        SetSource::Predicate { .. } => None,
    }
}

/// Acceptors for the four corners of `x` and `y`, in `CornerTag::ALL` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerAutomata {
    pub depth: usize,
    pub letters: Vec<FlatLetter>,
    pub corners: Vec<Dfa>,
}

pub fn corner_automata(g: &Group, x: &HalfspaceSet, y: &HalfspaceSet) -> Result<CornerAutomata> {
    let letters = flat_letters(g)?;
    let unsupported = || Error::Unsupported("set membership is not prefix-determined".into());
    let depth = prefix_depth(g, &letters, x)
        .ok_or_else(unsupported)?
        .max(prefix_depth(g, &letters, y).ok_or_else(unsupported)?);

    // Trie nodes: forms of length < depth.
    let mut words: Vec<Vec<FlatLetter>> = vec![Vec::new()];
    let mut member: Vec<(bool, bool)> = Vec::new();
    let mut children: Vec<Vec<Option<usize>>> = Vec::new();
    let mut leaf_members: Vec<Vec<Option<(bool, bool)>>> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let w = words[i].clone();
        let el = flat_to_word(g, &w);
        member.push((x.contains(g, &el)?, y.contains(g, &el)?));
        let mut row = vec![None; letters.len()];
        let mut leaf = vec![None; letters.len()];
        for (li, l) in letters.iter().enumerate() {
            if w.last().is_some_and(|p| p.factor() == l.factor()) {
                continue;
            }
            let mut v = w.clone();
            v.push(*l);
            if v.len() < depth {
                row[li] = Some(words.len());
                words.push(v);
            } else {
                let e = flat_to_word(g, &v);
                leaf[li] = Some((x.contains(g, &e)?, y.contains(g, &e)?));
            }
        }
        children.push(row);
        leaf_members.push(leaf);
        i += 1;
    }

    let mut factors: Vec<(Side, u16)> = letters.iter().map(|l| l.factor()).collect();
    factors.dedup();
    let nt = words.len();
    // Absorbing state for (accept, factor index) sits at nt + 2·f + accept.
    let absorb = |acc: bool, f: usize| nt + 2 * f + acc as usize;
    let fidx = |l: &FlatLetter| factors.iter().position(|&f| f == l.factor()).unwrap();

    let mut corners = Vec::new();
    for c in CornerTag::ALL {
        let n = nt + 2 * factors.len();
        let mut trans = vec![vec![None; letters.len()]; n];
        let mut accept = vec![false; n];
        for q in 0..nt {
            accept[q] = c.selects(member[q].0, member[q].1);
            for (li, l) in letters.iter().enumerate() {
                if let Some(t) = children[q][li] {
                    trans[q][li] = Some(t);
                } else if let Some((mx, my)) = leaf_members[q][li] {
                    trans[q][li] = Some(absorb(c.selects(mx, my), fidx(l)));
                }
            }
        }
        for f in 0..factors.len() {
            for acc in [false, true] {
                let q = absorb(acc, f);
                accept[q] = acc;
                for (li, l) in letters.iter().enumerate() {
                    if fidx(l) != f {
                        trans[q][li] = Some(absorb(acc, fidx(l)));
                    }
                }
            }
        }
        corners.push(Dfa {
            start: 0,
            trans,
            accept,
        });
    }
    Ok(CornerAutomata {
        depth,
        letters,
        corners,
    })
}

/// All flat forms of each length `0..=n`.
pub fn flat_sphere_words(letters: &[FlatLetter], n: usize) -> Vec<Vec<Vec<FlatLetter>>> {
    let mut out = vec![vec![Vec::new()]];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in out.last().unwrap() {
            for l in letters {
                if w.last().is_some_and(|p: &FlatLetter| p.factor() == l.factor()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(*l);
                next.push(v);
            }
        }
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::tests::z2_z3;

    #[test]
    fn dfa_infinitude() {
        // a* over one letter: infinite.
        let loop_dfa = Dfa {
            start: 0,
            trans: vec![vec![Some(0)]],
            accept: vec![true],
        };
        assert!(loop_dfa.is_infinite());
        assert_eq!(loop_dfa.count_by_length(3), vec![1, 1, 1, 1]);
        // A cycle that never reaches acceptance does not count.
        let dead = Dfa {
            start: 0,
            trans: vec![vec![Some(1)], vec![Some(2)], vec![Some(2)]],
            accept: vec![false, true, false],
        };
        assert!(!dead.is_infinite());
        assert_eq!(dead.count_by_length(4), vec![0, 1, 0, 0, 0]);
    }

    #[test]
    fn z2_z3_letters_and_flattening() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        let letters = flat_letters(&g).unwrap();
        assert_eq!(letters.len(), 3);
        let w = g.parse("s t s t^-1").unwrap();
        let f = flatten(&g, &w);
        assert_eq!(f.len(), 4);
        assert!(g.equal(&flat_to_word(&g, &f), &w));
        let spheres: Vec<usize> = flat_sphere_words(&letters, 5).iter().map(|s| s.len()).collect();
        assert_eq!(spheres, vec![1, 3, 4, 6, 8, 12]);
    }

    #[test]
    fn corners_of_standard_set_with_itself() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        let x = HalfspaceSet::standard(0);
        let ca = corner_automata(&g, &x, &x).unwrap();
        let inf: Vec<bool> = ca.corners.iter().map(|d| d.is_infinite()).collect();
        // X∩X and X*∩X* are infinite, the mixed corners empty.
        assert_eq!(inf, vec![true, false, false, true]);
        // Translating by an element not in X keeps one corner finite but nonempty.
        let y = x.translate(&g.parse("t").unwrap());
        let ca = corner_automata(&g, &x, &y).unwrap();
        assert!(ca.corners.iter().any(|d| !d.is_infinite()));
    }
}
