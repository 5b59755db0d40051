//! Groups given either as Z^k or by a family of splittings of one group.
//!
//! In the split case the first splitting is primary: its normal form is the
//! canonical key of an element. Every other splitting carries a map from the
//! global generators and a map back; both are checked to be mutually
//! inverse isomorphisms when the group is built.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitting::{NormalForm, Splitting, Token};
use crate::word::{Alphabet, Symbol, Word};

#[derive(Debug, Clone)]
pub enum GroupKind {
    /// Free abelian on the alphabet; generator `i` is the `i`-th basis vector.
    Abelian,
    Split(Vec<Splitting>),
}

#[derive(Debug, Clone)]
pub struct Group {
    alphabet: Alphabet,
    kind: GroupKind,
}

/// Canonical name of an element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElemKey {
    Vector(Vec<i64>),
    Form(NormalForm),
}

impl Group {
    pub fn abelian(alphabet: Alphabet) -> Self {
        Group {
            alphabet,
            kind: GroupKind::Abelian,
        }
    }

    pub fn split(alphabet: Alphabet, splittings: Vec<Splitting>) -> Result<Self> {
        if splittings.is_empty() {
            return Err(Error::InvalidSplitting("a split group needs a splitting".into()));
        }
        let g = Group {
            alphabet,
            kind: GroupKind::Split(splittings),
        };
        g.check_isomorphisms()?;
        Ok(g)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, GroupKind::Abelian)
    }

    pub fn splittings(&self) -> &[Splitting] {
        match &self.kind {
            GroupKind::Abelian => &[],
            GroupKind::Split(s) => s,
        }
    }

    pub fn splitting(&self, i: usize) -> &Splitting {
        &self.splittings()[i]
    }

    pub fn splitting_index(&self, name: &str) -> Option<usize> {
        self.splittings().iter().position(|s| s.name() == name)
    }

    /// True when every vertex group of the primary splitting is a free
    /// product of finite groups and the edge group is trivial, so that G is
    /// a free product of finite groups.
    pub fn is_free_product_of_finite(&self) -> bool {
        use crate::factor::SubgroupImage;
        match &self.kind {
            GroupKind::Abelian => false,
            GroupKind::Split(s) => {
                let p = &s[0];
                p.kind() == crate::splitting::SplitKind::Amalgam
                    && matches!(p.image(0), SubgroupImage::Trivial)
                    && [crate::splitting::Side::A, crate::splitting::Side::B]
                        .iter()
                        .all(|&side| {
                            let v = p.vertex(side);
                            (0..v.factor_count()).all(|f| v.table(f as u16).is_some())
                        })
            }
        }
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        self.alphabet.parse_word(text)
    }

    pub fn fmt(&self, w: &Word) -> String {
        self.alphabet.fmt_word(w)
    }

    pub fn key(&self, w: &Word) -> ElemKey {
        match &self.kind {
            GroupKind::Abelian => ElemKey::Vector(self.vector(w)),
            GroupKind::Split(s) => ElemKey::Form(s[0].normalize(w)),
        }
    }

    /// Key of `k·w` given the key of `k`.
    pub fn extend_key(&self, k: &ElemKey, w: &Word) -> ElemKey {
        match (&self.kind, k) {
            (GroupKind::Abelian, ElemKey::Vector(v)) => {
                let mut v = v.clone();
                for (x, d) in v.iter_mut().zip(self.vector(w)) {
                    *x += d;
                }
                ElemKey::Vector(v)
            }
            (GroupKind::Split(s), ElemKey::Form(nf)) => ElemKey::Form(s[0].extend_word(nf, w)),
            _ => unreachable!("key kind matches group kind"),
        }
    }

    pub fn vector(&self, w: &Word) -> Vec<i64> {
        let mut v = vec![0i64; self.alphabet.len()];
        for s in &w.0 {
            v[s.gen as usize] += if s.inverse { -1 } else { 1 };
        }
        v
    }

    pub fn from_vector(&self, v: &[i64]) -> Word {
        let mut out = Word::identity();
        for (i, &k) in v.iter().enumerate() {
            out = out.mul(&Word::letter(Symbol::pos(i as u16)).pow(k));
        }
        out
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        match self.key(w) {
            ElemKey::Vector(v) => v.iter().all(|&x| x == 0),
            ElemKey::Form(nf) => nf.is_identity(),
        }
    }

    pub fn equal(&self, u: &Word, v: &Word) -> bool {
        self.key(u) == self.key(v)
    }

    /// A short word for a key (normal-form spelling through the back map).
    pub fn word_of_key(&self, k: &ElemKey) -> Word {
        match (&self.kind, k) {
            (GroupKind::Abelian, ElemKey::Vector(v)) => self.from_vector(v),
            (GroupKind::Split(s), ElemKey::Form(nf)) => s[0].nf_to_global(nf),
            _ => unreachable!("key kind matches group kind"),
        }
    }

    /// Checks that each splitting's maps are inverse isomorphisms with the primary one.
    fn check_isomorphisms(&self) -> Result<()> {
        let GroupKind::Split(all) = &self.kind else { return Ok(()) };
        let primary = &all[0];
        let prim_id = |w: &Word| primary.normalize(w).is_identity();
        for s in all {
            let fail = |what: &str| {
                Err(Error::InvalidSplitting(format!(
                    "{}: {what} (the maps to and from the global generators are not inverse isomorphisms)",
                    s.name()
                )))
            };
            // Relators of s, pulled back to global words, vanish in G.
            for r in s.relators() {
                if !prim_id(&s.tokens_to_global(&r)) {
                    return fail("a relator does not vanish in the group");
                }
            }
            // Relators of G (via the primary's relators and its own round trips) vanish in s.
            for r in primary.relators() {
                let w = primary.tokens_to_global(&r);
                if !s.normalize(&w).is_identity() {
                    return fail("a relator of the group does not vanish");
                }
            }
            for g in 0..self.alphabet.len() as u16 {
                let x = Word::letter(Symbol::pos(g));
                let round = primary.tokens_to_global(&primary.word_tokens(&x));
                if !s.normalize(&x.mul(&round.inverse())).is_identity() {
                    return fail("a generator round trip is not trivial");
                }
                let there_and_back = s.tokens_to_global(&s.word_tokens(&x));
                if !prim_id(&x.mul(&there_and_back.inverse())) {
                    return fail("a generator does not map back to itself");
                }
            }
        }
        Ok(())
    }

    /// Ball of the given radius in the Cayley graph, by breadth-first search.
    /// Each element is named by its shortlex-least spelling.
    pub fn ball(&self, radius: usize) -> Ball {
        let letters = self.alphabet.letters();
        let mut words = vec![Word::identity()];
        let mut keys = vec![self.key(&Word::identity())];
        let mut index: HashMap<ElemKey, usize> = HashMap::from([(keys[0].clone(), 0)]);
        let mut parent = vec![(0usize, Symbol::pos(0))];
        let mut layer_end = vec![1];
        let mut start = 0;
        for _ in 0..radius {
            let end = words.len();
            for i in start..end {
                for &s in &letters {
                    if words[i].0.last() == Some(&s.inv()) {
                        continue;
                    }
                    let k = self.extend_key(&keys[i], &Word::letter(s));
                    if index.contains_key(&k) {
                        continue;
                    }
                    let mut w = words[i].clone();
                    w.push(s);
                    index.insert(k.clone(), words.len());
                    parent.push((i, s));
                    words.push(w);
                    keys.push(k);
                }
            }
            start = end;
            layer_end.push(words.len());
        }
        Ball {
            radius,
            words,
            keys,
            layer_end,
            parent,
            index,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ball {
    pub radius: usize,
    pub words: Vec<Word>,
    pub keys: Vec<ElemKey>,
    /// `layer_end[r]` is the number of elements of length at most `r`.
    pub layer_end: Vec<usize>,
    /// BFS parent and the letter leading from it (unused for the identity).
    pub parent: Vec<(usize, Symbol)>,
    index: HashMap<ElemKey, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn find(&self, k: &ElemKey) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Elements of length at most `r`.
    pub fn within(&self, r: usize) -> std::ops::Range<usize> {
        0..self.layer_end[r.min(self.radius)]
    }
}

/// A subgroup with a computable name for each right coset `Σk`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subgroup {
    Trivial,
    /// `conj · C · conj⁻¹` where `C` is the edge group of a splitting.
    Edge { splitting: usize, conj: Word },
    /// Span of some standard basis vectors of Z^k.
    Coordinate { axes: Vec<usize> },
    /// Explicit generators; coset names are not available.
    Generated(Vec<Word>),
}

/// Canonical name of a right coset `Σk`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CosetKey {
    Element(ElemKey),
    Edge(NormalForm),
    Vector(Vec<i64>),
}

impl Subgroup {
    pub fn generators(&self, g: &Group) -> Vec<Word> {
        match self {
            Subgroup::Trivial => Vec::new(),
            Subgroup::Edge { splitting, conj } => g
                .splitting(*splitting)
                .edge_generators()
                .iter()
                .map(|c| conj.mul(c).mul(&conj.inverse()))
                .collect(),
            Subgroup::Coordinate { axes } => axes
                .iter()
                .map(|&i| Word::letter(Symbol::pos(i as u16)))
                .collect(),
            Subgroup::Generated(gens) => gens.clone(),
        }
    }

    pub fn is_finite(&self, g: &Group) -> bool {
        match self {
            Subgroup::Trivial => true,
            Subgroup::Edge { splitting, .. } => g.splitting(*splitting).image(0).order().is_some(),
            Subgroup::Coordinate { axes } => axes.is_empty(),
            Subgroup::Generated(gens) => gens.iter().all(|w| g.is_identity(w)),
        }
    }

    /// Conjugate `h Σ h⁻¹`.
    pub fn conjugate(&self, h: &Word) -> Subgroup {
        match self {
            Subgroup::Edge { splitting, conj } => Subgroup::Edge {
                splitting: *splitting,
                conj: h.mul(conj),
            },
            Subgroup::Generated(gens) => Subgroup::Generated(
                gens.iter().map(|w| h.mul(w).mul(&h.inverse())).collect(),
            ),
            // Trivial and coordinate subgroups are normal.
            other => other.clone(),
        }
    }

    pub fn coset_key(&self, g: &Group, k: &Word) -> Result<CosetKey> {
        match self {
            Subgroup::Trivial => Ok(CosetKey::Element(g.key(k))),
            Subgroup::Edge { splitting, conj } => {
                // Σk ↦ the edge k⁻¹·conj·e of the tree.
                let s = g.splitting(*splitting);
                Ok(CosetKey::Edge(s.normalize(&k.inverse().mul(conj)).coset_key()))
            }
            Subgroup::Coordinate { axes } => {
                let mut v = g.vector(k);
                for &i in axes {
                    v[i] = 0;
                }
                Ok(CosetKey::Vector(v))
            }
            Subgroup::Generated(_) => Err(Error::Unsupported(
                "coset names for an explicitly generated subgroup".into(),
            )),
        }
    }

    /// Coset key of `k` computed from the key of `k` in the primary splitting.
    pub fn coset_key_of(&self, g: &Group, key: &ElemKey, word: &Word) -> Result<CosetKey> {
        match (self, key) {
            (Subgroup::Trivial, _) => Ok(CosetKey::Element(key.clone())),
            (Subgroup::Coordinate { axes }, ElemKey::Vector(v)) => {
                let mut v = v.clone();
                for &i in axes {
                    v[i] = 0;
                }
                Ok(CosetKey::Vector(v))
            }
            _ => self.coset_key(g, word),
        }
    }
}

/// Tokens of the primary splitting for a global word.
pub fn primary_tokens(g: &Group, w: &Word) -> Vec<Token> {
    g.splitting(0).word_tokens(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::tests::{genus2_c, genus2_d, z2_z3};

    #[test]
    fn ball_sizes_of_free_product() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        // Z/2 * Z/3: sphere sizes 1, 3, 4, 6, 8, 12, ...
        let b = g.ball(5);
        let spheres: Vec<usize> = b.layer_end.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(b.layer_end[0], 1);
        assert_eq!(spheres, vec![3, 4, 6, 8, 12]);
    }

    #[test]
    fn genus_two_splittings_are_compatible() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        let g = Group::split(a.clone(), vec![d, c]).unwrap();
        // Surface group growth: 1, 8, 56, ...
        let b = g.ball(2);
        assert_eq!(b.layer_end, vec![1, 9, 65]);
        let x = a.parse_word("a b a^-1 b^-1 c d c^-1 d^-1").unwrap();
        assert!(g.is_identity(&x));
    }

    #[test]
    fn inconsistent_map_is_rejected() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        // b must go to a^-1 t z; appending a breaks the round trip.
        let mut spec = c.spec().clone();
        spec.map[1].1 = "a^-1 t z a".into();
        let broken = Splitting::build(spec, &a).and_then(|s| Group::split(a.clone(), vec![d.clone(), s]));
        assert!(broken.is_err());
        // A wrong edge identification is caught by the relator check.
        let mut spec = c.spec().clone();
        spec.edge_b = vec!["z a c".into()];
        let broken = Splitting::build(spec, &a).and_then(|s| Group::split(a.clone(), vec![d, s]));
        assert!(broken.is_err());
    }

    #[test]
    fn edge_coset_keys() {
        let (a, d) = genus2_d();
        let g = Group::split(a.clone(), vec![d]).unwrap();
        let sigma = Subgroup::Edge {
            splitting: 0,
            conj: Word::identity(),
        };
        let k = a.parse_word("a c").unwrap();
        let sk = a.parse_word("[a,b]^2 a c").unwrap();
        assert_eq!(sigma.coset_key(&g, &k).unwrap(), sigma.coset_key(&g, &sk).unwrap());
        let other = a.parse_word("c a").unwrap();
        assert_ne!(sigma.coset_key(&g, &k).unwrap(), sigma.coset_key(&g, &other).unwrap());
    }
}
