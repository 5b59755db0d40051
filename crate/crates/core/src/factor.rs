//! Vertex groups: free products of finite groups and infinite cyclic groups,
//! and the edge-group images sitting inside them.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::FiniteGroupTable;
use crate::stallings::{stallings_graph, FoldedAutomaton, LetterOrder};
use crate::word::{Symbol, Word};

/// How a free factor was declared. Kept so scenarios can be written back out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorSpec {
    /// Infinite cyclic on one letter.
    Free(String),
    /// Z/n generated by `letter`.
    Cyclic { letter: String, order: usize },
    /// Z/2 x Z/2 on two letters.
    Klein { x: String, y: String },
    /// Explicit Cayley table; row/column order follows `names`, `names[0]` is e.
    Table { names: Vec<String>, rows: Vec<Vec<usize>> },
}

/// One syllable of a free product element. For a free factor `val` is a
/// nonzero exponent, for a finite factor a nonzero element index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syl {
    pub factor: u16,
    pub val: i64,
}

/// A reduced element of a vertex group (adjacent syllables in different factors).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VElem(pub Vec<Syl>);

impl VElem {
    pub fn identity() -> Self {
        VElem(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGroup {
    specs: Vec<FactorSpec>,
    tables: Vec<Option<FiniteGroupTable>>,
}

impl VertexGroup {
    pub fn new(specs: Vec<FactorSpec>) -> Result<Self> {
        let mut tables = Vec::new();
        for s in &specs {
            tables.push(match s {
                FactorSpec::Free(_) => None,
                FactorSpec::Cyclic { letter, order } => {
                    if *order < 2 {
                        return Err(Error::InvalidTable(format!("cyclic factor of order {order}")));
                    }
                    Some(FiniteGroupTable::cyclic(letter, *order))
                }
                FactorSpec::Klein { x, y } => Some(FiniteGroupTable::klein(x, y)),
                FactorSpec::Table { names, rows } => {
                    Some(FiniteGroupTable::new(names.clone(), rows.clone())?)
                }
            });
        }
        let vg = VertexGroup { specs, tables };
        let mut seen = HashMap::new();
        for name in vg.token_names() {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::Alphabet(format!("name {name:?} used twice in a vertex group")));
            }
        }
        Ok(vg)
    }

    /// Free group on the given letters.
    pub fn free<S: AsRef<str>>(letters: &[S]) -> Self {
        VertexGroup::new(letters.iter().map(|l| FactorSpec::Free(l.as_ref().into())).collect())
            .expect("distinct letters")
    }

    pub fn specs(&self) -> &[FactorSpec] {
        &self.specs
    }

    pub fn factor_count(&self) -> usize {
        self.specs.len()
    }

    pub fn table(&self, f: u16) -> Option<&FiniteGroupTable> {
        self.tables[f as usize].as_ref()
    }

    pub fn is_free(&self) -> bool {
        self.tables.iter().all(|t| t.is_none())
    }

    /// Order when the group is a single finite factor.
    pub fn finite_order(&self) -> Option<usize> {
        match self.tables.as_slice() {
            [Some(t)] => Some(t.order()),
            [] => Some(1),
            _ => None,
        }
    }

    /// Names usable in tokens: free letters and non-identity finite element names.
    pub fn token_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (s, t) in self.specs.iter().zip(&self.tables) {
            match (s, t) {
                (FactorSpec::Free(l), _) => out.push(l.clone()),
                (_, Some(t)) => out.extend(t.names()[1..].iter().cloned()),
                _ => {}
            }
        }
        out
    }

    /// Basic named elements: free letters and finite element names, with their syllable.
    pub fn named_elements(&self) -> Vec<(String, Syl)> {
        let mut out = Vec::new();
        for (f, (s, t)) in self.specs.iter().zip(&self.tables).enumerate() {
            match (s, t) {
                (FactorSpec::Free(l), _) => out.push((l.clone(), Syl { factor: f as u16, val: 1 })),
                (_, Some(t)) => {
                    for (i, n) in t.names().iter().enumerate().skip(1) {
                        out.push((n.clone(), Syl { factor: f as u16, val: i as i64 }));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Parses one token such as `a`, `a^-2`, `t^2` or `xy`.
    pub fn parse_token(&self, text: &str) -> Result<VElem> {
        let text = text.trim();
        for (f, t) in self.tables.iter().enumerate() {
            if let Some(t) = t {
                if let Some(i) = t.lookup(text) {
                    return Ok(self.syllable(Syl { factor: f as u16, val: i as i64 }));
                }
            }
        }
        let (base, k) = match text.split_once('^') {
            Some((b, k)) => (
                b.trim(),
                k.trim().parse::<i64>().map_err(|_| {
                    Error::Alphabet(format!("bad exponent in vertex token {text:?}"))
                })?,
            ),
            None => (text, 1),
        };
        for (f, (s, t)) in self.specs.iter().zip(&self.tables).enumerate() {
            let f = f as u16;
            match (s, t) {
                (FactorSpec::Free(l), _) if l == base => {
                    return Ok(self.syllable(Syl { factor: f, val: k }));
                }
                (_, Some(t)) => {
                    if let Some(i) = t.lookup(base) {
                        return Ok(self.syllable(Syl { factor: f, val: t.pow(i, k) as i64 }));
                    }
                }
                _ => {}
            }
        }
        Err(Error::Alphabet(format!("unknown vertex-group token {text:?}")))
    }

    /// Parses whitespace separated tokens into their product.
    pub fn parse_elem(&self, text: &str) -> Result<VElem> {
        let mut out = VElem::identity();
        for tok in text.split_whitespace() {
            if tok == "e" || tok == "1" {
                continue;
            }
            out = self.mul(&out, &self.parse_token(tok)?);
        }
        Ok(out)
    }

    pub fn syllable(&self, s: Syl) -> VElem {
        if s.val == 0 {
            VElem::identity()
        } else {
            VElem(vec![s])
        }
    }

    fn push_syl(&self, out: &mut Vec<Syl>, s: Syl) {
        if s.val == 0 {
            return;
        }
        match out.last_mut() {
            Some(last) if last.factor == s.factor => {
                let v = match &self.tables[s.factor as usize] {
                    None => last.val + s.val,
                    Some(t) => t.mul(last.val as usize, s.val as usize) as i64,
                };
                if v == 0 {
                    out.pop();
                } else {
                    last.val = v;
                }
            }
            _ => out.push(s),
        }
    }

    pub fn mul(&self, x: &VElem, y: &VElem) -> VElem {
        let mut out = x.0.clone();
        for &s in &y.0 {
            self.push_syl(&mut out, s);
        }
        VElem(out)
    }

    pub fn inv_syl(&self, s: Syl) -> Syl {
        let val = match &self.tables[s.factor as usize] {
            None => -s.val,
            Some(t) => t.inv(s.val as usize) as i64,
        };
        Syl { factor: s.factor, val }
    }

    pub fn inv(&self, x: &VElem) -> VElem {
        VElem(x.0.iter().rev().map(|&s| self.inv_syl(s)).collect())
    }

    /// Syllable length, with free syllables weighted by |exponent|.
    pub fn length(&self, x: &VElem) -> usize {
        x.0.iter()
            .map(|s| match self.tables[s.factor as usize] {
                None => s.val.unsigned_abs() as usize,
                Some(_) => 1,
            })
            .sum()
    }

    /// For a free vertex group: the element as a word (factor index = generator).
    pub fn to_word(&self, x: &VElem) -> Word {
        let mut out = Word::identity();
        for s in &x.0 {
            let sym = Symbol::new(s.factor, s.val < 0);
            for _ in 0..s.val.unsigned_abs() {
                out.push(sym);
            }
        }
        out
    }

    pub fn from_word(&self, w: &Word) -> VElem {
        let mut out = Vec::new();
        for s in &w.0 {
            self.push_syl(
                &mut out,
                Syl {
                    factor: s.gen,
                    val: if s.inverse { -1 } else { 1 },
                },
            );
        }
        VElem(out)
    }

    pub fn fmt_syl(&self, s: Syl) -> String {
        match (&self.specs[s.factor as usize], &self.tables[s.factor as usize]) {
            (FactorSpec::Free(l), _) => {
                if s.val == 1 {
                    l.clone()
                } else {
                    format!("{l}^{}", s.val)
                }
            }
            (_, Some(t)) => t.name(s.val as usize).to_string(),
            _ => unreachable!("finite factor without table"),
        }
    }

    pub fn fmt_elem(&self, x: &VElem) -> String {
        if x.is_identity() {
            return "e".into();
        }
        x.0.iter().map(|&s| self.fmt_syl(s)).collect::<Vec<_>>().join(" ")
    }

    /// Free letters of the group, used by [`LetterOrder`].
    pub fn rank(&self) -> usize {
        self.specs.len()
    }
}

/// Which transversal of an edge group to use for canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Transversal {
    /// Least representative in shortlex / least element index.
    #[default]
    Shortlex,
    /// Least in the reversed alphabet / greatest element index.
    Reversed,
    /// Explicit representatives for a finite image: one per coset, as element indices.
    Explicit(Vec<usize>),
}

/// The image of an edge group inside a vertex group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubgroupImage {
    Trivial,
    /// A subgroup of a single finite factor. `words[i]` expresses `members[i]`
    /// in the abstract generators.
    Finite {
        factor: u16,
        gens: Vec<usize>,
        members: Vec<usize>,
        words: Vec<Word>,
    },
    /// A subgroup of a free vertex group, with its folded automaton.
    Free { gens: Vec<Word>, aut: FoldedAutomaton },
}

impl SubgroupImage {
    pub fn build(vg: &VertexGroup, gens: &[VElem]) -> Result<Self> {
        if gens.iter().all(|g| g.is_identity()) {
            return Ok(SubgroupImage::Trivial);
        }
        if vg.is_free() {
            let words: Vec<Word> = gens.iter().map(|g| vg.to_word(g)).collect();
            let aut = stallings_graph(vg.rank(), &words);
            return Ok(SubgroupImage::Free { gens: words, aut });
        }
        let factor = gens
            .iter()
            .find(|g| !g.is_identity())
            .map(|g| g.0[0].factor)
            .unwrap_or(0);
        let single = gens.iter().all(|g| {
            g.is_identity() || (g.0.len() == 1 && g.0[0].factor == factor)
        });
        let Some(table) = vg.table(factor).filter(|_| single) else {
            return Err(Error::Unsupported(
                "edge group must be trivial, inside one finite factor, or in a free vertex group"
                    .into(),
            ));
        };
        let idx: Vec<usize> = gens
            .iter()
            .map(|g| g.0.first().map_or(0, |s| s.val as usize))
            .collect();
        // BFS gives each member a word in the abstract generators.
        let mut word_of: HashMap<usize, Word> = HashMap::from([(0, Word::identity())]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let w = word_of[&x].clone();
            for (i, &g) in idx.iter().enumerate() {
                for (y, s) in [
                    (table.mul(x, g), Symbol::pos(i as u16)),
                    (table.mul(x, table.inv(g)), Symbol::new(i as u16, true)),
                ] {
                    if let std::collections::hash_map::Entry::Vacant(e) = word_of.entry(y) {
                        let mut v = w.clone();
                        v.push(s);
                        e.insert(v);
                        queue.push_back(y);
                    }
                }
            }
        }
        let mut members: Vec<usize> = word_of.keys().copied().collect();
        members.sort_unstable();
        let words = members.iter().map(|m| word_of[m].clone()).collect();
        Ok(SubgroupImage::Finite {
            factor,
            gens: idx,
            members,
            words,
        })
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<usize> {
        match self {
            SubgroupImage::Trivial => Some(1),
            SubgroupImage::Finite { members, .. } => Some(members.len()),
            SubgroupImage::Free { .. } => None,
        }
    }

    pub fn contains(&self, vg: &VertexGroup, c: &VElem) -> bool {
        match self {
            SubgroupImage::Trivial => c.is_identity(),
            SubgroupImage::Finite {
                factor, members, ..
            } => match c.0.as_slice() {
                [] => true,
                [s] => s.factor == *factor && members.binary_search(&(s.val as usize)).is_ok(),
                _ => false,
            },
            SubgroupImage::Free { aut, .. } => aut.is_member(&vg.to_word(c)),
        }
    }

    /// `c` as a word in the abstract edge generators.
    pub fn witness(&self, vg: &VertexGroup, c: &VElem) -> Option<Word> {
        match self {
            SubgroupImage::Trivial => c.is_identity().then(Word::identity),
            SubgroupImage::Finite {
                factor,
                members,
                words,
                ..
            } => match c.0.as_slice() {
                [] => Some(Word::identity()),
                [s] if s.factor == *factor => members
                    .binary_search(&(s.val as usize))
                    .ok()
                    .map(|i| words[i].clone()),
                _ => None,
            },
            SubgroupImage::Free { aut, .. } => aut.witness(&vg.to_word(c)),
        }
    }

    /// Evaluates a word in the abstract generators.
    pub fn eval(&self, vg: &VertexGroup, w: &Word) -> VElem {
        match self {
            SubgroupImage::Trivial => VElem::identity(),
            SubgroupImage::Finite { factor, gens, .. } => {
                let t = vg.table(*factor).expect("finite factor");
                let v = w.0.iter().fold(0, |acc, s| {
                    let g = gens[s.gen as usize];
                    t.mul(acc, if s.inverse { t.inv(g) } else { g })
                });
                vg.syllable(Syl {
                    factor: *factor,
                    val: v as i64,
                })
            }
            SubgroupImage::Free { gens, .. } => {
                vg.from_word(&crate::stallings::evaluate(gens, w))
            }
        }
    }

    /// True when the image is all of the vertex group.
    pub fn is_everything(&self, vg: &VertexGroup) -> bool {
        match self {
            SubgroupImage::Trivial => vg.factor_count() == 0,
            SubgroupImage::Finite {
                factor, members, ..
            } => {
                vg.factor_count() == 1
                    && members.len() == vg.table(*factor).map_or(0, |t| t.order())
            }
            SubgroupImage::Free { aut, .. } => {
                aut.state_count() == 1 && aut.transition_count() == 2 * vg.rank()
            }
        }
    }

    /// Splits `y = rep·c` with `c` in the image and `rep` from the transversal.
    pub fn decompose(&self, vg: &VertexGroup, y: &VElem, tr: &Transversal) -> (VElem, VElem) {
        match self {
            SubgroupImage::Trivial => (y.clone(), VElem::identity()),
            SubgroupImage::Finite {
                factor, members, ..
            } => {
                let Some(&last) = y.0.last().filter(|s| s.factor == *factor) else {
                    return (y.clone(), VElem::identity());
                };
                let t = vg.table(*factor).expect("finite factor");
                let s = last.val as usize;
                let coset: Vec<usize> = members.iter().map(|&c| t.mul(s, c)).collect();
                let r = if coset.contains(&0) {
                    0
                } else {
                    match tr {
                        Transversal::Shortlex => *coset.iter().min().unwrap(),
                        Transversal::Reversed => *coset.iter().max().unwrap(),
                        Transversal::Explicit(reps) => *reps
                            .iter()
                            .find(|r| coset.contains(r))
                            .unwrap_or_else(|| coset.iter().min().unwrap()),
                    }
                };
                let c = t.mul(t.inv(r), s);
                let mut rep = y.0[..y.0.len() - 1].to_vec();
                if r != 0 {
                    rep.push(Syl {
                        factor: *factor,
                        val: r as i64,
                    });
                }
                (
                    VElem(rep),
                    vg.syllable(Syl {
                        factor: *factor,
                        val: c as i64,
                    }),
                )
            }
            SubgroupImage::Free { aut, .. } => {
                let order = match tr {
                    Transversal::Reversed => LetterOrder::reversed(vg.rank()),
                    _ => LetterOrder::shortlex(vg.rank()),
                };
                let (rep, h, _) = aut.decompose_in(&vg.to_word(y), &order);
                (vg.from_word(&rep), vg.from_word(&h))
            }
        }
    }

    /// Checks that an explicit transversal has exactly one representative per coset.
    pub fn validate_transversal(&self, vg: &VertexGroup, tr: &Transversal) -> Result<()> {
        let Transversal::Explicit(reps) = tr else {
            return Ok(());
        };
        let SubgroupImage::Finite {
            factor, members, ..
        } = self
        else {
            return Err(Error::InvalidTransversal(
                "explicit transversals are only supported for finite edge images".into(),
            ));
        };
        let t = vg.table(*factor).expect("finite factor");
        let mut covered = vec![false; t.order()];
        for &r in reps {
            if r >= t.order() {
                return Err(Error::InvalidTransversal(format!("index {r} out of range")));
            }
            for &c in members {
                let x = t.mul(r, c);
                if covered[x] {
                    return Err(Error::InvalidTransversal(format!(
                        "{} and another representative lie in one coset",
                        t.name(r)
                    )));
                }
                covered[x] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidTransversal("some coset has no representative".into()));
        }
        Ok(())
    }
}

impl fmt::Display for VElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_z3() -> VertexGroup {
        VertexGroup::new(vec![
            FactorSpec::Cyclic {
                letter: "s".into(),
                order: 2,
            },
            FactorSpec::Cyclic {
                letter: "t".into(),
                order: 3,
            },
        ])
        .unwrap()
    }

    #[test]
    fn free_product_reduction() {
        let g = z2_z3();
        let x = g.parse_elem("s t t s s t").unwrap();
        assert_eq!(g.fmt_elem(&x), "s");
        let y = g.parse_elem("s t t^2 s").unwrap();
        assert!(y.is_identity());
        let z = g.parse_elem("t s").unwrap();
        assert!(g.mul(&z, &g.inv(&z)).is_identity());
    }

    #[test]
    fn free_words_round_trip() {
        let g = VertexGroup::free(&["a", "c", "z"]);
        let x = g.parse_elem("a^2 z^-1 c a^-1").unwrap();
        assert_eq!(g.from_word(&g.to_word(&x)), x);
        assert_eq!(g.fmt_elem(&x), "a^2 z^-1 c a^-1");
    }

    #[test]
    fn finite_image_decomposition() {
        let k = VertexGroup::new(vec![FactorSpec::Klein {
            x: "x".into(),
            y: "y".into(),
        }])
        .unwrap();
        let c = SubgroupImage::build(&k, &[k.parse_elem("x").unwrap()]).unwrap();
        assert_eq!(c.order(), Some(2));
        let y = k.parse_elem("xy").unwrap();
        let (rep, e) = c.decompose(&k, &y, &Transversal::Shortlex);
        assert_eq!(k.fmt_elem(&rep), "y");
        assert_eq!(k.mul(&rep, &e), y);
        let (rep2, _) = c.decompose(&k, &y, &Transversal::Reversed);
        assert_eq!(k.fmt_elem(&rep2), "xy");
    }

    #[test]
    fn explicit_transversal_validation() {
        let k = VertexGroup::new(vec![FactorSpec::Klein {
            x: "x".into(),
            y: "y".into(),
        }])
        .unwrap();
        let c = SubgroupImage::build(&k, &[k.parse_elem("x").unwrap()]).unwrap();
        assert!(c.validate_transversal(&k, &Transversal::Explicit(vec![0, 3])).is_ok());
        assert_eq!(
            c.validate_transversal(&k, &Transversal::Explicit(vec![0, 1])),
            Err(Error::InvalidTransversal(
                "x and another representative lie in one coset".into()
            ))
        );
    }

    #[test]
    fn free_image_witness() {
        let g = VertexGroup::free(&["a", "b"]);
        let img = SubgroupImage::build(
            &g,
            &[g.parse_elem("a").unwrap(), g.parse_elem("b a b^-1").unwrap()],
        )
        .unwrap();
        let c = g.parse_elem("b a^2 b^-1 a").unwrap();
        let w = img.witness(&g, &c).unwrap();
        assert_eq!(img.eval(&g, &w), c);
        assert!(!img.contains(&g, &g.parse_elem("b").unwrap()));
        assert!(!img.is_everything(&g));
    }
}
