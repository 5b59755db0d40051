//! Built-in scenarios.
//!
//! A scenario is plain data: generators, splittings, named sets and the
//! expectations attached to them. `Scenario::instantiate` turns it into a
//! `Group` plus `HalfspaceSet`s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{FactorSpec, Transversal};
use crate::group::Group;
use crate::sets::{HalfspaceSet, IntervalSet};
use crate::splitting::{SplitKind, Splitting, SplittingSpec};
use crate::word::{Alphabet, Word};

pub const BUILTIN: [&str; 5] = [
    "zz-asymmetric",
    "four-z2",
    "z2-z3-basic",
    "genus2-curves",
    "genus2-erratum",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetDecl {
    Standard { splitting: String },
    Tree { splitting: String },
    /// `{v : v[coord] ∈ values}` in an abelian group.
    Predicate { coord: usize, values: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    pub decl: SetDecl,
    #[serde(default)]
    pub left: String,
    #[serde(default)]
    pub complement: bool,
}

/// Where an expected value comes from: `stated` for values quoted from the
/// mathematics, `derived:<oracle>` for values computed by an independent
/// check, `basic` for sanity facts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source(pub String);

impl Source {
    pub fn stated() -> Self {
        Source("stated".into())
    }
    pub fn derived(oracle: &str) -> Self {
        Source(format!("derived:{oracle}"))
    }
    pub fn basic() -> Self {
        Source("basic".into())
    }
    pub fn oracle(&self) -> Option<&str> {
        self.0.strip_prefix("derived:")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    Crosses { x: String, y: String, value: bool },
    /// Exact number of crossing double cosets.
    Intersection { d: String, e: String, count: usize },
    IntersectionNonzero { d: String, e: String },
    /// Quotient edge counts of the minimal subtrees, Λ in E's tree then Σ in D's.
    TreeBounds { d: String, e: String, b12: usize, b21: usize },
    /// Minimal subtree of the group generated by `gens` in a splitting's tree.
    SubtreeEdges { splitting: String, gens: Vec<String>, count: usize },
    TranslationLength { splitting: String, word: String, length: usize },
    /// The probe on `(x, y)` is one-sided at every listed radius.
    ProbeOneSided { x: String, y: String, radii: Vec<usize> },
    /// The report on `(d, e)` does not claim equality with the tree counts.
    EqualityWithheld { d: String, e: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub check: Check,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub generators: Vec<String>,
    #[serde(default)]
    pub abelian: bool,
    #[serde(default)]
    pub splittings: Vec<SplittingSpec>,
    pub sets: Vec<NamedSet>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// A scenario realised as a group and its sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub scenario: Scenario,
    pub group: Group,
    pub sets: Vec<(String, HalfspaceSet)>,
}

impl Instance {
    pub fn set(&self, name: &str) -> Result<&HalfspaceSet> {
        self.sets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::Scenario(format!("no set named {name:?}")))
    }

    pub fn splitting_index(&self, name: &str) -> Result<usize> {
        self.group
            .splitting_index(name)
            .ok_or_else(|| Error::Scenario(format!("no splitting named {name:?}")))
    }

    /// Standard sets of every splitting, by splitting name.
    pub fn standard_sets(&self) -> Vec<(String, HalfspaceSet)> {
        self.group
            .splittings()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name().to_string(), HalfspaceSet::standard(i)))
            .collect()
    }
}

impl Scenario {
    pub fn instantiate(&self) -> Result<Instance> {
        let alphabet = Alphabet::new(&self.generators)?;
        let group = if self.abelian {
            if !self.splittings.is_empty() {
                return Err(Error::Scenario("an abelian scenario has no splittings".into()));
            }
            Group::abelian(alphabet)
        } else {
            let ss = self
                .splittings
                .iter()
                .map(|s| Splitting::build(s.clone(), &alphabet))
                .collect::<Result<Vec<_>>>()?;
            Group::split(alphabet, ss)?
        };
        let mut sets = Vec::new();
        for ns in &self.sets {
            if sets.iter().any(|(n, _): &(String, HalfspaceSet)| *n == ns.name) {
                return Err(Error::Scenario(format!("set {:?} declared twice", ns.name)));
            }
            let idx = |name: &str| {
                group
                    .splitting_index(name)
                    .ok_or_else(|| Error::Scenario(format!("no splitting named {name:?}")))
            };
            let mut set = match &ns.decl {
                SetDecl::Standard { splitting } => HalfspaceSet::standard(idx(splitting)?),
                SetDecl::Tree { splitting } => HalfspaceSet::tree(idx(splitting)?),
                SetDecl::Predicate { coord, values } => {
                    if !group.is_abelian() || *coord >= group.alphabet().len() {
                        return Err(Error::Scenario(format!(
                            "predicate set {:?} needs an abelian group with coordinate {coord}",
                            ns.name
                        )));
                    }
                    HalfspaceSet::predicate(*coord, IntervalSet::parse(values)?)
                }
            };
            if !ns.left.trim().is_empty() {
                set = set.translate(&group.parse(&ns.left)?);
            }
            if ns.complement {
                set = set.complemented();
            }
            sets.push((ns.name.clone(), set));
        }
        for e in &self.expectations {
            for name in e.check.set_names() {
                if !sets.iter().any(|(n, _)| n == name) {
                    return Err(Error::Scenario(format!("expectation names unknown set {name:?}")));
                }
            }
        }
        Ok(Instance {
            scenario: self.clone(),
            group,
            sets,
        })
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        Alphabet::new(&self.generators)?.parse_word(text)
    }
}

impl Check {
    pub fn set_names(&self) -> Vec<&str> {
        match self {
            Check::Crosses { x, y, .. } | Check::ProbeOneSided { x, y, .. } => vec![x, y],
            Check::Intersection { d, e, .. }
            | Check::IntersectionNonzero { d, e }
            | Check::TreeBounds { d, e, .. }
            | Check::EqualityWithheld { d, e } => vec![d, e],
            Check::SubtreeEdges { .. } | Check::TranslationLength { .. } => vec![],
        }
    }
}

pub fn build_scenario(name: &str) -> Result<Scenario> {
    match name {
        "zz-asymmetric" => Ok(zz_asymmetric()),
        "four-z2" => Ok(four_z2()),
        "z2-z3-basic" => Ok(z2_z3_basic()),
        "genus2-curves" => Ok(genus2_curves()),
        "genus2-erratum" => Ok(genus2_w_pair()),
        _ => Err(Error::Scenario(format!(
            "unknown builtin {name:?}; known: {}",
            BUILTIN.join(", ")
        ))),
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn identity_map(xs: &[&str]) -> Vec<(String, String)> {
    xs.iter().map(|s| (s.to_string(), s.to_string())).collect()
}

fn standard(name: &str, splitting: &str) -> NamedSet {
    NamedSet {
        name: name.into(),
        decl: SetDecl::Standard {
            splitting: splitting.into(),
        },
        left: String::new(),
        complement: false,
    }
}

fn expect(check: Check, source: Source) -> Expectation {
    Expectation { check, source }
}

fn zz_asymmetric() -> Scenario {
    let pred = |name: &str, coord, values: &str| NamedSet {
        name: name.into(),
        decl: SetDecl::Predicate {
            coord,
            values: values.into(),
        },
        left: String::new(),
        complement: false,
    };
    Scenario {
        name: "zz-asymmetric".into(),
        description: "Z x Z with X = {n > 0} and Y = {m = 0}".into(),
        generators: strings(&["m", "n"]),
        abelian: true,
        splittings: vec![],
        sets: vec![pred("X", 1, "1.."), pred("Y", 0, "0")],
        expectations: vec![
            expect(
                Check::Crosses { x: "Y".into(), y: "X".into(), value: true },
                Source::stated(),
            ),
            expect(
                Check::Crosses { x: "X".into(), y: "Y".into(), value: false },
                Source::stated(),
            ),
        ],
        notes: vec!["Y is almost invariant under the trivial group only, so crossing is not symmetric".into()],
    }
}

fn z2(letter: &str) -> FactorSpec {
    FactorSpec::Cyclic {
        letter: letter.into(),
        order: 2,
    }
}

/// Golden values of the pairwise counts among the three four-z2 splittings.
pub const FOUR_Z2_COUNTS: [(&str, &str, usize); 3] = [("P", "Q", 1), ("P", "R", 1), ("Q", "R", 1)];

fn four_z2() -> Scenario {
    let gens = ["x1", "x2", "x3", "x4"];
    let split = |name: &str, a: [&str; 2], b: [&str; 2]| SplittingSpec {
        name: name.into(),
        kind: SplitKind::Amalgam,
        factors_a: a.iter().map(|l| z2(l)).collect(),
        factors_b: b.iter().map(|l| z2(l)).collect(),
        edge_a: vec![],
        edge_b: vec![],
        stable: None,
        map: identity_map(&gens),
        back: vec![],
        transversal: Transversal::Shortlex,
    };
    let mut expectations = Vec::new();
    for n in ["P", "Q", "R"] {
        expectations.push(expect(
            Check::Intersection { d: n.into(), e: n.into(), count: 0 },
            Source::stated(),
        ));
    }
    for (d, e, count) in FOUR_Z2_COUNTS {
        expectations.push(expect(
            Check::IntersectionNonzero { d: d.into(), e: e.into() },
            Source::stated(),
        ));
        expectations.push(expect(
            Check::Intersection { d: d.into(), e: e.into(), count },
            Source::derived("corner automata"),
        ));
    }
    Scenario {
        name: "four-z2".into(),
        description: "Z/2*Z/2*Z/2*Z/2 split as G12*G34 (P), G13*G24 (Q) and G14*G23 (R) over the trivial group".into(),
        generators: strings(&gens),
        abelian: false,
        splittings: vec![
            split("P", ["x1", "x2"], ["x3", "x4"]),
            split("Q", ["x1", "x3"], ["x2", "x4"]),
            split("R", ["x1", "x4"], ["x2", "x3"]),
        ],
        sets: vec![standard("P", "P"), standard("Q", "Q"), standard("R", "R")],
        expectations,
        notes: vec![],
    }
}

fn z2_z3_basic() -> Scenario {
    let gens = ["s", "t"];
    Scenario {
        name: "z2-z3-basic".into(),
        description: "Z/2*Z/3 split over the trivial group".into(),
        generators: strings(&gens),
        abelian: false,
        splittings: vec![SplittingSpec {
            name: "F".into(),
            kind: SplitKind::Amalgam,
            factors_a: vec![z2("s")],
            factors_b: vec![FactorSpec::Cyclic { letter: "t".into(), order: 3 }],
            edge_a: vec![],
            edge_b: vec![],
            stable: None,
            map: identity_map(&gens),
            back: vec![],
            transversal: Transversal::Shortlex,
        }],
        sets: vec![
            standard("X", "F"),
            NamedSet {
                name: "tX".into(),
                decl: SetDecl::Standard { splitting: "F".into() },
                left: "t".into(),
                complement: false,
            },
        ],
        expectations: vec![
            expect(
                Check::Intersection { d: "X".into(), e: "X".into(), count: 0 },
                Source::stated(),
            ),
            expect(
                Check::Crosses { x: "tX".into(), y: "X".into(), value: false },
                Source::derived("corner automata"),
            ),
        ],
        notes: vec![],
    }
}

/// Separating curve D = [a,b] as an amalgam of two free groups.
fn genus2_d_spec() -> SplittingSpec {
    SplittingSpec {
        name: "D".into(),
        kind: SplitKind::Amalgam,
        factors_a: vec![FactorSpec::Free("a".into()), FactorSpec::Free("b".into())],
        factors_b: vec![FactorSpec::Free("c".into()), FactorSpec::Free("d".into())],
        edge_a: vec!["a b a^-1 b^-1".into()],
        edge_b: vec!["d c d^-1 c^-1".into()],
        stable: None,
        map: identity_map(&["a", "b", "c", "d"]),
        back: vec![],
        transversal: Transversal::Shortlex,
    }
}

/// Nonseparating curve C = a·c as an HNN extension of F(a, c, z) with
/// z = d⁻¹ab and stable letter t = d. Cutting along C conjugates a·c to
/// z·a·z⁻¹·c.
fn genus2_c_spec() -> SplittingSpec {
    SplittingSpec {
        name: "C".into(),
        kind: SplitKind::Hnn,
        factors_a: vec![
            FactorSpec::Free("a".into()),
            FactorSpec::Free("c".into()),
            FactorSpec::Free("z".into()),
        ],
        factors_b: vec![],
        edge_a: vec!["a c".into()],
        edge_b: vec!["z a z^-1 c".into()],
        stable: Some("t".into()),
        map: vec![
            ("a".into(), "a".into()),
            ("b".into(), "a^-1 t z".into()),
            ("c".into(), "c".into()),
            ("d".into(), "t".into()),
        ],
        back: vec![("z".into(), "d^-1 a b".into()), ("t".into(), "d".into())],
        transversal: Transversal::Shortlex,
    }
}

/// The amalgam along W = S - D', where S is the punctured torus carrying
/// a, b and D' = a. π₁(W) = ⟨a, b·a·b⁻¹⟩ inside F(a, b); on the other side
/// b·a·b⁻¹ = [c,d]·a with u = a.
fn genus2_w_spec() -> SplittingSpec {
    SplittingSpec {
        name: "W".into(),
        kind: SplitKind::Amalgam,
        factors_a: vec![FactorSpec::Free("a".into()), FactorSpec::Free("b".into())],
        factors_b: vec![
            FactorSpec::Free("u".into()),
            FactorSpec::Free("c".into()),
            FactorSpec::Free("d".into()),
        ],
        edge_a: vec!["a".into(), "b a b^-1".into()],
        edge_b: vec!["u".into(), "c d c^-1 d^-1 u".into()],
        stable: None,
        map: vec![
            ("a".into(), "A:a".into()),
            ("b".into(), "A:b".into()),
            ("c".into(), "B:c".into()),
            ("d".into(), "B:d".into()),
        ],
        back: vec![("u".into(), "a".into())],
        transversal: Transversal::Shortlex,
    }
}

fn genus2_curves() -> Scenario {
    Scenario {
        name: "genus2-curves".into(),
        description: "closed genus-2 surface group with the separating curve D and the nonseparating curve C".into(),
        generators: strings(&["a", "b", "c", "d"]),
        abelian: false,
        splittings: vec![genus2_d_spec(), genus2_c_spec()],
        sets: vec![standard("D", "D"), standard("C", "C")],
        expectations: vec![
            expect(
                Check::Intersection { d: "C".into(), e: "D".into(), count: 2 },
                Source::stated(),
            ),
            expect(
                Check::TreeBounds { d: "C".into(), e: "D".into(), b12: 2, b21: 2 },
                Source::derived("axis translation length by tree search"),
            ),
            expect(
                Check::TranslationLength { splitting: "D".into(), word: "a c".into(), length: 2 },
                Source::derived("axis translation length by tree search"),
            ),
            expect(
                Check::Intersection { d: "D".into(), e: "D".into(), count: 0 },
                Source::stated(),
            ),
            expect(
                Check::Intersection { d: "C".into(), e: "C".into(), count: 0 },
                Source::stated(),
            ),
        ],
        notes: vec![
            "the curves are given topologically; the words a·c and [a,b] are reconstructions checked by translation length".into(),
        ],
    }
}

fn genus2_w_pair() -> Scenario {
    Scenario {
        name: "genus2-erratum".into(),
        description: "genus-2 surface group with C (HNN) and the amalgam over π₁(W) for W disjoint from C".into(),
        generators: strings(&["a", "b", "c", "d"]),
        abelian: false,
        splittings: vec![genus2_c_spec(), genus2_w_spec(), genus2_d_spec()],
        sets: vec![standard("C", "C"), standard("W", "W"), standard("D", "D")],
        expectations: vec![
            expect(
                Check::SubtreeEdges { splitting: "W".into(), gens: strings(&["a c"]), count: 0 },
                Source::stated(),
            ),
            expect(
                Check::SubtreeEdges { splitting: "C".into(), gens: strings(&["a", "b a b^-1"]), count: 1 },
                Source::stated(),
            ),
            expect(
                Check::TreeBounds { d: "C".into(), e: "W".into(), b12: 0, b21: 1 },
                Source::stated(),
            ),
            expect(
                Check::ProbeOneSided { x: "C".into(), y: "W".into(), radii: vec![4, 6, 8] },
                Source::stated(),
            ),
            expect(
                Check::EqualityWithheld { d: "C".into(), e: "W".into() },
                Source::stated(),
            ),
            expect(
                Check::Intersection { d: "W".into(), e: "W".into(), count: 0 },
                Source::stated(),
            ),
        ],
        notes: vec![
            "D' = a; the words for C and the generators of π₁(W) are reconstructions verified by the tests of this module".into(),
        ],
    }
}
