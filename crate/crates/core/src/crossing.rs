//! Deciding whether X crosses Y.
//!
//! Certified answers come from three places: interval arithmetic for
//! coordinate predicates on Z^k, corner automata for free products of
//! finite groups (any finite Σ), and the tree. The tree gives "true" when
//! some λ in the stabiliser of X nests Y strictly, and "false" only in the
//! degenerate case where X and Y are halfspaces of one tree (those are
//! always nested or disjoint). Everything else is a truncated count of
//! corner images in `Σ\G`, which is advisory and carries its radius.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automaton::corner_automata;
use crate::error::{Error, Result};
use crate::group::{CosetKey, ElemKey, Group, Subgroup};
use crate::sets::{nesting_test, CornerTag, HalfspaceSet, IntervalSet, SplitView};
use crate::sweep::{classify, Growth, Sweep};
use crate::tree::Nesting;
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Exact,
    Tree,
    Truncated,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "exact" => Ok(Method::Exact),
            "tree" => Ok(Method::Tree),
            "truncated" => Ok(Method::Truncated),
            _ => Err(Error::Unsupported(format!("method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictMethod {
    ExactAutomaton,
    ExactIntervals,
    TreeCertificate,
    TreeNesting,
    Truncated,
}

impl fmt::Display for VerdictMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictMethod::ExactAutomaton => "exact-automaton",
            VerdictMethod::ExactIntervals => "exact-intervals",
            VerdictMethod::TreeCertificate => "tree-certificate",
            VerdictMethod::TreeNesting => "tree-nesting",
            VerdictMethod::Truncated => "truncated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// Infinitude of each corner, in `CornerTag::ALL` order.
    Corners { infinite: [bool; 4], depth: usize },
    Intervals { infinite: [bool; 4] },
    /// `element` lies in the stabiliser of `from` and nests the other set strictly.
    Witness { from: String, element: Word, nesting: Nesting },
    /// Searched the stabiliser ball without finding a witness.
    NoWitness { searched: usize, exhaustive: bool },
    /// Relation of X to Y (or to Y* when `against_complement`).
    SameTree { nesting: Nesting, against_complement: bool },
    Counts { radii: Vec<usize>, counts: Vec<[usize; 4]> },
    TrivialTarget { radii: Vec<usize>, image: Vec<usize>, complement: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingVerdict {
    pub crosses: Option<bool>,
    pub certified: bool,
    pub method: VerdictMethod,
    pub radius: Option<usize>,
    pub evidence: Evidence,
    pub notes: Vec<String>,
}

impl CrossingVerdict {
    pub fn label(&self) -> &'static str {
        match self.crosses {
            Some(true) => "true",
            Some(false) => "false",
            None => "unknown",
        }
    }
}

pub fn crosses(
    g: &Group,
    x: &HalfspaceSet,
    y: &HalfspaceSet,
    method: Method,
    radius: usize,
) -> Result<CrossingVerdict> {
    match method {
        Method::Exact => exact(g, x, y)?.ok_or_else(|| {
            Error::Unsupported("no exact method for these set sources".into())
        }),
        Method::Tree => tree_certificate(g, x, y, radius),
        Method::Truncated => Ok(TruncatedContext::new(g, y, radius)?.verdict(x)?),
        Method::Auto => {
            if let Some(v) = exact(g, x, y)? {
                return Ok(v);
            }
            let t = tree_certificate(g, x, y, radius);
            if let Ok(v) = &t {
                if v.crosses == Some(true) {
                    return Ok(v.clone());
                }
            }
            let mut v = TruncatedContext::new(g, y, radius)?.verdict(x)?;
            if let Ok(t) = t {
                if let Evidence::NoWitness { exhaustive: true, .. } = t.evidence {
                    v.notes.push("no element of the stabiliser nests the other set strictly".into());
                }
            }
            Ok(v)
        }
    }
}

/// Certified verdicts, when some exact method applies.
pub fn exact(g: &Group, x: &HalfspaceSet, y: &HalfspaceSet) -> Result<Option<CrossingVerdict>> {
    if let (Some(px), Some(py)) = (x.predicate_view(g), y.predicate_view(g)) {
        return Ok(Some(intervals(px, py)));
    }
    if g.is_free_product_of_finite() && y.invariance_subgroup(g).is_finite(g) {
        if let Ok(ca) = corner_automata(g, x, y) {
            let inf: Vec<bool> = ca.corners.iter().map(|d| d.is_infinite()).collect();
            let infinite = [inf[0], inf[1], inf[2], inf[3]];
            return Ok(Some(CrossingVerdict {
                crosses: Some(infinite.iter().all(|&b| b)),
                certified: true,
                method: VerdictMethod::ExactAutomaton,
                radius: None,
                evidence: Evidence::Corners {
                    infinite,
                    depth: ca.depth,
                },
                notes: Vec::new(),
            }));
        }
    }
    if let (Some(vx), Some(vy)) = (x.underlying_view(g), y.underlying_view(g)) {
        if vx.splitting == vy.splitting {
            let (nesting, against_complement) = relative_nesting(g, &vx, &vy)?;
            let mut notes = vec!["halfspaces of one tree are nested or disjoint".to_string()];
            if x.split_view(g).is_none() || y.split_view(g).is_none() {
                notes.push("read through a finite perturbation (almost equal sets)".into());
            }
            return Ok(Some(CrossingVerdict {
                crosses: Some(false),
                certified: true,
                method: VerdictMethod::TreeNesting,
                radius: None,
                evidence: Evidence::SameTree {
                    nesting,
                    against_complement,
                },
                notes,
            }));
        }
    }
    Ok(None)
}

/// Relation of `X` to `Y'`, where `Y'` is `Y` or `Y*` so that both are
/// translates of the same side of the base edge.
fn relative_nesting(g: &Group, vx: &SplitView, vy: &SplitView) -> Result<(Nesting, bool)> {
    let against_complement = vx.complement != vy.complement;
    let mut y_like = view_set(vy);
    if against_complement {
        y_like = y_like.complemented();
    }
    let h = vx.left.mul(&vy.left.inverse());
    Ok((nesting_test(g, &h, &y_like)?, against_complement))
}

pub fn view_set(v: &SplitView) -> HalfspaceSet {
    let s = HalfspaceSet::standard(v.splitting).translate(&v.left);
    if v.complement {
        s.complemented()
    } else {
        s
    }
}

fn intervals(px: (usize, IntervalSet), py: (usize, IntervalSet)) -> CrossingVerdict {
    let (cx, ix) = px;
    let (cy, iy) = py;
    let mut infinite = [false; 4];
    for (n, c) in CornerTag::ALL.iter().enumerate() {
        let sx = if c.x == crate::splitting::SideTag::X { ix.clone() } else { ix.complement() };
        let sy = if c.y == crate::splitting::SideTag::X { iy.clone() } else { iy.complement() };
        // Σ\G is the line of the coordinate Y reads.
        infinite[n] = if cx == cy {
            sx.intersect(&sy).is_infinite()
        } else {
            !sx.is_empty() && sy.is_infinite()
        };
    }
    let mut notes = Vec::new();
    if !iy.is_infinite() || !iy.complement().is_infinite() {
        notes.push("trivial target: the image of Y or Y* in the quotient is finite".into());
    }
    CrossingVerdict {
        crosses: Some(infinite.iter().all(|&b| b)),
        certified: true,
        method: VerdictMethod::ExactIntervals,
        radius: None,
        evidence: Evidence::Intervals { infinite },
        notes,
    }
}

/// Elements of the subgroup generated by `gens` of length at most `r` in
/// those generators, one word per element.
pub fn subgroup_elements(g: &Group, gens: &[Word], r: usize) -> Vec<Word> {
    let mut letters: Vec<Word> = Vec::new();
    for w in gens {
        letters.push(w.clone());
        letters.push(w.inverse());
    }
    let mut seen: HashSet<ElemKey> = HashSet::from([g.key(&Word::identity())]);
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                let v = w.mul(l);
                if seen.insert(g.key(&v)) {
                    next.push(v.clone());
                    out.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Searches the stabiliser of `x` for an element nesting `y` strictly, and
/// the stabiliser of `y` for one nesting `x` (crossing is symmetric for
/// nontrivial sets, and halfspaces are never trivial).
pub fn tree_certificate(
    g: &Group,
    x: &HalfspaceSet,
    y: &HalfspaceSet,
    radius: usize,
) -> Result<CrossingVerdict> {
    let unsupported = || Error::Unsupported("tree certificates need splitting sets".into());
    let vx = x.underlying_view(g).ok_or_else(unsupported)?;
    let vy = y.underlying_view(g).ok_or_else(unsupported)?;
    let mut notes = Vec::new();
    if x.split_view(g).is_none() || y.split_view(g).is_none() {
        notes.push("read through a finite perturbation (almost equal sets)".into());
    }
    let mut searched = 0;
    let mut exhaustive = true;
    for (from, a, b) in [("x", &vx, &vy), ("y", &vy, &vx)] {
        let gens = Subgroup::Edge {
            splitting: a.splitting,
            conj: a.left.clone(),
        }
        .generators(g);
        // For a cyclic stabiliser the generator decides: powers share its axis.
        let elems = if gens.len() <= 1 {
            gens.clone()
        } else {
            exhaustive = false;
            subgroup_elements(g, &gens, radius)
        };
        let target = view_set(b);
        for lam in elems {
            searched += 1;
            let n = nesting_test(g, &lam, &target)?;
            if n.is_strict_self_nesting() {
                if from == "y" {
                    notes.push("witness found for Y crossing X; crossing is symmetric".into());
                }
                return Ok(CrossingVerdict {
                    crosses: Some(true),
                    certified: true,
                    method: VerdictMethod::TreeCertificate,
                    radius: Some(radius),
                    evidence: Evidence::Witness {
                        from: from.into(),
                        element: lam,
                        nesting: n,
                    },
                    notes,
                });
            }
        }
    }
    Ok(CrossingVerdict {
        crosses: None,
        certified: false,
        method: VerdictMethod::TreeCertificate,
        radius: Some(radius),
        evidence: Evidence::NoWitness {
            searched,
            exhaustive,
        },
        notes,
    })
}

/// A ball with `Y`'s membership and `Σ`-coset names precomputed.
pub struct TruncatedContext<'a> {
    pub sweep: Sweep<'a>,
    y_mem: Vec<bool>,
    /// Coset keys interned as dense ids.
    ids: Vec<u32>,
    classes: usize,
    lengths: Vec<usize>,
    radii: Vec<usize>,
    trivial: Option<Evidence>,
}

impl<'a> TruncatedContext<'a> {
    pub fn new(g: &'a Group, y: &HalfspaceSet, radius: usize) -> Result<Self> {
        let radius = radius.max(2);
        let sweep = Sweep::new(g, radius);
        let y_mem = sweep.membership(y)?;
        let keys = sweep.coset_keys(&y.invariance_subgroup(g))?;
        let radii: Vec<usize> = (radius - 2..=radius).collect();
        let image = sweep.image_counts(&y_mem, &keys, &radii);
        let not_y: Vec<bool> = y_mem.iter().map(|b| !b).collect();
        let complement = sweep.image_counts(&not_y, &keys, &radii);
        let trivial = (classify(&image) == Growth::Stable || classify(&complement) == Growth::Stable)
            .then(|| Evidence::TrivialTarget {
                radii: radii.clone(),
                image,
                complement,
            });
        let mut intern: HashMap<&CosetKey, u32> = HashMap::new();
        let ids: Vec<u32> = keys
            .iter()
            .map(|k| {
                let n = intern.len() as u32;
                *intern.entry(k).or_insert(n)
            })
            .collect();
        let classes = intern.len();
        let lengths = sweep.lengths();
        Ok(TruncatedContext {
            sweep,
            y_mem,
            ids,
            classes,
            lengths,
            radii,
            trivial,
        })
    }

    pub fn radius(&self) -> usize {
        self.sweep.radius()
    }

    pub fn counts(&self, x: &HalfspaceSet) -> Result<Vec<[usize; 4]>> {
        let x_mem = self.sweep.membership(x)?;
        // Shortest length at which each (corner, class) pair appears.
        let mut first = vec![usize::MAX; 4 * self.classes];
        let lengths = &self.lengths;
        for i in 0..x_mem.len() {
            let c = CornerTag::ALL
                .iter()
                .position(|c| c.selects(x_mem[i], self.y_mem[i]))
                .unwrap();
            let slot = &mut first[4 * self.ids[i] as usize + c];
            *slot = (*slot).min(lengths[i]);
        }
        Ok(self
            .radii
            .iter()
            .map(|&r| {
                let mut out = [0; 4];
                for (j, &l) in first.iter().enumerate() {
                    if l <= r {
                        out[j % 4] += 1;
                    }
                }
                out
            })
            .collect())
    }

    pub fn verdict(&self, x: &HalfspaceSet) -> Result<CrossingVerdict> {
        let radius = Some(self.radius());
        if let Some(ev) = &self.trivial {
            return Ok(CrossingVerdict {
                crosses: Some(false),
                certified: false,
                method: VerdictMethod::Truncated,
                radius,
                evidence: ev.clone(),
                notes: vec!["trivial target: the image of Y or Y* stabilises".into()],
            });
        }
        let counts = self.counts(x)?;
        let trace = |c: usize| counts.iter().map(|k| k[c]).collect::<Vec<_>>();
        let shapes: Vec<Growth> = (0..4).map(|c| classify(&trace(c))).collect();
        let crosses = if shapes.iter().all(|&s| s == Growth::Growing) {
            Some(true)
        } else if shapes.iter().any(|&s| s == Growth::Stable) {
            Some(false)
        } else {
            None
        };
        Ok(CrossingVerdict {
            crosses,
            certified: false,
            method: VerdictMethod::Truncated,
            radius,
            evidence: Evidence::Counts {
                radii: self.radii.clone(),
                counts,
            },
            notes: vec!["advisory: counts of corner images in a finite ball".into()],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeOutcome {
    SatisfiedAtR,
    OneSided,
    Inconclusive,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeOutcome::SatisfiedAtR => "satisfied-at-R",
            ProbeOutcome::OneSided => "one-sided",
            ProbeOutcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub radius: usize,
    /// Distance needed to count as far: `⌈R/2⌉`.
    pub threshold: usize,
    pub points: usize,
    /// Largest distance to δY seen from points of δX inside Y, and inside Y*
    /// (capped at the threshold).
    pub far_in_y: usize,
    pub far_in_complement: usize,
    /// δX and δY coincide (the sets are halfspaces of one edge).
    pub degenerate: bool,
    pub outcome: ProbeOutcome,
}

/// Looks for points of δX far from δY on each side of δY.
///
/// δX is `Λ·P` where `P` holds one vertex per `Λ`-orbit of coboundary
/// vertices. Points are `λp` for `λ` in the `Λ`-ball of radius R; the
/// distance of `z` to δY is the largest `k` for which the ball of radius
/// `k` around `z` lies on one side of Y.
pub fn hypothesis_probe(g: &Group, x: &HalfspaceSet, y: &HalfspaceSet, radius: usize) -> Result<ProbeReport> {
    let unsupported = || Error::Unsupported("the probe needs two splitting sets".into());
    let vx = x.split_view(g).ok_or_else(unsupported)?;
    let vy = y.split_view(g).ok_or_else(unsupported)?;
    let threshold = radius.div_ceil(2);
    let degenerate = vx.splitting == vy.splitting
        && g.splitting(vx.splitting).normalize(&vx.left.inverse().mul(&vy.left)).coset_key()
            == g.splitting(vx.splitting).identity_nf();

    let reps = boundary_reps(g, &HalfspaceSet::standard(vx.splitting), 3)?;
    let lambda = Subgroup::Edge {
        splitting: vx.splitting,
        conj: Word::identity(),
    };
    let lam_elems = subgroup_elements(g, &lambda.generators(g), radius);
    let ky = vy.splitting;
    let sy = g.splitting(ky);
    let ys = view_set(&vy);
    let local = Sweep::new(g, threshold);
    let lens = local.lengths();
    let mut far_in_y = 0;
    let mut far_in_complement = 0;
    let mut points = 0;
    let mut seen: HashSet<ElemKey> = HashSet::new();
    for lam in &lam_elems {
        for p in &reps {
            let z = vx.left.mul(lam).mul(p);
            if !seen.insert(g.key(&z)) {
                continue;
            }
            points += 1;
            let side = ys.contains(g, &z)?;
            // Membership of z·u for u in the local ball, via one pass.
            let start = sy.normalize(&vy.left.inverse().mul(&z));
            let mut depth = threshold;
            for (i, nf) in local.along(ky, &start).iter().enumerate() {
                let m = sy.in_standard_nf(nf) != vy.complement;
                if m != side {
                    depth = depth.min(lens[i].saturating_sub(1));
                }
            }
            let slot = if side { &mut far_in_y } else { &mut far_in_complement };
            *slot = (*slot).max(depth);
        }
    }
    let outcome = match (far_in_y >= threshold, far_in_complement >= threshold) {
        (true, true) if !degenerate => ProbeOutcome::SatisfiedAtR,
        (true, false) | (false, true) => ProbeOutcome::OneSided,
        _ => ProbeOutcome::Inconclusive,
    };
    Ok(ProbeReport {
        radius,
        threshold,
        points,
        far_in_y,
        far_in_complement,
        degenerate,
        outcome,
    })
}

/// One vertex per orbit of the invariance subgroup among vertices on
/// coboundary edges of `set`, found in a ball of radius `r`.
pub fn boundary_reps(g: &Group, set: &HalfspaceSet, r: usize) -> Result<Vec<Word>> {
    let sweep = Sweep::new(g, r);
    let m = sweep.membership(set)?;
    let keys = sweep.coset_keys(&set.invariance_subgroup(g))?;
    let letters = g.alphabet().letters();
    let mut seen: HashSet<&CosetKey> = HashSet::new();
    let mut out = Vec::new();
    for i in 0..sweep.len() {
        let mut on_boundary = false;
        for &s in &letters {
            let k = g.extend_key(&sweep.ball.keys[i], &Word::letter(s));
            let other = match sweep.ball.find(&k) {
                Some(j) => m[j],
                None => set.contains(g, &sweep.ball.words[i].mul(&Word::letter(s)))?,
            };
            if other != m[i] {
                on_boundary = true;
                break;
            }
        }
        if on_boundary && seen.insert(&keys[i]) {
            out.push(sweep.ball.words[i].clone());
        }
    }
    Ok(out)
}
