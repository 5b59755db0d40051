//! Intersection numbers: double cosets `ΣgΛ` with `gX` crossing `Y`.
//!
//! Candidates come first from the trees (an edge `he` of the minimal
//! Λ-subtree of Y's tree means X crosses hY, so `h⁻¹` is a certified
//! crossing coset) and then from the finiteness argument: if `gX` crosses
//! `Y` then a translate of δX meets δY, so `g = q·u·p⁻¹` with `p` near δX,
//! `q` near δY and `u` short. Each candidate is canonicalised, decided, and
//! the tally is reported with its radius and certainty.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::crossing::{
    boundary_reps, crosses, exact, hypothesis_probe, tree_certificate, Method, ProbeOutcome,
    TruncatedContext, VerdictMethod,
};
use crate::crossing::CrossingVerdict;
use crate::error::Result;
use crate::group::{Ball, ElemKey, Group, Subgroup};
use crate::sets::HalfspaceSet;
use crate::sweep::{AlmostEqual, Sweep};
use crate::tree::minimal_subtree;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleCosetRep {
    pub rep: Word,
    /// The same representative is found in the ball of radius one less.
    pub stable: bool,
}

/// Canonical representatives of `ΣgΛ` inside a ball: the shortlex-least
/// element of the component of `g` in the graph whose edges are left
/// multiplication by generators of Σ and right multiplication by those of Λ.
pub struct DoubleCosetCanon<'a> {
    group: &'a Group,
    ball: &'a Ball,
    sigma: Vec<Word>,
    lambda: Vec<Word>,
}

/// Bound on the size of one explored component.
const COMPONENT_LIMIT: usize = 20_000;

impl<'a> DoubleCosetCanon<'a> {
    pub fn new(group: &'a Group, ball: &'a Ball, sigma: &Subgroup, lambda: &Subgroup) -> Self {
        let both = |s: &Subgroup| {
            let mut v = Vec::new();
            for w in s.generators(group) {
                v.push(w.inverse());
                v.push(w);
            }
            v
        };
        DoubleCosetCanon {
            group,
            ball,
            sigma: both(sigma),
            lambda: both(lambda),
        }
    }

    fn least_in_component(&self, start: usize, within: usize) -> usize {
        let g = self.group;
        let limit = self.ball.within(within).end;
        let mut seen: HashSet<usize> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut best = start;
        while let Some(i) = queue.pop_front() {
            best = best.min(i);
            if seen.len() > COMPONENT_LIMIT {
                break;
            }
            let w = &self.ball.words[i];
            let k = &self.ball.keys[i];
            let mut next: Vec<ElemKey> = Vec::new();
            for s in &self.sigma {
                next.push(g.key(&s.mul(w)));
            }
            for l in &self.lambda {
                next.push(g.extend_key(k, l));
            }
            for key in next {
                if let Some(j) = self.ball.find(&key) {
                    if j < limit && seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
        best
    }

    pub fn canon(&self, w: &Word) -> DoubleCosetRep {
        let Some(i) = self.ball.find(&self.group.key(w)) else {
            return DoubleCosetRep {
                rep: w.clone(),
                stable: false,
            };
        };
        let r = self.ball.radius;
        let full = self.least_in_component(i, r);
        let inner = if self.ball.words[i].len() < r {
            Some(self.least_in_component(i, r - 1))
        } else {
            None
        };
        DoubleCosetRep {
            rep: self.ball.words[full].clone(),
            stable: inner == Some(full),
        }
    }
}

pub fn double_coset_canon(
    g: &Group,
    w: &Word,
    sigma: &Subgroup,
    lambda: &Subgroup,
    radius: usize,
) -> DoubleCosetRep {
    let ball = g.ball(radius);
    DoubleCosetCanon::new(g, &ball, sigma, lambda).canon(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionConfig {
    pub radius: usize,
    pub method: Method,
    /// Length of the middle factor `u` in candidates `q·u·p⁻¹`; the ring at
    /// this length is the outer shell used for the completeness test.
    pub candidate_radius: usize,
    /// Run the hypothesis probe on each crossing coset.
    pub probe: bool,
}

impl Default for IntersectionConfig {
    fn default() -> Self {
        IntersectionConfig {
            radius: 6,
            method: Method::Auto,
            candidate_radius: 1,
            probe: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetEntry {
    pub rep: Word,
    pub rep_text: String,
    pub rep_stable: bool,
    /// "tree" or "sweep".
    pub origin: String,
    pub verdict: CrossingVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisNote {
    pub rep_text: String,
    pub radius: usize,
    pub outcome: ProbeOutcome,
    pub far_in_y: usize,
    pub far_in_complement: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub d: String,
    pub e: String,
    pub radius: usize,
    /// Edges of the quotient of the minimal subtree of Λ in the tree of E.
    pub tree_lower_bound_12: Option<usize>,
    /// Edges of the quotient of the minimal subtree of Σ in the tree of D.
    pub tree_lower_bound_21: Option<usize>,
    pub tree_bounds_complete: bool,
    pub candidates: usize,
    /// Crossing double cosets (certified or advisory), in canonical order.
    pub crossing: Vec<CosetEntry>,
    pub unknown: Vec<CosetEntry>,
    pub certified_count: usize,
    pub truncated_count: usize,
    pub certified_exact: Option<usize>,
    pub complete: bool,
    pub hypothesis_notes: Vec<HypothesisNote>,
    pub equality_claimed: bool,
    pub notes: Vec<String>,
}

impl IntersectionReport {
    pub fn lower_bound(&self) -> usize {
        self.tree_lower_bound_12
            .unwrap_or(0)
            .max(self.tree_lower_bound_21.unwrap_or(0))
    }

    pub fn crossing_reps(&self) -> Vec<&Word> {
        self.crossing.iter().map(|c| &c.rep).collect()
    }
}

struct Candidate {
    word: Word,
    origin: &'static str,
    shell: bool,
}

fn candidates(
    g: &Group,
    x: &HalfspaceSet,
    y: &HalfspaceSet,
    radius: usize,
    cr: usize,
    notes: &mut Vec<String>,
) -> Result<(Vec<Candidate>, Option<usize>, Option<usize>, bool)> {
    let mut out = Vec::new();
    let (mut b12, mut b21, mut complete) = (None, None, true);
    if let (Some(vx), Some(vy)) = (x.split_view(g), y.split_view(g)) {
        let lam = x.invariance_subgroup(g).generators(g);
        let sig = y.invariance_subgroup(g).generators(g);
        let sub_radius = radius.min(4);
        // Λ in the tree of Y: an edge k·e there means X crosses k·Y₀ = k·l_y⁻¹·Y.
        let m12 = minimal_subtree(g.splitting(vy.splitting), &lam, sub_radius);
        for f in &m12.orbit_edge_reps {
            let k = f.rep_word(g.splitting(vy.splitting));
            out.push(Candidate {
                word: vy.left.mul(&k.inverse()),
                origin: "tree",
                shell: false,
            });
        }
        // Σ in the tree of X: an edge k·e means Y crosses k·l_x⁻¹·X.
        let m21 = minimal_subtree(g.splitting(vx.splitting), &sig, sub_radius);
        for f in &m21.orbit_edge_reps {
            let k = f.rep_word(g.splitting(vx.splitting));
            out.push(Candidate {
                word: k.mul(&vx.left.inverse()),
                origin: "tree",
                shell: false,
            });
        }
        complete = m12.complete && m21.complete;
        b12 = Some(m12.quotient_edge_count);
        b21 = Some(m21.quotient_edge_count);
        notes.push(format!("Λ in the tree of E: {}", m12.method));
        notes.push(format!("Σ in the tree of D: {}", m21.method));
    }
    let px = boundary_reps(g, x, 3)?;
    let py = boundary_reps(g, y, 3)?;
    let ring = g.ball(cr);
    for (i, u) in ring.words.iter().enumerate() {
        let shell = cr > 0 && i >= ring.within(cr - 1).end;
        for q in &py {
            for p in &px {
                out.push(Candidate {
                    word: q.mul(u).mul(&p.inverse()),
                    origin: "sweep",
                    shell,
                });
            }
        }
    }
    Ok((out, b12, b21, complete))
}

/// Verdicts for one `(x, y)` pair, reusing a truncated context.
struct Decider<'a> {
    group: &'a Group,
    x: &'a HalfspaceSet,
    y: &'a HalfspaceSet,
    method: Method,
    radius: usize,
    truncated: Option<TruncatedContext<'a>>,
}

impl<'a> Decider<'a> {
    fn decide(&mut self, gw: &Word, cheap: bool) -> Result<CrossingVerdict> {
        let g = self.group;
        let gx = self.x.translate(gw);
        match self.method {
            Method::Exact => crosses(g, &gx, self.y, Method::Exact, self.radius),
            Method::Tree => tree_certificate(g, &gx, self.y, self.radius),
            Method::Truncated => self.truncated()?.verdict(&gx),
            Method::Auto => {
                if let Some(v) = exact(g, &gx, self.y)? {
                    return Ok(v);
                }
                let t = tree_certificate(g, &gx, self.y, self.radius);
                match t {
                    Ok(v) if v.crosses == Some(true) || cheap => return Ok(v),
                    _ => {}
                }
                self.truncated()?.verdict(&gx)
            }
        }
    }

    fn truncated(&mut self) -> Result<&TruncatedContext<'a>> {
        if self.truncated.is_none() {
            self.truncated = Some(TruncatedContext::new(self.group, self.y, self.radius)?);
        }
        Ok(self.truncated.as_ref().unwrap())
    }
}

pub fn intersection_number(
    g: &Group,
    d: &HalfspaceSet,
    e: &HalfspaceSet,
    config: &IntersectionConfig,
) -> Result<IntersectionReport> {
    let radius = config.radius;
    let mut notes = Vec::new();
    let (cands, b12, b21, tree_complete) =
        candidates(g, d, e, radius, config.candidate_radius, &mut notes)?;
    let sigma = e.invariance_subgroup(g);
    let lambda = d.invariance_subgroup(g);
    let canon_ball = g.ball(radius.min(canon_radius(g)));
    let canon = DoubleCosetCanon::new(g, &canon_ball, &sigma, &lambda);

    // Deduplicate: canonical rep, then merge reps equal up to short σ, λ.
    let mut classes: BTreeMap<Vec<u32>, (DoubleCosetRep, &'static str, bool)> = BTreeMap::new();
    for c in &cands {
        let rep = canon.canon(&c.word);
        let key = shortlex_key(g, &rep.rep);
        let entry = classes.entry(key).or_insert((rep, c.origin, c.shell));
        if c.origin == "tree" {
            entry.1 = "tree";
        }
        entry.2 &= c.shell;
    }

    let mut decider = Decider {
        group: g,
        x: d,
        y: e,
        method: config.method,
        radius,
        truncated: None,
    };
    let mut crossing = Vec::new();
    let mut unknown = Vec::new();
    let mut all_certified = true;
    let mut shell_new = false;
    for (rep, origin, shell) in classes.values() {
        let v = decider.decide(&rep.rep, *shell)?;
        if *shell {
            // The outer ring only looks for certified crossings.
            if v.crosses == Some(true) && v.certified {
                shell_new = true;
            } else {
                continue;
            }
        }
        if !v.certified {
            all_certified = false;
        }
        let entry = CosetEntry {
            rep: rep.rep.clone(),
            rep_text: g.fmt(&rep.rep),
            rep_stable: rep.stable,
            origin: origin.to_string(),
            verdict: v,
        };
        match entry.verdict.crosses {
            Some(true) => crossing.push(entry),
            Some(false) => {}
            None => unknown.push(entry),
        }
    }
    let merged = merge_equal_cosets(g, &mut crossing, &sigma, &lambda);
    if merged > 0 {
        notes.push(format!("{merged} crossing representatives merged by a subgroup search"));
    }
    let certified_count = crossing.iter().filter(|c| c.verdict.certified).count();
    let truncated_count = crossing.len();
    let complete = !shell_new && unknown.is_empty() && tree_complete;
    let certified_exact = (all_certified && complete).then_some(truncated_count);

    let mut hypothesis_notes = Vec::new();
    if config.probe && d.split_view(g).is_some() && e.split_view(g).is_some() {
        for c in &crossing {
            let p = hypothesis_probe(g, &d.translate(&c.rep), e, radius)?;
            hypothesis_notes.push(HypothesisNote {
                rep_text: c.rep_text.clone(),
                radius,
                outcome: p.outcome,
                far_in_y: p.far_in_y,
                far_in_complement: p.far_in_complement,
            });
        }
    }
    let bounds_agree = b12.is_some() && b12 == b21 && b12 == certified_exact;
    let probes_ok = hypothesis_notes
        .iter()
        .all(|h| h.outcome == ProbeOutcome::SatisfiedAtR);
    let equality_claimed = bounds_agree && probes_ok && tree_complete;
    if b12.is_some() && !equality_claimed {
        let mut why = Vec::new();
        if b12 != b21 {
            why.push("the two tree counts differ");
        }
        if certified_exact.is_none() {
            why.push("some candidate verdicts are advisory or the enumeration is incomplete");
        } else if b12 != certified_exact {
            why.push("the tree count differs from the certified count");
        }
        if !probes_ok {
            why.push("the coboundary probe did not find far points on both sides");
        }
        if !tree_complete {
            why.push("a minimal subtree search was incomplete");
        }
        notes.push(format!(
            "equality of the tree counts with the intersection number is not claimed: {}",
            why.join("; ")
        ));
    }
    if hypothesis_notes.iter().any(|h| h.outcome == ProbeOutcome::OneSided) {
        notes.push("the coboundary of D is far from that of E on one side only".into());
    }
    Ok(IntersectionReport {
        d: d.describe(g),
        e: e.describe(g),
        radius,
        tree_lower_bound_12: b12,
        tree_lower_bound_21: b21,
        tree_bounds_complete: tree_complete,
        candidates: cands.len(),
        crossing,
        unknown,
        certified_count,
        truncated_count,
        certified_exact,
        complete,
        hypothesis_notes,
        equality_claimed,
        notes,
    })
}

/// Balls used for canonical reps are capped so that large groups stay cheap.
fn canon_radius(g: &Group) -> usize {
    let n = g.alphabet().len();
    if n <= 2 {
        8
    } else if n <= 4 {
        5
    } else {
        4
    }
}

fn shortlex_key(g: &Group, w: &Word) -> Vec<u32> {
    let n = g.alphabet().len();
    let mut k = vec![w.len() as u32];
    k.extend(w.0.iter().map(|s| s.rank(n) as u32));
    k
}

/// Merges crossing entries whose reps satisfy `σ·a·λ = b` for short σ, λ.
fn merge_equal_cosets(
    g: &Group,
    entries: &mut Vec<CosetEntry>,
    sigma: &Subgroup,
    lambda: &Subgroup,
) -> usize {
    use crate::crossing::subgroup_elements;
    if entries.len() < 2 {
        return 0;
    }
    let ss = subgroup_elements(g, &sigma.generators(g), 3);
    let ll = subgroup_elements(g, &lambda.generators(g), 3);
    let mut keep: Vec<CosetEntry> = Vec::new();
    let mut merged = 0;
    'outer: for e in entries.drain(..) {
        for k in &keep {
            let target = g.key(&k.rep);
            for s in &ss {
                for l in &ll {
                    if g.key(&s.mul(&e.rep).mul(l)) == target {
                        merged += 1;
                        continue 'outer;
                    }
                }
            }
        }
        keep.push(e);
    }
    *entries = keep;
    merged
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub outcome: CheckOutcome,
    pub certified: bool,
    pub detail: String,
}

fn compare(name: &str, a: &IntersectionReport, b: &IntersectionReport, extra: &str) -> IdentityCheck {
    let same = a.truncated_count == b.truncated_count && a.certified_count == b.certified_count;
    let outcome = if same {
        CheckOutcome::Pass
    } else if a.complete && b.complete {
        CheckOutcome::Fail
    } else {
        CheckOutcome::Inconclusive
    };
    IdentityCheck {
        name: name.into(),
        outcome,
        certified: a.certified_exact.is_some() && b.certified_exact.is_some(),
        detail: format!(
            "{} vs {} crossing cosets ({} vs {} certified){extra}",
            a.truncated_count, b.truncated_count, a.certified_count, b.certified_count
        ),
    }
}

/// Recomputes the report under swap, complements and a finite perturbation.
pub fn verify_identities(
    g: &Group,
    d: &HalfspaceSet,
    e: &HalfspaceSet,
    config: &IntersectionConfig,
) -> Result<(IntersectionReport, Vec<IdentityCheck>)> {
    let cfg = IntersectionConfig {
        probe: false,
        ..config.clone()
    };
    let base = intersection_number(g, d, e, &cfg)?;
    let mut checks = Vec::new();

    // Swap, matching ΣgΛ with Λg⁻¹Σ.
    let swapped = intersection_number(g, e, d, &cfg)?;
    let mut check = compare("swap i(D,E) = i(E,D)", &base, &swapped, "");
    let ball = g.ball(config.radius.min(canon_radius(g)));
    let canon = DoubleCosetCanon::new(g, &ball, &d.invariance_subgroup(g), &e.invariance_subgroup(g));
    let inverted: HashSet<Word> = base
        .crossing
        .iter()
        .map(|c| canon.canon(&c.rep.inverse()).rep)
        .collect();
    let there: HashSet<Word> = swapped.crossing.iter().map(|c| c.rep.clone()).collect();
    if check.outcome == CheckOutcome::Pass {
        if inverted == there {
            check.detail.push_str("; reps match under inversion");
        } else {
            check.outcome = CheckOutcome::Inconclusive;
            check.detail.push_str("; reps did not match under inversion");
        }
    }
    checks.push(check);

    for (name, a, b) in [
        ("complement i(D*,E)", d.complemented(), e.clone()),
        ("complement i(D,E*)", d.clone(), e.complemented()),
        ("complement i(D*,E*)", d.complemented(), e.complemented()),
    ] {
        let r = intersection_number(g, &a, &b, &cfg)?;
        checks.push(compare(name, &base, &r, ""));
    }

    // Add one coset of Σ outside E to E.
    let sw = Sweep::new(g, 2);
    let mem = sw.membership(e)?;
    let outside = sw
        .ball
        .words
        .iter()
        .zip(&mem)
        .skip(1)
        .find(|(_, m)| !**m)
        .map(|(w, _)| w.clone())
        .unwrap_or_default();
    let e2 = e.perturbed(vec![outside.clone()]);
    let ae = Sweep::new(g, config.radius.min(canon_radius(g))).almost_equal(e, &e2)?;
    let r = intersection_number(g, d, &e2, &cfg)?;
    let extra = format!(
        "; added the coset of {} (almost equal: {:?}, trace {:?})",
        g.fmt(&outside),
        ae.verdict,
        ae.trace
    );
    let mut check = compare("perturbation i(D,E') for E' almost equal to E", &base, &r, &extra);
    if ae.verdict != AlmostEqual::AlmostEqual && check.outcome == CheckOutcome::Pass {
        check.outcome = CheckOutcome::Inconclusive;
    }
    checks.push(check);
    Ok((base, checks))
}

/// The method that produced the verdicts of a report, for display.
pub fn methods_used(r: &IntersectionReport) -> Vec<VerdictMethod> {
    let mut m: Vec<VerdictMethod> = r.crossing.iter().map(|c| c.verdict.method).collect();
    m.sort_by_key(|x| x.to_string());
    m.dedup();
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::tests::{genus2_c, genus2_d, z2_z3};

    #[test]
    fn trivial_subgroups_give_singletons() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        for w in g.ball(3).words {
            let r = double_coset_canon(&g, &w, &Subgroup::Trivial, &Subgroup::Trivial, 4);
            assert_eq!(r.rep, w);
        }
        let e = double_coset_canon(&g, &Word::identity(), &Subgroup::Trivial, &Subgroup::Trivial, 4);
        assert_eq!(e.rep, Word::identity());
    }

    #[test]
    fn canon_is_constant_on_double_cosets() {
        let (a, d) = genus2_d();
        let (_, c) = genus2_c();
        let g = Group::split(a.clone(), vec![d, c]).unwrap();
        let sigma = Subgroup::Edge { splitting: 0, conj: Word::identity() };
        let lambda = Subgroup::Edge { splitting: 1, conj: Word::identity() };
        let ball = g.ball(5);
        let canon = DoubleCosetCanon::new(&g, &ball, &sigma, &lambda);
        let s = a.parse_word("[a,b]").unwrap();
        let l = a.parse_word("a c").unwrap();
        for w in ["b", "d^-1", "c b"] {
            let w = a.parse_word(w).unwrap();
            let r = canon.canon(&w).rep;
            assert_eq!(canon.canon(&s.mul(&w)).rep, r);
            assert_eq!(canon.canon(&w.mul(&l.inverse())).rep, r);
        }
    }

    #[test]
    fn self_intersection_of_z2_z3_is_zero() {
        let (a, s) = z2_z3();
        let g = Group::split(a, vec![s]).unwrap();
        let x = HalfspaceSet::standard(0);
        let r = intersection_number(&g, &x, &x, &IntersectionConfig::default()).unwrap();
        assert_eq!(r.certified_exact, Some(0));
    }
}
