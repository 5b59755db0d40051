//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p splitcross-cli --test acceptance -- --nocapture`.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splitcross::automaton::corner_automata;
use splitcross::corpus::{build_scenario, Instance, BUILTIN, FOUR_Z2_COUNTS};
use splitcross::crossing::{crosses, hypothesis_probe, Method, ProbeOutcome};
use splitcross::factor::{FactorSpec, Transversal};
use splitcross::group::Group;
use splitcross::intersection::{intersection_number, verify_identities, CheckOutcome, IntersectionConfig};
use splitcross::sets::HalfspaceSet;
use splitcross::splitting::{Side, SplitKind, Splitting, SplittingSpec};
use splitcross::sweep::Sweep;
use splitcross::tree::{edge_endpoints, minimal_subtree, vertex_key};
use splitcross::word::{Alphabet, Symbol, Word};

struct Outcome {
    ok: bool,
    detail: String,
}

fn instance(name: &str) -> Instance {
    build_scenario(name).unwrap().instantiate().unwrap()
}

fn split_scenarios() -> Vec<Instance> {
    BUILTIN
        .iter()
        .map(|n| instance(n))
        .filter(|i| !i.group.is_abelian())
        .collect()
}

fn config(radius: usize) -> IntersectionConfig {
    IntersectionConfig { radius, ..IntersectionConfig::default() }
}

fn criterion_1() -> Outcome {
    let inst = instance("zz-asymmetric");
    let g = &inst.group;
    let (x, y) = (inst.set("X").unwrap(), inst.set("Y").unwrap());
    let yx = crosses(g, y, x, Method::Auto, 6).unwrap();
    let xy = crosses(g, x, y, Method::Auto, 6).unwrap();
    Outcome {
        ok: yx.crosses == Some(true) && yx.certified && xy.crosses == Some(false) && xy.certified,
        detail: format!("Y crosses X: {} ({}), X crosses Y: {} ({})", yx.label(), yx.method, xy.label(), xy.method),
    }
}

fn random_word(rng: &mut ChaCha8Rng, gens: usize, max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    let mut w = Word::identity();
    for _ in 0..n {
        let s = Symbol { gen: rng.gen_range(0..gens) as u16, inverse: rng.gen_bool(0.5) };
        w = w.mul(&Word::letter(s));
    }
    w
}

fn finite_factor(order: usize, prefix: &str) -> (FactorSpec, Vec<String>) {
    match order {
        4 if prefix.ends_with('k') => {
            let (x, y) = (format!("{prefix}x"), format!("{prefix}y"));
            (FactorSpec::Klein { x: x.clone(), y: y.clone() }, vec![x, y])
        }
        _ => {
            let l = format!("{prefix}g");
            (FactorSpec::Cyclic { letter: l.clone(), order }, vec![l])
        }
    }
}

/// `A * B` with `A`, `B` drawn from Z/2, Z/3, Z/4 and the Klein group.
fn random_free_product(rng: &mut ChaCha8Rng) -> Group {
    let pick = |rng: &mut ChaCha8Rng, p: &str| {
        let k = rng.gen_range(0..4);
        if k == 3 {
            finite_factor(4, &format!("{p}k"))
        } else {
            finite_factor(k + 2, p)
        }
    };
    let (fa, la) = pick(rng, "a");
    let (fb, lb) = pick(rng, "b");
    let names: Vec<String> = la.iter().chain(&lb).cloned().collect();
    let alphabet = Alphabet::new(&names).unwrap();
    let spec = SplittingSpec {
        name: "F".into(),
        kind: SplitKind::Amalgam,
        factors_a: vec![fa],
        factors_b: vec![fb],
        edge_a: vec![],
        edge_b: vec![],
        stable: None,
        map: names.iter().map(|n| (n.clone(), n.clone())).collect(),
        back: vec![],
        transversal: Transversal::Shortlex,
    };
    let s = Splitting::build(spec, &alphabet).unwrap();
    Group::split(alphabet, vec![s]).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, g: &Group, base: &HalfspaceSet) -> HalfspaceSet {
    let gens = g.alphabet().len();
    let mut s = base.translate(&random_word(rng, gens, 4));
    if rng.gen_bool(0.5) {
        s = s.complemented();
    }
    if rng.gen_bool(0.25) {
        s = s.perturbed(vec![random_word(rng, gens, 3)]);
    }
    s
}

/// Crossing by the corner automata alone.
fn automaton_crosses(g: &Group, x: &HalfspaceSet, y: &HalfspaceSet) -> Option<bool> {
    let ca = corner_automata(g, x, y).ok()?;
    Some(ca.corners.iter().all(|d| d.is_infinite()))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = 0;
    let mut crossing = 0;
    let mut bad = Vec::new();
    let mut check = |g: &Group, x: &HalfspaceSet, y: &HalfspaceSet| {
        let (a, b) = (automaton_crosses(g, x, y), automaton_crosses(g, y, x));
        let (Some(a), Some(b)) = (a, b) else {
            bad.push(format!("no automaton for {} / {}", x.describe(g), y.describe(g)));
            return;
        };
        let v = crosses(g, x, y, Method::Exact, 6).unwrap();
        if a != b || v.crosses != Some(a) || !v.certified {
            bad.push(format!("{} vs {}", x.describe(g), y.describe(g)));
        }
        pairs += 1;
        crossing += a as usize;
    };
    let four = instance("four-z2");
    let g = &four.group;
    let sets: Vec<HalfspaceSet> = four.sets.iter().map(|(_, s)| s.clone()).collect();
    for x in &sets {
        for y in &sets {
            check(g, x, y);
            for _ in 0..6 {
                let (a, b) = (random_set(&mut rng, g, x), random_set(&mut rng, g, y));
                check(g, &a, &b);
            }
        }
    }
    let mut groups = 0;
    for _ in 0..24 {
        let g = random_free_product(&mut rng);
        let base = HalfspaceSet::standard(0);
        for _ in 0..6 {
            let (a, b) = (random_set(&mut rng, &g, &base), random_set(&mut rng, &g, &base));
            check(&g, &a, &b);
        }
        groups += 1;
    }
    Outcome {
        ok: bad.is_empty() && groups >= 20,
        detail: format!(
            "{pairs} certified pairs ({crossing} crossing) over four-z2 and {groups} random free products; {} disagreements {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut seen = Vec::new();
    let mut ok = true;
    for inst in split_scenarios() {
        for (name, x) in inst.standard_sets() {
            let r = intersection_number(&inst.group, &x, &x, &config(6)).unwrap();
            ok &= r.certified_exact == Some(0);
            seen.push(format!("{}:{name}={:?}", inst.scenario.name, r.certified_exact));
        }
    }
    Outcome { ok, detail: seen.join(" ") }
}

fn criterion_4() -> Outcome {
    let inst = instance("four-z2");
    let mut ok = true;
    let mut seen = Vec::new();
    for (d, e, golden) in FOUR_Z2_COUNTS {
        let r = intersection_number(&inst.group, inst.set(d).unwrap(), inst.set(e).unwrap(), &config(6)).unwrap();
        ok &= r.certified_exact == Some(golden) && golden > 0;
        seen.push(format!("i({d},{e})={:?}", r.certified_exact));
    }
    Outcome { ok, detail: seen.join(" ") }
}

fn criterion_5() -> Outcome {
    let inst = instance("genus2-curves");
    let r = intersection_number(&inst.group, inst.set("C").unwrap(), inst.set("D").unwrap(), &config(6)).unwrap();
    let ok = r.tree_lower_bound_12 == Some(2)
        && r.tree_lower_bound_21 == Some(2)
        && r.certified_count == 2
        && r.truncated_count == 2;
    Outcome {
        ok,
        detail: format!(
            "tree bounds {:?}/{:?}, count {} ({} certified) at radius 6",
            r.tree_lower_bound_12, r.tree_lower_bound_21, r.truncated_count, r.certified_count
        ),
    }
}

fn criterion_6() -> Outcome {
    let inst = instance("genus2-erratum");
    let g = &inst.group;
    let c = g.splitting(inst.splitting_index("C").unwrap());
    let w = g.splitting(inst.splitting_index("W").unwrap());
    let pi_c = [g.parse("a c").unwrap()];
    let pi_w = [g.parse("a").unwrap(), g.parse("b a b^-1").unwrap()];
    let m0 = minimal_subtree(w, &pi_c, 4);
    let m1 = minimal_subtree(c, &pi_w, 4);
    let (x, y) = (inst.set("C").unwrap(), inst.set("W").unwrap());
    let probes: Vec<ProbeOutcome> = [4, 6, 8]
        .iter()
        .map(|&r| hypothesis_probe(g, x, y, r).unwrap().outcome)
        .collect();
    let r = intersection_number(g, x, y, &config(6)).unwrap();
    let ok = m0.quotient_edge_count == 0
        && m1.quotient_edge_count == 1
        && m0.complete
        && m1.complete
        && probes.iter().all(|&p| p == ProbeOutcome::OneSided)
        && !r.equality_claimed
        && r.tree_lower_bound_12 == Some(0)
        && r.tree_lower_bound_21 == Some(1);
    Outcome {
        ok,
        detail: format!(
            "edges {} and {}, probes {:?}, equality claimed: {}, count {}",
            m0.quotient_edge_count, m1.quotient_edge_count, probes, r.equality_claimed, r.truncated_count
        ),
    }
}

/// Radius used for the all-pairs sweep of criterion 7.
const INEQUALITY_RADIUS: usize = 5;

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut seen = Vec::new();
    for inst in split_scenarios() {
        for (i, (dn, d)) in inst.sets.iter().enumerate() {
            for (j, (en, e)) in inst.sets.iter().enumerate() {
                if i == j {
                    continue;
                }
                let r = intersection_number(&inst.group, d, e, &config(INEQUALITY_RADIUS)).unwrap();
                let holds = r.lower_bound() <= r.truncated_count;
                ok &= holds;
                seen.push(format!("{}:{dn}/{en} {}<={}", inst.scenario.name, r.lower_bound(), r.truncated_count));
            }
        }
    }
    Outcome { ok, detail: seen.join(" ") }
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut seen = Vec::new();
    let jobs = [
        ("four-z2", "P", "Q"),
        ("four-z2", "P", "R"),
        ("four-z2", "Q", "R"),
        ("genus2-curves", "C", "D"),
    ];
    for (sc, d, e) in jobs {
        let inst = instance(sc);
        let (_, checks) =
            verify_identities(&inst.group, inst.set(d).unwrap(), inst.set(e).unwrap(), &config(6)).unwrap();
        let pass = checks.iter().filter(|c| c.outcome == CheckOutcome::Pass).count();
        ok &= pass == checks.len();
        seen.push(format!("{sc}:{d}/{e} {pass}/{}", checks.len()));
    }
    Outcome { ok, detail: seen.join(" ") }
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut checked = 0;
    for inst in split_scenarios() {
        let sw = Sweep::new(&inst.group, 5);
        for i in 0..inst.group.splittings().len() {
            let first = sw.membership(&HalfspaceSet::standard(i)).unwrap();
            let tree = sw.membership(&HalfspaceSet::tree(i)).unwrap();
            ok &= first == tree;
            checked += first.len();
        }
    }
    Outcome { ok, detail: format!("{checked} memberships compared") }
}

/// Tree distance by breadth-first search in a finite piece of the tree.
fn bfs_distance(adj: &HashMap<VKey, Vec<VKey>>, a: &VKey, b: &VKey) -> Option<(usize, Vec<VKey>)> {
    let mut prev: HashMap<&VKey, Option<&VKey>> = HashMap::from([(a, None)]);
    let mut q = VecDeque::from([a]);
    while let Some(v) = q.pop_front() {
        if v == b {
            let mut path = vec![v.clone()];
            let mut cur = v;
            while let Some(Some(p)) = prev.get(cur) {
                path.push((*p).clone());
                cur = p;
            }
            path.reverse();
            return Some((path.len() - 1, path));
        }
        for n in adj.get(v).into_iter().flatten() {
            if !prev.contains_key(n) {
                prev.insert(n, Some(v));
                q.push_back(n);
            }
        }
    }
    None
}

type VKey = (Side, splitcross::splitting::NormalForm);

/// Translation length as `min d(v, g v)` over the vertices of `[v0, g v0]`,
/// with distances taken by BFS in the edges `p·q·e`, `p` a prefix of `g²`
/// and `q` of length at most 2.
fn oracle_translation_length(g: &Group, s: &Splitting, w: &Word) -> usize {
    let letters: Vec<Word> = g.alphabet().letters().into_iter().map(Word::letter).collect();
    let mut short = vec![Word::identity()];
    for _ in 0..2 {
        let mut next = short.clone();
        for u in &short {
            for l in &letters {
                next.push(u.mul(l));
            }
        }
        short = next;
    }
    let ww = w.mul(w);
    let mut adj: HashMap<VKey, Vec<VKey>> = HashMap::new();
    for k in 0..=ww.len() {
        let p = Word(ww.symbols()[..k].to_vec());
        for q in &short {
            let [u, v] = edge_endpoints(s, &s.normalize(&p.mul(q)));
            adj.entry(u.clone()).or_default().push(v.clone());
            adj.entry(v).or_default().push(u);
        }
    }
    let act = |v: &VKey| -> VKey {
        let moved = s.extend(&s.normalize(w), &s.nf_tokens(&v.1));
        vertex_key(s, &moved, v.0)
    };
    let v0 = vertex_key(s, &s.identity_nf(), Side::A);
    let (_, path) = bfs_distance(&adj, &v0, &act(&v0)).expect("fragment connects v0 and g v0");
    path.iter()
        .map(|v| bfs_distance(&adj, v, &act(v)).expect("fragment contains [v, g v]").0)
        .min()
        .unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ok = true;
    let mut words = 0;
    let mut traces = Vec::new();
    for inst in split_scenarios() {
        let g = &inst.group;
        for s in g.splittings() {
            for _ in 0..100 {
                let w = random_word(&mut rng, g.alphabet().len(), 6);
                let (a, b) = (s.cyclic_length(&w), oracle_translation_length(g, s, &w));
                if a != b {
                    ok = false;
                    traces.push(format!("{}: {} gives {a} vs {b}", s.name(), g.fmt(&w)));
                }
                words += 1;
            }
        }
        let sw = Sweep::new(g, 6);
        for i in 0..g.splittings().len() {
            let t = sw.coboundary_trace(&HalfspaceSet::standard(i)).unwrap();
            ok &= t[5] == t[6];
            traces.push(format!("{}:{}={:?}", inst.scenario.name, g.splitting(i).name(), &t[4..]));
        }
    }
    Outcome { ok, detail: format!("{words} words; coboundary traces {}", traces.join(" ")) }
}

#[test]
fn acceptance() {
    let criteria: [(usize, &str, u64, fn() -> Outcome); 10] = [
        (1, "Z x Z asymmetric crossing", 1, criterion_1),
        (2, "crossing symmetry", 30, criterion_2),
        (3, "self-intersection zero", 5, criterion_3),
        (4, "four-group amalgam", 60, criterion_4),
        (5, "genus-2 curves", 120, criterion_5),
        (6, "tree count counterexample", 120, criterion_6),
        (7, "tree bound inequality", 60, criterion_7),
        (8, "identity suite", 120, criterion_8),
        (9, "dual definitions of X", 60, criterion_9),
        (10, "oracle equivalences", 60, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, name, limit, f) in criteria {
        let t = Instant::now();
        let out = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = out.ok && in_time;
        // Written to stderr directly so the lines show even when output is captured.
        let line = format!(
            "criterion {n:>2} {}: {name}: {} [{:.2}s of {limit}s]\n",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
        let _ = std::io::stderr().write_all(line.as_bytes());
        if !pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
