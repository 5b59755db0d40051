//! Pairwise counts for Z/2*Z/2*Z/2*Z/2 against a reduced-word oracle that
//! shares no code with the engines.

use splitcross::corpus::{build_scenario, FOUR_Z2_COUNTS};
use splitcross::intersection::{intersection_number, IntersectionConfig};

/// Reduced words in letters 0..4: no letter repeats twice in a row.
fn reduced_words(len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for l in 0..4u8 {
                if w.last() != Some(&l) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

fn mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = a.to_vec();
    for &l in b {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// `w ∈ g·X` where X is "first letter in `side`".
fn in_translate(g: &[u8], w: &[u8], side: [u8; 2]) -> bool {
    let inv: Vec<u8> = g.iter().rev().cloned().collect();
    mul(&inv, w).first().is_some_and(|l| side.contains(l))
}

/// With trivial stabilisers a corner is infinite once it meets a sphere well
/// beyond `|g|`; spheres of radius 7 and 8 are checked.
fn oracle_count(x: [u8; 2], y: [u8; 2]) -> usize {
    let spheres = [reduced_words(7), reduced_words(8)];
    let mut n = 0;
    for len in 0..=4 {
        for g in reduced_words(len) {
            let all = spheres.iter().all(|sp| {
                let mut hit = [false; 4];
                for w in sp {
                    let (a, b) = (in_translate(&g, w, x), y.contains(&w[0]));
                    hit[(!a as usize) + 2 * (!b as usize)] = true;
                }
                hit.iter().all(|&h| h)
            });
            n += all as usize;
        }
    }
    n
}

fn side(name: &str) -> [u8; 2] {
    match name {
        "P" => [0, 1],
        "Q" => [0, 2],
        "R" => [0, 3],
        _ => unreachable!(),
    }
}

#[test]
fn golden_counts_match_the_reduced_word_oracle() {
    let inst = build_scenario("four-z2").unwrap().instantiate().unwrap();
    for (d, e, golden) in FOUR_Z2_COUNTS {
        assert_eq!(oracle_count(side(d), side(e)), golden, "{d} {e}");
        let r = intersection_number(
            &inst.group,
            inst.set(d).unwrap(),
            inst.set(e).unwrap(),
            &IntersectionConfig::default(),
        )
        .unwrap();
        assert_eq!(r.certified_exact, Some(golden));
    }
}

#[test]
fn self_counts_are_zero_by_the_oracle() {
    for n in ["P", "Q", "R"] {
        assert_eq!(oracle_count(side(n), side(n)), 0);
    }
}
