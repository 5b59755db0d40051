//! Stallings foldings for finitely generated subgroups of free groups.
//!
//! Every edge carries a label: a word in the subgroup generators. Reading a
//! loop at the base multiplies labels, which gives an explicit expression
//! of a member in terms of the generators. This is what lets an HNN
//! splitting transport edge-group elements along the stable letter.
//!
//! Coset representatives are exact: the element of `yH` that is minimal in
//! a given letter order is a path in the Schreier graph, read backwards,
//! and the only non-core part of that path is forced.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::word::{free_reduce, Symbol, Word};

/// A total order on the letters of a free alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterOrder {
    rank: Vec<usize>,
    rank_count: usize,
}

impl LetterOrder {
    /// Shortlex order: positives in index order, then inverses.
    pub fn shortlex(n: usize) -> Self {
        LetterOrder {
            rank: (0..2 * n).collect(),
            rank_count: n,
        }
    }

    /// Shortlex on the reversed alphabet.
    pub fn reversed(n: usize) -> Self {
        let mut rank = vec![0; 2 * n];
        for g in 0..n {
            rank[g] = n - 1 - g;
            rank[n + g] = 2 * n - 1 - g;
        }
        LetterOrder {
            rank,
            rank_count: n,
        }
    }

    pub fn rank(&self, s: Symbol) -> usize {
        self.rank[s.gen as usize + if s.inverse { self.rank_count } else { 0 }]
    }

    pub fn cmp(&self, a: &Word, b: &Word) -> std::cmp::Ordering {
        a.len().cmp(&b.len()).then_with(|| {
            a.0.iter()
                .map(|&s| self.rank(s))
                .cmp(b.0.iter().map(|&s| self.rank(s)))
        })
    }

    /// Letters sorted by this order.
    pub fn letters(&self) -> Vec<Symbol> {
        let n = self.rank_count as u16;
        let mut all: Vec<Symbol> = (0..n)
            .map(Symbol::pos)
            .chain((0..n).map(|g| Symbol::new(g, true)))
            .collect();
        all.sort_by_key(|&s| self.rank(s));
        all
    }
}

/// The folded core graph of a subgroup of the free group on `rank` letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldedAutomaton {
    rank: usize,
    states: usize,
    /// `trans[state]` maps a letter to `(target, label)`; both directions are stored.
    trans: Vec<BTreeMap<Symbol, (usize, Word)>>,
    generator_words: Vec<Word>,
    free_basis: bool,
}

#[derive(Clone)]
struct RawEdge {
    from: usize,
    letter: Symbol,
    to: usize,
    label: Word,
}

/// Builds the folded automaton of `⟨gens⟩` in the free group of the given rank.
pub fn stallings_graph(rank: usize, gens: &[Word]) -> FoldedAutomaton {
    let gens: Vec<Word> = gens.iter().map(free_reduce).collect();
    let mut states = 1usize;
    let mut edges: Vec<RawEdge> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if g.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (k, &s) in g.0.iter().enumerate() {
            let last = k + 1 == g.len();
            let next = if last {
                0
            } else {
                states += 1;
                states - 1
            };
            let label = if last {
                Word::letter(Symbol::pos(i as u16))
            } else {
                Word::identity()
            };
            edges.push(orient(cur, s, next, label));
            cur = next;
        }
    }

    // Union-find over states; folding rewrites edge endpoints and labels.
    let mut parent: Vec<usize> = (0..states).collect();
    let mut free_basis = true;
    loop {
        let mut fold = None;
        // (state, letter) -> edge index, looking at both directions.
        let mut seen: BTreeMap<(usize, Symbol), usize> = BTreeMap::new();
        'scan: for (idx, e) in edges.iter().enumerate() {
            for (u, s) in [(e.from, e.letter), (e.to, e.letter.inv())] {
                if let Some(&other) = seen.get(&(u, s)) {
                    if other != idx {
                        fold = Some((other, idx, u, s));
                        break 'scan;
                    }
                } else {
                    seen.insert((u, s), idx);
                }
            }
        }
        let Some((i1, i2, u, s)) = fold else { break };
        let (v1, l1) = follow(&edges[i1], u, s);
        let (v2, l2) = follow(&edges[i2], u, s);
        if v1 == v2 {
            if l1 != l2 {
                free_basis = false;
            }
            edges.swap_remove(i2);
            continue;
        }
        // Keep the base state as a representative.
        let (keep, gone, lk, lg) = if v2 == 0 { (v2, v1, l2, l1) } else { (v1, v2, l1, l2) };
        let delta = lk.inverse().mul(&lg);
        let delta_inv = delta.inverse();
        edges.swap_remove(i2);
        for e in edges.iter_mut() {
            if e.from == gone && e.to == gone {
                e.label = delta.mul(&e.label).mul(&delta_inv);
            } else if e.from == gone {
                e.label = delta.mul(&e.label);
            } else if e.to == gone {
                e.label = e.label.mul(&delta_inv);
            }
            if e.from == gone {
                e.from = keep;
            }
            if e.to == gone {
                e.to = keep;
            }
        }
        parent[gone] = keep;
    }

    // Compact state numbering, base first.
    let mut remap = vec![usize::MAX; states];
    let mut next = 0;
    for s in 0..states {
        if parent[s] == s {
            remap[s] = next;
            next += 1;
        }
    }
    let mut trans = vec![BTreeMap::new(); next];
    for e in &edges {
        let (a, b) = (remap[e.from], remap[e.to]);
        trans[a].insert(e.letter, (b, e.label.clone()));
        trans[b].insert(e.letter.inv(), (a, e.label.inverse()));
    }
    FoldedAutomaton {
        rank,
        states: next,
        trans,
        generator_words: gens,
        free_basis,
    }
}

fn orient(from: usize, s: Symbol, to: usize, label: Word) -> RawEdge {
    if s.inverse {
        RawEdge {
            from: to,
            letter: s.inv(),
            to: from,
            label: label.inverse(),
        }
    } else {
        RawEdge {
            from,
            letter: s,
            to,
            label,
        }
    }
}

/// Target and label when traversing `e` from `u` reading `s`.
fn follow(e: &RawEdge, u: usize, s: Symbol) -> (usize, Word) {
    if e.from == u && e.letter == s {
        (e.to, e.label.clone())
    } else {
        (e.from, e.label.inverse())
    }
}

/// Result of reading a word from the base state.
struct Reading {
    state: usize,
    consumed: usize,
    label: Word,
}

impl FoldedAutomaton {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn generator_words(&self) -> &[Word] {
        &self.generator_words
    }

    /// False when the generators satisfy a relation (a fold merged two distinct labels).
    pub fn is_free_basis(&self) -> bool {
        self.free_basis
    }

    pub fn transition(&self, state: usize, s: Symbol) -> Option<usize> {
        self.trans[state].get(&s).map(|(t, _)| *t)
    }

    /// Number of directed transitions (each edge counted twice).
    pub fn transition_count(&self) -> usize {
        self.trans.iter().map(|m| m.len()).sum()
    }

    fn read(&self, w: &Word) -> Reading {
        let mut state = 0;
        let mut label = Word::identity();
        for (k, s) in w.0.iter().enumerate() {
            match self.trans[state].get(s) {
                Some((t, l)) => {
                    state = *t;
                    label = label.mul(l);
                }
                None => {
                    return Reading {
                        state,
                        consumed: k,
                        label,
                    }
                }
            }
        }
        Reading {
            state,
            consumed: w.len(),
            label,
        }
    }

    pub fn is_member(&self, w: &Word) -> bool {
        let w = free_reduce(w);
        let r = self.read(&w);
        r.consumed == w.len() && r.state == 0
    }

    /// Expresses a member as a word in the subgroup generators
    /// (generator `i` is `Symbol::pos(i)`).
    pub fn witness(&self, w: &Word) -> Option<Word> {
        let w = free_reduce(w);
        let r = self.read(&w);
        (r.consumed == w.len() && r.state == 0).then_some(r.label)
    }

    /// Shortest path from `q` to the base, least in `order` among shortest.
    fn geodesic_to_base(&self, q: usize, order: &LetterOrder) -> Word {
        let mut dist = vec![usize::MAX; self.states];
        dist[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for (_, (t, _)) in self.trans[v].iter() {
                if dist[*t] == usize::MAX {
                    dist[*t] = dist[v] + 1;
                    queue.push_back(*t);
                }
            }
        }
        let letters = order.letters();
        let mut out = Word::identity();
        let mut cur = q;
        while cur != 0 {
            let (s, t) = letters
                .iter()
                .filter_map(|&s| self.transition(cur, s).map(|t| (s, t)))
                .find(|&(_, t)| dist[t] + 1 == dist[cur])
                .expect("core graph is connected");
            out.push(s);
            cur = t;
        }
        out
    }

    /// Least element of the left coset `y·H` in the given order.
    pub fn coset_rep_in(&self, y: &Word, order: &LetterOrder) -> Word {
        let y_inv = free_reduce(y).inverse();
        let r = self.read(&y_inv);
        let tail = Word(y_inv.0[r.consumed..].to_vec()).inverse();
        tail.mul(&self.geodesic_to_base(r.state, order))
    }

    /// Shortlex-least element of `y·H`.
    pub fn coset_rep(&self, y: &Word) -> Word {
        self.coset_rep_in(y, &LetterOrder::shortlex(self.rank))
    }

    /// Splits `y = rep·h` with `h ∈ H`; also returns `h` in the subgroup generators.
    pub fn decompose_in(&self, y: &Word, order: &LetterOrder) -> (Word, Word, Word) {
        let y = free_reduce(y);
        let rep = self.coset_rep_in(&y, order);
        let h = rep.inverse().mul(&y);
        let wit = self
            .witness(&h)
            .expect("rep^-1 y lies in the subgroup by construction");
        (rep, h, wit)
    }

    /// True if folding the generator words of `self` again changes nothing.
    pub fn refold(&self) -> FoldedAutomaton {
        stallings_graph(self.rank, &self.generator_words)
    }
}

/// Evaluates a word in subgroup generators back into the ambient free group.
pub fn evaluate(gens: &[Word], w: &Word) -> Word {
    let mut out = Word::identity();
    for s in &w.0 {
        let g = &gens[s.gen as usize];
        out = out.mul(&if s.inverse { g.inverse() } else { g.clone() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;
    use std::collections::HashSet;

    fn ab() -> Alphabet {
        Alphabet::new(&["a", "b"]).unwrap()
    }

    /// All products of at most `len` generator letters, reduced.
    fn enumerate_subgroup(gens: &[Word], len: usize) -> HashSet<Word> {
        let mut letters = Vec::new();
        for g in gens {
            letters.push(g.clone());
            letters.push(g.inverse());
        }
        let mut out: HashSet<Word> = HashSet::from([Word::identity()]);
        let mut frontier = vec![Word::identity()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in &letters {
                    let p = w.mul(l);
                    if out.insert(p.clone()) {
                        next.push(p);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    fn all_words(rank: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        let letters: Vec<Symbol> = (0..rank as u16)
            .map(Symbol::pos)
            .chain((0..rank as u16).map(|g| Symbol::new(g, true)))
            .collect();
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &frontier {
                for &s in &letters {
                    if w.0.last() == Some(&s.inv()) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn cyclic_subgroup_is_a_loop() {
        let a = ab();
        let h = stallings_graph(2, &[a.parse_word("a").unwrap()]);
        assert_eq!(h.state_count(), 1);
        assert_eq!(h.transition(0, Symbol::pos(0)), Some(0));
    }

    #[test]
    fn a_squared_and_b() {
        let a = ab();
        let h = stallings_graph(2, &a.parse_word_list("a^2, b").unwrap());
        assert_eq!(h.state_count(), 2);
        assert_eq!(h.transition(0, Symbol::pos(1)), Some(0));
        let s = h.transition(0, Symbol::pos(0)).unwrap();
        assert_ne!(s, 0);
        assert_eq!(h.transition(s, Symbol::pos(0)), Some(0));
        assert!(h.is_member(&a.parse_word("a^2").unwrap()));
        assert!(!h.is_member(&a.parse_word("a").unwrap()));
        assert!(h.is_member(&Word::identity()));
    }

    #[test]
    fn conjugate_of_b_folds_to_two_states() {
        // The loop a·b·a^-1 folds its two a-edges together.
        let a = ab();
        let h = stallings_graph(2, &[a.parse_word("a b a^-1").unwrap()]);
        assert_eq!(h.state_count(), 2);
        let far = h.transition(0, Symbol::pos(0)).unwrap();
        assert_eq!(h.transition(far, Symbol::pos(1)), Some(far));
    }

    #[test]
    fn folding_is_deterministic_and_stable() {
        let a = Alphabet::new(&["a", "b", "c"]).unwrap();
        let h = stallings_graph(3, &a.parse_word_list("a b a^-1, b a b^-1, c a c").unwrap());
        for q in 0..h.state_count() {
            // BTreeMap keys are unique; check that inverse edges match up.
            for (s, (t, _)) in h.trans[q].iter() {
                assert_eq!(h.transition(*t, s.inv()), Some(q));
            }
        }
        let again = h.refold();
        assert_eq!(again.state_count(), h.state_count());
        assert_eq!(again.transition_count(), h.transition_count());
    }

    #[test]
    fn membership_matches_enumeration() {
        let a = ab();
        let cases = ["a^2, b", "a b a^-1", "a b, b a", "[a,b]", "a^3, b a b^-1"];
        for case in cases {
            let gens = a.parse_word_list(case).unwrap();
            let h = stallings_graph(2, &gens);
            let members = enumerate_subgroup(&gens, 6);
            for w in all_words(2, 4) {
                if members.contains(&w) {
                    assert!(h.is_member(&w), "{case}: {}", a.fmt_word(&w));
                }
            }
            // Members up to length 4 are products of at most 4 generators here
            // (each generator has length >= 1 and the graphs have no short cuts).
            for w in all_words(2, 4) {
                if h.is_member(&w) {
                    let wit = h.witness(&w).unwrap();
                    assert_eq!(evaluate(&gens, &wit), w, "{case}");
                }
            }
        }
    }

    #[test]
    fn witnesses_evaluate_correctly() {
        let a = Alphabet::new(&["a", "b", "c"]).unwrap();
        let gens = a.parse_word_list("a c, b a b^-1 c").unwrap();
        let h = stallings_graph(3, &gens);
        for w in enumerate_subgroup(&gens, 4) {
            let wit = h.witness(&w).expect("member");
            assert_eq!(evaluate(&gens, &wit), w);
        }
        assert!(h.is_free_basis());
        let h = stallings_graph(2, &a.parse_word_list("a, a^2").unwrap());
        assert!(!h.is_free_basis());
    }

    #[test]
    fn coset_rep_strips_subgroup_tail() {
        let a = ab();
        let h = stallings_graph(2, &[a.parse_word("b").unwrap()]);
        assert_eq!(h.coset_rep(&a.parse_word("a b^3").unwrap()), a.parse_word("a").unwrap());
        assert_eq!(h.coset_rep(&a.parse_word("b^5").unwrap()), Word::identity());
        let trivial = stallings_graph(2, &[]);
        let g = a.parse_word("a b^-1 a").unwrap();
        assert_eq!(trivial.coset_rep(&g), g);
    }

    /// Brute-force oracle: least element of {y·h : h in H, |h| <= horizon}.
    fn scan_rep(h: &FoldedAutomaton, y: &Word, order: &LetterOrder) -> Word {
        let gens = h.generator_words().to_vec();
        let maxg = gens.iter().map(|g| g.len()).max().unwrap_or(0);
        let horizon = y.len() + 2 * maxg;
        let mut best = y.clone();
        for w in all_words(h.rank(), horizon) {
            if h.is_member(&w) {
                let c = y.mul(&w);
                if order.cmp(&c, &best).is_lt() {
                    best = c;
                }
            }
        }
        best
    }

    #[test]
    fn coset_rep_agrees_with_scan() {
        let a = ab();
        for case in ["b", "a^2, b", "a b a^-1", "[a,b]"] {
            let h = stallings_graph(2, &a.parse_word_list(case).unwrap());
            for order in [LetterOrder::shortlex(2), LetterOrder::reversed(2)] {
                for y in all_words(2, 3) {
                    let rep = h.coset_rep_in(&y, &order);
                    assert_eq!(rep, scan_rep(&h, &y, &order), "{case} {}", a.fmt_word(&y));
                    assert!(h.is_member(&rep.inverse().mul(&y)));
                }
            }
        }
    }

    #[test]
    fn coset_rep_is_constant_on_cosets() {
        let a = ab();
        let gens = a.parse_word_list("a^2, b a b").unwrap();
        let h = stallings_graph(2, &gens);
        let members: Vec<Word> = enumerate_subgroup(&gens, 2).into_iter().collect();
        for y in all_words(2, 3) {
            let r = h.coset_rep(&y);
            for m in &members {
                assert_eq!(h.coset_rep(&y.mul(m)), r);
            }
        }
    }
}
