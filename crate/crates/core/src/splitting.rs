//! One-edge splittings, their canonical forms and the standard set.
//!
//! An amalgam `A *_C B` stores the edge group as two images, one in each
//! vertex group. An HNN extension `A *_C` stores the images of `C` and of
//! `C' = φ(C)` in `A`, with the convention `t⁻¹ c t = φ(c)`.
//!
//! Elements are normalised by pushing tokens on the right. Amalgam forms
//! are `s₁ … s_n λ` with alternating transversal syllables; HNN forms are
//! Britton forms `r₀ t^ε₁ r₁ … t^ε_n r_n λ` where a representative in front
//! of `t` is taken modulo `C`, one in front of `t⁻¹` modulo `C'`, and the
//! final one modulo `C`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{FactorSpec, Syl, SubgroupImage, Transversal, VElem, VertexGroup};
use crate::word::{Alphabet, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitKind {
    Amalgam,
    Hnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// X or X*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SideTag {
    X,
    XStar,
}

impl SideTag {
    pub fn complement(self) -> SideTag {
        match self {
            SideTag::X => SideTag::XStar,
            SideTag::XStar => SideTag::X,
        }
    }
}

/// A letter of the splitting's own presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Vertex(Side, VElem),
    /// The stable letter; `true` means `t⁻¹`.
    Stable(bool),
}

/// Canonical form of an element relative to a splitting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormalForm {
    Amalgam {
        syllables: Vec<(Side, VElem)>,
        /// Edge part, written in the A-copy of the edge group.
        edge: VElem,
    },
    Hnn {
        /// Representatives in front of each stable letter.
        reps: Vec<VElem>,
        /// `true` for `t⁻¹`.
        signs: Vec<bool>,
        last: VElem,
        /// Edge part in `C`.
        edge: VElem,
    },
}

impl NormalForm {
    /// Syllable count (amalgam) or stable-letter count (HNN).
    pub fn length(&self) -> usize {
        match self {
            NormalForm::Amalgam { syllables, .. } => syllables.len(),
            NormalForm::Hnn { signs, .. } => signs.len(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            NormalForm::Amalgam { syllables, edge } => syllables.is_empty() && edge.is_identity(),
            NormalForm::Hnn {
                signs, last, edge, ..
            } => signs.is_empty() && last.is_identity() && edge.is_identity(),
        }
    }

    /// The same form with the edge part dropped: the canonical name of `gC`.
    pub fn coset_key(&self) -> NormalForm {
        let mut k = self.clone();
        match &mut k {
            NormalForm::Amalgam { edge, .. } | NormalForm::Hnn { edge, .. } => {
                *edge = VElem::identity()
            }
        }
        k
    }

    pub fn edge_part(&self) -> &VElem {
        match self {
            NormalForm::Amalgam { edge, .. } | NormalForm::Hnn { edge, .. } => edge,
        }
    }
}

/// Text-level description of a splitting, as written in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingSpec {
    pub name: String,
    pub kind: SplitKind,
    pub factors_a: Vec<FactorSpec>,
    #[serde(default)]
    pub factors_b: Vec<FactorSpec>,
    /// Edge generators in A (amalgam) or generators of C in A (HNN).
    pub edge_a: Vec<String>,
    /// Edge generators in B (amalgam) or generators of C' in A (HNN).
    pub edge_b: Vec<String>,
    #[serde(default)]
    pub stable: Option<String>,
    /// Global generator name and its image as tokens.
    pub map: Vec<(String, String)>,
    /// Local name and its value as a global word. Names that coincide with a
    /// global generator mapped to exactly that token may be omitted.
    #[serde(default)]
    pub back: Vec<(String, String)>,
    #[serde(default)]
    pub transversal: Transversal,
}

#[derive(Debug, Clone)]
pub struct Splitting {
    spec: SplittingSpec,
    kind: SplitKind,
    vertex: Vec<VertexGroup>,
    edge_gens: [Vec<VElem>; 2],
    images: [SubgroupImage; 2],
    transversal: Transversal,
    map: Vec<Vec<Token>>,
    /// Global word for each syllable value, per vertex group and factor.
    back_free: Vec<Vec<Option<Word>>>,
    back_finite: Vec<Vec<Vec<Word>>>,
    back_stable: Option<Word>,
}

impl Splitting {
    pub fn build(spec: SplittingSpec, alphabet: &Alphabet) -> Result<Self> {
        let bad = |m: String| Error::InvalidSplitting(format!("{}: {m}", spec.name));
        let mut vertex = vec![VertexGroup::new(spec.factors_a.clone())?];
        match spec.kind {
            SplitKind::Amalgam => {
                vertex.push(VertexGroup::new(spec.factors_b.clone())?);
                if spec.stable.is_some() {
                    return Err(bad("an amalgam has no stable letter".into()));
                }
            }
            SplitKind::Hnn => {
                if !spec.factors_b.is_empty() {
                    return Err(bad("an HNN extension has one vertex group".into()));
                }
                if spec.stable.is_none() {
                    return Err(bad("an HNN extension needs a stable letter".into()));
                }
            }
        }
        let side_b = match spec.kind {
            SplitKind::Amalgam => 1,
            SplitKind::Hnn => 0,
        };
        if spec.edge_a.len() != spec.edge_b.len() {
            return Err(bad("edge generator lists differ in length".into()));
        }
        let edge_a: Vec<VElem> = spec
            .edge_a
            .iter()
            .map(|t| vertex[0].parse_elem(t))
            .collect::<Result<_>>()?;
        let edge_b: Vec<VElem> = spec
            .edge_b
            .iter()
            .map(|t| vertex[side_b].parse_elem(t))
            .collect::<Result<_>>()?;
        let images = [
            SubgroupImage::build(&vertex[0], &edge_a)?,
            SubgroupImage::build(&vertex[side_b], &edge_b)?,
        ];
        check_isomorphic(&images, &vertex[0], &vertex[side_b], &edge_a, &edge_b).map_err(bad)?;
        if spec.kind == SplitKind::Amalgam
            && (images[0].is_everything(&vertex[0]) || images[1].is_everything(&vertex[1]))
        {
            return Err(bad("the edge group equals a vertex group".into()));
        }
        images[0].validate_transversal(&vertex[0], &spec.transversal)?;
        images[1].validate_transversal(&vertex[side_b], &spec.transversal)?;

        let mut s = Splitting {
            kind: spec.kind,
            vertex,
            edge_gens: [edge_a, edge_b],
            images,
            transversal: spec.transversal.clone(),
            map: Vec::new(),
            back_free: Vec::new(),
            back_finite: Vec::new(),
            back_stable: None,
            spec,
        };
        s.map = s.parse_map(alphabet)?;
        s.resolve_back(alphabet)?;
        s.check_back_inverts_map(alphabet)?;
        Ok(s)
    }

    pub fn spec(&self) -> &SplittingSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn vertex(&self, side: Side) -> &VertexGroup {
        match self.kind {
            SplitKind::Amalgam => &self.vertex[side.index()],
            SplitKind::Hnn => &self.vertex[0],
        }
    }

    pub fn image(&self, i: usize) -> &SubgroupImage {
        &self.images[i]
    }

    pub fn transversal(&self) -> &Transversal {
        &self.transversal
    }

    /// The same splitting with another transversal for its canonical forms.
    pub fn with_transversal(&self, tr: Transversal) -> Result<Splitting> {
        for (i, img) in self.images.iter().enumerate() {
            let side = if i == 0 || self.kind == SplitKind::Hnn { Side::A } else { Side::B };
            img.validate_transversal(self.vertex(side), &tr)?;
        }
        let mut s = self.clone();
        s.transversal = tr.clone();
        s.spec.transversal = tr;
        Ok(s)
    }

    fn stable_name(&self) -> &str {
        self.spec.stable.as_deref().unwrap_or("")
    }

    /// Parses a token list such as `A:a B:c^-1 t^-1`; the side prefix may be
    /// omitted when a name is unambiguous.
    pub fn parse_tokens(&self, text: &str) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        for raw in text.split_whitespace() {
            if raw == "e" || raw == "1" {
                continue;
            }
            if let Some((side, rest)) = raw.split_once(':') {
                let side = match side {
                    "A" => Side::A,
                    "B" if self.kind == SplitKind::Amalgam => Side::B,
                    _ => return Err(Error::Alphabet(format!("bad side in token {raw:?}"))),
                };
                out.push(Token::Vertex(side, self.vertex(side).parse_token(rest)?));
                continue;
            }
            let (base, exp) = match raw.split_once('^') {
                Some((b, k)) => (b, k.parse::<i64>().ok()),
                None => (raw, Some(1)),
            };
            if self.kind == SplitKind::Hnn && base == self.stable_name() {
                let k = exp.ok_or_else(|| Error::Alphabet(format!("bad exponent in {raw:?}")))?;
                for _ in 0..k.unsigned_abs() {
                    out.push(Token::Stable(k < 0));
                }
                continue;
            }
            let sides: &[Side] = match self.kind {
                SplitKind::Amalgam => &[Side::A, Side::B],
                SplitKind::Hnn => &[Side::A],
            };
            let hits: Vec<(Side, VElem)> = sides
                .iter()
                .filter_map(|&s| self.vertex(s).parse_token(raw).ok().map(|v| (s, v)))
                .collect();
            match hits.as_slice() {
                [(s, v)] => out.push(Token::Vertex(*s, v.clone())),
                [] => return Err(Error::Alphabet(format!("unknown token {raw:?}"))),
                _ => {
                    return Err(Error::Alphabet(format!(
                        "token {raw:?} is ambiguous; prefix it with A: or B:"
                    )))
                }
            }
        }
        Ok(out)
    }

    fn parse_map(&self, alphabet: &Alphabet) -> Result<Vec<Vec<Token>>> {
        let mut map: Vec<Option<Vec<Token>>> = vec![None; alphabet.len()];
        for (g, text) in &self.spec.map {
            let i = alphabet
                .lookup(g)
                .ok_or_else(|| Error::Unresolved(format!("map of unknown generator {g:?}")))?;
            map[i as usize] = Some(self.parse_tokens(text)?);
        }
        map.into_iter()
            .enumerate()
            .map(|(i, m)| {
                m.ok_or_else(|| {
                    Error::InvalidSplitting(format!(
                        "{}: generator {} is not mapped",
                        self.name(),
                        alphabet.name(i as u16)
                    ))
                })
            })
            .collect()
    }

    fn resolve_back(&mut self, alphabet: &Alphabet) -> Result<()> {
        let mut given: HashMap<String, Word> = HashMap::new();
        for (name, text) in &self.spec.back {
            given.insert(name.clone(), alphabet.parse_word(text)?);
        }
        // Default: a local name equal to a global generator mapped to that very token.
        let default_for = |name: &str, tok: &Token| -> Option<Word> {
            let g = alphabet.lookup(name)?;
            (self.map[g as usize].as_slice() == std::slice::from_ref(tok))
                .then(|| Word::letter(crate::word::Symbol::pos(g)))
        };
        let sides: Vec<Side> = match self.kind {
            SplitKind::Amalgam => vec![Side::A, Side::B],
            SplitKind::Hnn => vec![Side::A],
        };
        let mut back_free = Vec::new();
        let mut back_finite = Vec::new();
        for &side in &sides {
            let vg = self.vertex(side).clone();
            let mut free = Vec::new();
            let mut finite = Vec::new();
            for f in 0..vg.factor_count() {
                let f16 = f as u16;
                match vg.table(f16) {
                    None => {
                        let FactorSpec::Free(l) = &vg.specs()[f] else { unreachable!() };
                        let tok = Token::Vertex(side, vg.syllable(Syl { factor: f16, val: 1 }));
                        let w = given
                            .get(l)
                            .cloned()
                            .or_else(|| default_for(l, &tok))
                            .ok_or_else(|| {
                                Error::InvalidSplitting(format!(
                                    "{}: no global word for local letter {l:?}",
                                    self.spec.name
                                ))
                            })?;
                        free.push(Some(w));
                        finite.push(Vec::new());
                    }
                    Some(t) => {
                        // Seed with named elements that have a global word, then close up.
                        let mut words: Vec<Option<Word>> = vec![None; t.order()];
                        words[0] = Some(Word::identity());
                        for i in 1..t.order() {
                            let tok = Token::Vertex(side, vg.syllable(Syl { factor: f16, val: i as i64 }));
                            let name = t.name(i).to_string();
                            words[i] = given.get(&name).cloned().or_else(|| default_for(&name, &tok));
                        }
                        let seeds: Vec<(usize, Word)> = words
                            .iter()
                            .enumerate()
                            .filter_map(|(i, w)| w.clone().map(|w| (i, w)))
                            .filter(|(i, _)| *i != 0)
                            .collect();
                        let mut queue: VecDeque<usize> = VecDeque::from([0]);
                        let mut seen = vec![false; t.order()];
                        seen[0] = true;
                        for (i, _) in &seeds {
                            seen[*i] = true;
                            queue.push_back(*i);
                        }
                        while let Some(x) = queue.pop_front() {
                            for (g, gw) in &seeds {
                                let y = t.mul(x, *g);
                                if !seen[y] {
                                    seen[y] = true;
                                    words[y] = Some(words[x].clone().unwrap().mul(gw));
                                    queue.push_back(y);
                                }
                            }
                        }
                        if let Some(i) = seen.iter().position(|s| !s) {
                            return Err(Error::InvalidSplitting(format!(
                                "{}: no global word for local element {:?}",
                                self.spec.name,
                                t.name(i)
                            )));
                        }
                        free.push(None);
                        finite.push(words.into_iter().map(|w| w.unwrap()).collect());
                    }
                }
            }
            back_free.push(free);
            back_finite.push(finite);
        }
        if self.kind == SplitKind::Hnn {
            let name = self.stable_name().to_string();
            let w = given
                .get(&name)
                .cloned()
                .or_else(|| default_for(&name, &Token::Stable(false)))
                .ok_or_else(|| {
                    Error::InvalidSplitting(format!(
                        "{}: no global word for the stable letter",
                        self.spec.name
                    ))
                })?;
            self.back_stable = Some(w);
        }
        self.back_free = back_free;
        self.back_finite = back_finite;
        let known: Vec<String> = sides
            .iter()
            .flat_map(|&s| self.vertex(s).token_names())
            .chain(self.spec.stable.clone())
            .collect();
        if let Some((n, _)) = self.spec.back.iter().find(|(n, _)| !known.contains(n)) {
            return Err(Error::Unresolved(format!("back map names unknown local {n:?}")));
        }
        Ok(())
    }

    /// map(back(ℓ)) must equal ℓ for every named local element.
    fn check_back_inverts_map(&self, _alphabet: &Alphabet) -> Result<()> {
        let sides: &[Side] = match self.kind {
            SplitKind::Amalgam => &[Side::A, Side::B],
            SplitKind::Hnn => &[Side::A],
        };
        let mut checks: Vec<(String, Token)> = Vec::new();
        for &side in sides {
            for (name, syl) in self.vertex(side).named_elements() {
                checks.push((name, Token::Vertex(side, self.vertex(side).syllable(syl))));
            }
        }
        if self.kind == SplitKind::Hnn {
            checks.push((self.stable_name().to_string(), Token::Stable(false)));
        }
        for (name, tok) in checks {
            let via = self.normalize(&self.token_to_global(&tok));
            let direct = self.normalize_tokens(std::slice::from_ref(&tok));
            if via != direct {
                return Err(Error::InvalidSplitting(format!(
                    "{}: the global word given for {name:?} does not map back to it",
                    self.spec.name
                )));
            }
        }
        Ok(())
    }

    fn vertex_index(&self, side: Side) -> usize {
        match self.kind {
            SplitKind::Amalgam => side.index(),
            SplitKind::Hnn => 0,
        }
    }

    pub fn velem_to_global(&self, side: Side, x: &VElem) -> Word {
        let v = self.vertex_index(side);
        let mut out = Word::identity();
        for s in &x.0 {
            let f = s.factor as usize;
            let w = match &self.back_free[v][f] {
                Some(w) => w.pow(s.val),
                None => self.back_finite[v][f][s.val as usize].clone(),
            };
            out = out.mul(&w);
        }
        out
    }

    pub fn token_to_global(&self, t: &Token) -> Word {
        match t {
            Token::Vertex(side, x) => self.velem_to_global(*side, x),
            Token::Stable(inv) => {
                let w = self.back_stable.clone().expect("HNN stable letter");
                if *inv {
                    w.inverse()
                } else {
                    w
                }
            }
        }
    }

    pub fn tokens_to_global(&self, ts: &[Token]) -> Word {
        ts.iter()
            .fold(Word::identity(), |acc, t| acc.mul(&self.token_to_global(t)))
    }

    pub fn invert_tokens(&self, ts: &[Token]) -> Vec<Token> {
        ts.iter()
            .rev()
            .map(|t| match t {
                Token::Vertex(s, x) => Token::Vertex(*s, self.vertex(*s).inv(x)),
                Token::Stable(i) => Token::Stable(!i),
            })
            .collect()
    }

    /// Global word to tokens.
    pub fn word_tokens(&self, w: &Word) -> Vec<Token> {
        let mut out = Vec::new();
        for s in &w.0 {
            let m = &self.map[s.gen as usize];
            if s.inverse {
                out.extend(self.invert_tokens(m));
            } else {
                out.extend(m.iter().cloned());
            }
        }
        out
    }

    /// Edge generators as global words (generators of C, or of C in the HNN case).
    pub fn edge_generators(&self) -> Vec<Word> {
        self.edge_gens[0]
            .iter()
            .map(|x| self.velem_to_global(Side::A, x))
            .collect()
    }

    /// Relators of the splitting's own presentation, as token lists.
    pub fn relators(&self) -> Vec<Vec<Token>> {
        let mut out = Vec::new();
        let sides: &[Side] = match self.kind {
            SplitKind::Amalgam => &[Side::A, Side::B],
            SplitKind::Hnn => &[Side::A],
        };
        for &side in sides {
            let vg = self.vertex(side);
            for f in 0..vg.factor_count() as u16 {
                if let Some(t) = vg.table(f) {
                    for x in 1..t.order() {
                        for y in 1..t.order() {
                            let sx = vg.syllable(Syl { factor: f, val: x as i64 });
                            let sy = vg.syllable(Syl { factor: f, val: y as i64 });
                            let sxy = vg.syllable(Syl { factor: f, val: t.mul(x, y) as i64 });
                            out.push(vec![
                                Token::Vertex(side, sx),
                                Token::Vertex(side, sy),
                                Token::Vertex(side, vg.inv(&sxy)),
                            ]);
                        }
                    }
                }
            }
        }
        for (c, d) in self.edge_gens[0].iter().zip(&self.edge_gens[1]) {
            match self.kind {
                SplitKind::Amalgam => out.push(vec![
                    Token::Vertex(Side::A, c.clone()),
                    Token::Vertex(Side::B, self.vertex(Side::B).inv(d)),
                ]),
                SplitKind::Hnn => out.push(vec![
                    Token::Stable(true),
                    Token::Vertex(Side::A, c.clone()),
                    Token::Stable(false),
                    Token::Vertex(Side::A, self.vertex(Side::A).inv(d)),
                ]),
            }
        }
        out
    }

    /// Image of `c` under the edge isomorphism from image `from` to image `to`.
    pub fn transport(&self, c: &VElem, from: usize, to: usize) -> VElem {
        if from == to || c.is_identity() {
            return c.clone();
        }
        let vf = self.vertex(if from == 0 || self.kind == SplitKind::Hnn { Side::A } else { Side::B });
        let vt = self.vertex(if to == 0 || self.kind == SplitKind::Hnn { Side::A } else { Side::B });
        let w = self.images[from]
            .witness(vf, c)
            .expect("transported element lies in the edge group");
        self.images[to].eval(vt, &w)
    }

    fn decompose(&self, image: usize, y: &VElem) -> (VElem, VElem) {
        let side = if image == 0 || self.kind == SplitKind::Hnn { Side::A } else { Side::B };
        self.images[image].decompose(self.vertex(side), y, &self.transversal)
    }

    pub fn normalize(&self, w: &Word) -> NormalForm {
        self.normalize_tokens(&self.word_tokens(w))
    }

    pub fn normalize_tokens(&self, ts: &[Token]) -> NormalForm {
        self.extend(&self.identity_nf(), ts)
    }

    pub fn identity_nf(&self) -> NormalForm {
        match self.kind {
            SplitKind::Amalgam => NormalForm::Amalgam {
                syllables: Vec::new(),
                edge: VElem::identity(),
            },
            SplitKind::Hnn => NormalForm::Hnn {
                reps: Vec::new(),
                signs: Vec::new(),
                last: VElem::identity(),
                edge: VElem::identity(),
            },
        }
    }

    /// Normal form of `nf·ts`. Only the tail of `nf` is touched.
    pub fn extend(&self, nf: &NormalForm, ts: &[Token]) -> NormalForm {
        match nf.clone() {
            NormalForm::Amalgam { syllables, edge } => self.extend_amalgam(syllables, edge, ts),
            NormalForm::Hnn {
                reps,
                signs,
                last,
                edge,
            } => {
                let x = self.vertex(Side::A).mul(&last, &edge);
                self.extend_hnn(reps, signs, x, ts)
            }
        }
    }

    /// Normal form of `nf·w` for a global word `w`.
    pub fn extend_word(&self, nf: &NormalForm, w: &Word) -> NormalForm {
        self.extend(nf, &self.word_tokens(w))
    }

    fn extend_amalgam(
        &self,
        mut syl: Vec<(Side, VElem)>,
        mut lam: VElem,
        ts: &[Token],
    ) -> NormalForm {
        for t in ts {
            let Token::Vertex(side, x) = t else {
                unreachable!("amalgams have no stable letter")
            };
            let side = *side;
            let vg = self.vertex(side);
            let lam_s = self.transport(&lam, 0, side.index());
            let y = match syl.last() {
                Some((s, _)) if *s == side => {
                    let (_, r) = syl.pop().unwrap();
                    vg.mul(&vg.mul(&r, &lam_s), x)
                }
                _ => vg.mul(&lam_s, x),
            };
            let (rep, c) = self.decompose(side.index(), &y);
            if !rep.is_identity() {
                syl.push((side, rep));
            }
            lam = self.transport(&c, side.index(), 0);
        }
        NormalForm::Amalgam {
            syllables: syl,
            edge: lam,
        }
    }

    fn extend_hnn(
        &self,
        mut reps: Vec<VElem>,
        mut signs: Vec<bool>,
        mut x: VElem,
        ts: &[Token],
    ) -> NormalForm {
        let a = self.vertex(Side::A);
        for t in ts {
            match t {
                Token::Vertex(_, y) => x = a.mul(&x, y),
                Token::Stable(false) => {
                    let (r, c) = self.decompose(0, &x);
                    let phi = self.transport(&c, 0, 1);
                    if signs.last() == Some(&true) && r.is_identity() {
                        signs.pop();
                        let prev = reps.pop().unwrap();
                        x = a.mul(&prev, &phi);
                    } else {
                        reps.push(r);
                        signs.push(false);
                        x = phi;
                    }
                }
                Token::Stable(true) => {
                    let (r, c) = self.decompose(1, &x);
                    let back = self.transport(&c, 1, 0);
                    if signs.last() == Some(&false) && r.is_identity() {
                        signs.pop();
                        let prev = reps.pop().unwrap();
                        x = a.mul(&prev, &back);
                    } else {
                        reps.push(r);
                        signs.push(true);
                        x = back;
                    }
                }
            }
        }
        let (last, edge) = self.decompose(0, &x);
        NormalForm::Hnn {
            reps,
            signs,
            last,
            edge,
        }
    }

    /// Tokens spelling out a normal form.
    pub fn nf_tokens(&self, nf: &NormalForm) -> Vec<Token> {
        let mut out = Vec::new();
        match nf {
            NormalForm::Amalgam { syllables, edge } => {
                for (s, x) in syllables {
                    out.push(Token::Vertex(*s, x.clone()));
                }
                if !edge.is_identity() {
                    out.push(Token::Vertex(Side::A, edge.clone()));
                }
            }
            NormalForm::Hnn {
                reps,
                signs,
                last,
                edge,
            } => {
                for (r, s) in reps.iter().zip(signs) {
                    if !r.is_identity() {
                        out.push(Token::Vertex(Side::A, r.clone()));
                    }
                    out.push(Token::Stable(*s));
                }
                let a = self.vertex(Side::A);
                let tail = a.mul(last, edge);
                if !tail.is_identity() {
                    out.push(Token::Vertex(Side::A, tail));
                }
            }
        }
        out
    }

    /// The element named by a normal form, as a global word.
    pub fn nf_to_global(&self, nf: &NormalForm) -> Word {
        self.tokens_to_global(&self.nf_tokens(nf))
    }

    pub fn fmt_nf(&self, nf: &NormalForm) -> String {
        let parts: Vec<String> = self
            .nf_tokens(nf)
            .iter()
            .map(|t| match t {
                Token::Vertex(s, x) => {
                    let side = match (self.kind, s) {
                        (SplitKind::Hnn, _) => "",
                        (_, Side::A) => "A:",
                        (_, Side::B) => "B:",
                    };
                    format!("{side}[{}]", self.vertex(*s).fmt_elem(x))
                }
                Token::Stable(false) => self.stable_name().to_string(),
                Token::Stable(true) => format!("{}^-1", self.stable_name()),
            })
            .collect();
        if parts.is_empty() {
            "e".into()
        } else {
            parts.join(" ")
        }
    }

    /// `x·g·x⁻¹` in normal form.
    pub fn conjugate_nf(&self, x: &[Token], nf: &NormalForm) -> NormalForm {
        let mut ts = x.to_vec();
        ts.extend(self.nf_tokens(nf));
        ts.extend(self.invert_tokens(x));
        self.normalize_tokens(&ts)
    }

    /// Length of a cyclically reduced conjugate (the translation length in the tree).
    pub fn cyclic_length_nf(&self, nf: &NormalForm) -> usize {
        let mut nf = nf.clone();
        match self.kind {
            SplitKind::Amalgam => loop {
                let NormalForm::Amalgam { syllables, edge } = &nf else { unreachable!() };
                let n = syllables.len();
                if n < 2 {
                    return 0;
                }
                if syllables[0].0 != syllables[n - 1].0 {
                    return n;
                }
                let (s, r) = syllables[n - 1].clone();
                let x = vec![Token::Vertex(s, r), Token::Vertex(Side::A, edge.clone())];
                nf = self.conjugate_nf(&x, &nf);
            },
            SplitKind::Hnn => loop {
                let NormalForm::Hnn { reps, signs, .. } = &nf else { unreachable!() };
                let n = signs.len();
                if n == 0 {
                    return 0;
                }
                let head = vec![Token::Vertex(Side::A, self.vertex(Side::A).inv(&reps[0]))];
                let eps = signs[0];
                let rotated = self.conjugate_nf(&head, &nf);
                let turned = self.conjugate_nf(&[Token::Stable(!eps)], &rotated);
                if turned.length() >= n {
                    return n;
                }
                nf = turned;
            },
        }
    }

    pub fn cyclic_length(&self, w: &Word) -> usize {
        self.cyclic_length_nf(&self.normalize(w))
    }

    /// First-letter membership in the standard set X.
    pub fn in_standard_nf(&self, nf: &NormalForm) -> bool {
        match nf {
            NormalForm::Amalgam { syllables, .. } => {
                syllables.first().is_some_and(|(s, _)| *s == Side::A)
            }
            NormalForm::Hnn { reps, signs, .. } => {
                !signs.is_empty() && !signs[0] && reps[0].is_identity()
            }
        }
    }

    pub fn in_standard_set(&self, w: &Word) -> bool {
        self.in_standard_nf(&self.normalize(w))
    }
}

/// The two edge images must be isomorphic via the generator correspondence.
fn check_isomorphic(
    images: &[SubgroupImage; 2],
    va: &VertexGroup,
    vb: &VertexGroup,
    ea: &[VElem],
    eb: &[VElem],
) -> std::result::Result<(), String> {
    match (&images[0], &images[1]) {
        (SubgroupImage::Trivial, SubgroupImage::Trivial) => Ok(()),
        (SubgroupImage::Free { aut: a, .. }, SubgroupImage::Free { aut: b, .. }) => {
            if a.is_free_basis() && b.is_free_basis() && ea.iter().all(|x| !x.is_identity()) {
                Ok(())
            } else {
                Err("edge generators must be free bases on both sides".into())
            }
        }
        (
            SubgroupImage::Finite { members: ma, .. },
            SubgroupImage::Finite { members: mb, .. },
        ) => {
            if ma.len() != mb.len() {
                return Err("edge images have different orders".into());
            }
            // Well defined and injective: pair up elements along words.
            let (ia, ib) = (&images[0], &images[1]);
            let mut pairs: HashMap<VElem, VElem> = HashMap::new();
            for &m in ma {
                let x = va.syllable(Syl {
                    factor: ea.iter().find(|g| !g.is_identity()).unwrap().0[0].factor,
                    val: m as i64,
                });
                let w = ia.witness(va, &x).unwrap();
                pairs.insert(x, ib.eval(vb, &w));
            }
            let mut targets: Vec<&VElem> = pairs.values().collect();
            targets.sort();
            targets.dedup();
            if targets.len() != pairs.len() {
                return Err("edge correspondence is not injective".into());
            }
            for (x, fx) in &pairs {
                for (y, fy) in &pairs {
                    if pairs.get(&va.mul(x, y)) != Some(&vb.mul(fx, fy)) {
                        return Err("edge correspondence is not a homomorphism".into());
                    }
                }
            }
            let _ = eb;
            Ok(())
        }
        _ => Err("edge images are of different types".into()),
    }
}
