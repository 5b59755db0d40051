//! Words over a finite alphabet of generators and their formal inverses.
//!
//! A [`Word`] is the common currency for group elements. Free reduction is
//! purely syntactic; evaluation in a particular group is done elsewhere.
//! Shortlex order ranks all positive letters (in declaration order) before
//! all inverse letters.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub gen: u16,
    pub inverse: bool,
}

impl Symbol {
    pub const fn new(gen: u16, inverse: bool) -> Self {
        Symbol { gen, inverse }
    }

    pub const fn pos(gen: u16) -> Self {
        Symbol { gen, inverse: false }
    }

    pub const fn inv(self) -> Self {
        Symbol {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    /// Rank in shortlex order for an alphabet of `n` generators.
    pub fn rank(self, n: usize) -> usize {
        self.gen as usize + if self.inverse { n } else { 0 }
    }
}

/// An ordered sequence of symbols. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(s: Symbol) -> Self {
        Word(vec![s])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|s| s.inv()).collect())
    }

    /// Concatenation followed by free reduction at the seam only.
    ///
    /// Both operands are assumed freely reduced; the result then is too.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &s in &other.0 {
            if out.last() == Some(&s.inv()) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        Word(out)
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn commutator(x: &Word, y: &Word) -> Word {
        x.mul(y).mul(&x.inverse()).mul(&y.inverse())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }
}

/// Unique freely reduced representative of `w`.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Symbol> = Vec::with_capacity(w.len());
    for &s in &w.0 {
        if out.last() == Some(&s.inv()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    Word(out)
}

/// Shortlex comparison for an alphabet with `n` generators.
pub fn shortlex_cmp(a: &Word, b: &Word, n: usize) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.0.iter()
            .map(|s| s.rank(n))
            .cmp(b.0.iter().map(|s| s.rank(n)))
    })
}

/// Named generators. Index order is the shortlex order of positive letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u16>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut index = HashMap::new();
        let mut out = Vec::new();
        for n in names {
            let n = n.as_ref();
            if !is_identifier(n) {
                return Err(Error::Alphabet(format!("invalid generator name {n:?}")));
            }
            if index.insert(n.to_string(), out.len() as u16).is_some() {
                return Err(Error::Alphabet(format!("duplicate generator {n:?}")));
            }
            out.push(n.to_string());
        }
        Ok(Alphabet { names: out, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, gen: u16) -> &str {
        &self.names[gen as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<u16> {
        self.index.get(name).copied()
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.lookup(name)
            .map(Symbol::pos)
            .ok_or_else(|| Error::Alphabet(format!("unknown symbol {name:?}")))
    }

    /// All letters in shortlex order.
    pub fn letters(&self) -> Vec<Symbol> {
        let n = self.names.len() as u16;
        (0..n)
            .map(Symbol::pos)
            .chain((0..n).map(|g| Symbol::new(g, true)))
            .collect()
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.0.iter().all(|s| (s.gen as usize) < self.names.len())
    }

    /// Validates the alphabet of `w` and freely reduces it.
    pub fn reduce(&self, w: &Word) -> Result<Word> {
        if let Some(s) = w.0.iter().find(|s| (s.gen as usize) >= self.names.len()) {
            return Err(Error::Alphabet(format!("unknown symbol index {}", s.gen)));
        }
        Ok(free_reduce(w))
    }

    pub fn cmp(&self, a: &Word, b: &Word) -> Ordering {
        shortlex_cmp(a, b, self.names.len())
    }

    /// Parses the word grammar:
    ///
    /// ```text
    /// word  := atom (sep atom)*      sep is whitespace, '*' or '·'
    /// atom  := name ('^' int)? | '[' word ',' word ']' ('^' int)? | 'e' | '1'
    /// ```
    ///
    /// `e` denotes the identity unless it is itself a generator name.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut p = WordParser {
            alpha: self,
            chars: text.chars().collect(),
            pos: 0,
        };
        let w = p.word()?;
        p.skip_sep();
        if p.pos != p.chars.len() {
            return Err(Error::Syntax {
                line: 0,
                msg: format!("unexpected {:?} in word {text:?}", p.chars[p.pos]),
            });
        }
        Ok(w)
    }

    /// Parses a comma separated list of words (commas inside brackets do not split).
    pub fn parse_word_list(&self, text: &str) -> Result<Vec<Word>> {
        split_top_level(text)
            .into_iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| self.parse_word(s.trim()))
            .collect()
    }

    pub fn fmt_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        let syms = &w.0;
        while i < syms.len() {
            let s = syms[i];
            let mut j = i;
            while j < syms.len() && syms[j] == s {
                j += 1;
            }
            let k = (j - i) as i64 * if s.inverse { -1 } else { 1 };
            let name = self.name(s.gen);
            parts.push(if k == 1 {
                name.to_string()
            } else {
                format!("{name}^{k}")
            });
            i = j;
        }
        parts.join(" ")
    }
}

impl Alphabet {
    /// Rebuilds the lookup index (needed after deserialization).
    pub fn reindexed(self) -> Result<Self> {
        Alphabet::new(&self.names)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut it = s.chars();
    match it.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    it.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Splits on commas at bracket depth zero.
pub(crate) fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

struct WordParser<'a> {
    alpha: &'a Alphabet,
    chars: Vec<char>,
    pos: usize,
}

impl WordParser<'_> {
    fn err(&self, msg: String) -> Error {
        Error::Syntax { line: 0, msg }
    }

    fn skip_sep(&mut self) {
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_whitespace() || c == '*' || c == '·' || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn word(&mut self) -> Result<Word> {
        let mut w = Word::identity();
        loop {
            self.skip_sep();
            match self.peek() {
                None | Some(',') | Some(']') => return Ok(w),
                _ => {
                    let a = self.atom()?;
                    w = w.mul(&a);
                }
            }
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<i64>()
            .map_err(|_| self.err(format!("bad exponent {s:?}")))
    }

    fn atom(&mut self) -> Result<Word> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let x = self.word()?;
                if self.peek() != Some(',') {
                    return Err(self.err("expected ',' in commutator".into()));
                }
                self.pos += 1;
                let y = self.word()?;
                if self.peek() != Some(']') {
                    return Err(self.err("expected ']' closing commutator".into()));
                }
                self.pos += 1;
                let k = self.exponent()?;
                Ok(Word::commutator(&x, &y).pow(k))
            }
            Some(c) if c.is_alphanumeric() || c == '_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_' || c == '\'')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let k = self.exponent()?;
                let base = match self.alpha.lookup(&name) {
                    Some(g) => Word::letter(Symbol::pos(g)),
                    None if name == "e" || name == "1" => Word::identity(),
                    None => return Err(Error::Alphabet(format!("unknown symbol {name:?}"))),
                };
                Ok(base.pow(k))
            }
            Some(c) => Err(self.err(format!("unexpected {c:?}"))),
            None => Err(self.err("unexpected end of word".into())),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}{}", self.gen, if self.inverse { "^-1" } else { "" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&["a", "b"]).unwrap()
    }

    #[test]
    fn cancellation() {
        let al = ab();
        let w = Word(vec![Symbol::pos(0), Symbol::new(0, true)]);
        assert!(free_reduce(&w).is_empty());
        let w = al.parse_word("a b b^-1 a").unwrap();
        assert_eq!(w, al.parse_word("a^2").unwrap());
        assert!(free_reduce(&Word::identity()).is_empty());
    }

    #[test]
    fn unknown_symbol_is_an_alphabet_error() {
        let al = ab();
        assert!(matches!(al.parse_word("a z"), Err(Error::Alphabet(_))));
        let w = Word(vec![Symbol::pos(7)]);
        assert!(matches!(al.reduce(&w), Err(Error::Alphabet(_))));
    }

    #[test]
    fn commutator_syntax() {
        let al = ab();
        let w = al.parse_word("[a,b]").unwrap();
        assert_eq!(al.fmt_word(&w), "a b a^-1 b^-1");
        let w = al.parse_word("[a, b^2]^-1").unwrap();
        assert_eq!(al.fmt_word(&w), "b^2 a b^-2 a^-1");
    }

    #[test]
    fn shortlex_ranks_inverses_last() {
        let al = ab();
        let a_inv = al.parse_word("a^-1").unwrap();
        let b = al.parse_word("b").unwrap();
        assert_eq!(al.cmp(&b, &a_inv), Ordering::Less);
        let aa = al.parse_word("a a").unwrap();
        assert_eq!(al.cmp(&b, &aa), Ordering::Less);
    }

    #[test]
    fn list_splitting_respects_brackets() {
        let al = ab();
        let ws = al.parse_word_list("[a,b], a b a^-1").unwrap();
        assert_eq!(ws.len(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word() -> impl Strategy<Value = Word> {
            proptest::collection::vec((0u16..3, any::<bool>()), 0..16)
                .prop_map(|v| Word(v.into_iter().map(|(g, i)| Symbol::new(g, i)).collect()))
        }

        proptest! {
            #[test]
            fn reduce_is_idempotent_and_shortening(w in word()) {
                let r = free_reduce(&w);
                prop_assert!(r.len() <= w.len());
                prop_assert!(r.is_reduced());
                prop_assert_eq!(free_reduce(&r), r.clone());
                prop_assert!(r.mul(&r.inverse()).is_empty());
            }
        }
    }
}
