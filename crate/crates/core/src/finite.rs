//! Finite groups given by multiplication tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite group by Cayley table. Index 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteGroupTable {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroupTable {
    /// Builds and exhaustively validates a table.
    pub fn new(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty group".into()));
        }
        if mul.len() != n || mul.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidTable("table is not square".into()));
        }
        if mul.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidTable("entry out of range".into()));
        }
        for x in 0..n {
            if mul[0][x] != x || mul[x][0] != x {
                return Err(Error::InvalidTable("index 0 is not the identity".into()));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if mul[mul[x][y]][z] != mul[x][mul[y][z]] {
                        return Err(Error::InvalidTable(format!(
                            "not associative at ({x},{y},{z})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for x in 0..n {
            match (0..n).find(|&y| mul[x][y] == 0 && mul[y][x] == 0) {
                Some(y) => inv[x] = y,
                None => return Err(Error::InvalidTable(format!("element {x} has no inverse"))),
            }
        }
        Ok(FiniteGroupTable { mul, inv, names })
    }

    /// Z/n with elements e, x, x^2, ...
    pub fn cyclic(letter: &str, n: usize) -> Self {
        let names = (0..n)
            .map(|k| match k {
                0 => "e".to_string(),
                1 => letter.to_string(),
                _ => format!("{letter}^{k}"),
            })
            .collect();
        let mul = (0..n)
            .map(|x| (0..n).map(|y| (x + y) % n).collect())
            .collect();
        FiniteGroupTable::new(names, mul).expect("cyclic table is a group")
    }

    /// Z/2 x Z/2 on letters x, y: elements e, x, y, xy.
    pub fn klein(x: &str, y: &str) -> Self {
        let names = vec!["e".into(), x.into(), y.into(), format!("{x}{y}")];
        let mul = (0..4)
            .map(|a| (0..4).map(|b| a ^ b).collect())
            .collect();
        FiniteGroupTable::new(names, mul).expect("klein table is a group")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    fn check(&self, x: usize) -> Result<()> {
        if x < self.order() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: x,
                order: self.order(),
            })
        }
    }

    /// Checked product.
    pub fn finite_mul(&self, x: usize, y: usize) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul[x][y])
    }

    /// Unchecked product for validated indices.
    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x][y]
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inv[x]
    }

    pub fn pow(&self, x: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv[x] } else { x };
        (0..k.unsigned_abs()).fold(0, |acc, _| self.mul[acc][base])
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut y = x;
        let mut k = 1;
        while y != 0 {
            y = self.mul[y][x];
            k += 1;
        }
        k
    }

    /// Subgroup generated by `gens`, as a sorted index list.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul[x][g];
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.order()).filter(|&x| seen[x]).collect()
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_arithmetic() {
        let z3 = FiniteGroupTable::cyclic("t", 3);
        assert_eq!(z3.finite_mul(1, 1).unwrap(), 2);
        assert_eq!(z3.name(2), "t^2");
        assert_eq!(z3.finite_mul(1, 2).unwrap(), 0);
        let z2 = FiniteGroupTable::cyclic("s", 2);
        assert_eq!(z2.finite_mul(1, 1).unwrap(), 0);
    }

    #[test]
    fn index_out_of_range() {
        let z2 = FiniteGroupTable::cyclic("s", 2);
        assert_eq!(
            z2.finite_mul(0, 2),
            Err(Error::IndexOutOfRange { index: 2, order: 2 })
        );
    }

    #[test]
    fn rejects_non_groups() {
        let names: Vec<String> = vec!["e".into(), "x".into()];
        let bad = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroupTable::new(names.clone(), bad).is_err());
        let not_identity = vec![vec![1, 0], vec![0, 1]];
        assert!(FiniteGroupTable::new(names, not_identity).is_err());
    }

    #[test]
    fn klein_is_exponent_two() {
        let k = FiniteGroupTable::klein("x", "y");
        assert!((1..4).all(|a| k.element_order(a) == 2));
        assert_eq!(k.closure(&[1]), vec![0, 1]);
        assert_eq!(k.closure(&[1, 2]).len(), 4);
    }
}
