use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `α ∈ ℕⁿ` standing for `x₁^α₁ ⋯ xₙ^αₙ`.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// vectors compared lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, index: usize) -> Self {
        let mut e = vec![0; dim];
        e[index] = 1;
        Monomial(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Sum of exponents over the given variable indices.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        vars.iter().map(|&i| self.0[i]).sum()
    }

    /// Product `x^α · x^β`.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.dim(), other.dim());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^α / x_i`, or `None` when `α_i = 0`.
    pub fn div_var(&self, index: usize) -> Option<Monomial> {
        if self.0[index] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[index] -= 1;
        Some(Monomial(e))
    }

    /// Tuple form `(2,1,0)` used as moment-table keys.
    pub fn to_tuple_string(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        format!("({})", parts.join(","))
    }

    /// Parses `"(2,1,0)"` or `"2,1,0"`.
    pub fn parse_tuple(src: &str) -> Option<Monomial> {
        let s = src.trim();
        let s = s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(s);
        if s.trim().is_empty() {
            return None;
        }
        s.split(',')
            .map(|p| p.trim().parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    /// Human-readable form such as `x1^2*x2`, `1` for the empty monomial.
    pub fn display_with<'a>(&'a self, vars: &'a [String]) -> impl fmt::Display + 'a {
        MonomialDisplay { mono: self, vars }
    }
}

struct MonomialDisplay<'a> {
    mono: &'a Monomial,
    vars: &'a [String],
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.mono.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(&self.vars[i])?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tuple_string())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tuple_string())
    }
}

impl From<Vec<u32>> for Monomial {
    fn from(v: Vec<u32>) -> Self {
        Monomial(v)
    }
}

impl<const N: usize> From<[u32; N]> for Monomial {
    fn from(v: [u32; N]) -> Self {
        Monomial(v.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let a = Monomial::from([0, 2]);
        let b = Monomial::from([1, 1]);
        let c = Monomial::from([3, 0]);
        let d = Monomial::from([2, 0]);
        assert!(a < b);
        assert!(b < d);
        assert!(d < c);
        assert!(Monomial::one(2) < Monomial::from([0, 1]));
    }

    #[test]
    fn tuple_round_trip() {
        let m = Monomial::from([2, 0, 11]);
        assert_eq!(m.to_tuple_string(), "(2,0,11)");
        assert_eq!(Monomial::parse_tuple("(2, 0,11)"), Some(m.clone()));
        assert_eq!(Monomial::parse_tuple("2,0,11"), Some(m));
        assert_eq!(Monomial::parse_tuple("(1,-1)"), None);
        assert_eq!(Monomial::parse_tuple("()"), None);
    }

    #[test]
    fn display_uses_names() {
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(Monomial::from([2, 1]).display_with(&names).to_string(), "x^2*y");
        assert_eq!(Monomial::one(2).display_with(&names).to_string(), "1");
    }
}
