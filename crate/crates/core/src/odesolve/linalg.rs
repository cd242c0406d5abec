//! Dense exact linear algebra over ℚ and univariate rational polynomials.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::rational::{format_rational, to_f64};
use crate::poly::Rational;

pub type RatMatrix = Vec<Vec<Rational>>;

pub fn zeros(rows: usize, cols: usize) -> RatMatrix {
    vec![vec![Rational::zero(); cols]; rows]
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = zeros(n, m);
    for (i, row) in a.iter().enumerate() {
        for (k, aik) in row.iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !bkj.is_zero() {
                    out[i][j] += aik * bkj;
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(x, y)| !x.is_zero() && !y.is_zero())
                .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

/// `a − λI`.
pub fn shift(a: &RatMatrix, lambda: &Rational) -> RatMatrix {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    out
}

pub fn identity(n: usize) -> RatMatrix {
    let mut out = zeros(n, n);
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    out
}

pub fn mat_pow(a: &RatMatrix, e: usize) -> RatMatrix {
    let mut acc = identity(a.len());
    for _ in 0..e {
        acc = mat_mul(&acc, a);
    }
    acc
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut RatMatrix, cols: usize) -> Vec<usize> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right null space.
pub fn nullspace(a: &RatMatrix) -> Vec<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m = a.clone();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `a x = b` (free variables set to zero), or `None` if inconsistent.
pub fn solve_any(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: RatMatrix = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    let pivots = rref(&mut m, cols);
    if m.iter().skip(pivots.len()).any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = m[r][cols].clone();
    }
    Some(x)
}

/// Characteristic polynomial `det(xI − a)` via similarity reduction to
/// upper Hessenberg form.
pub fn charpoly(a: &RatMatrix) -> UniPoly {
    let n = a.len();
    let mut h = a.clone();
    for m in 1..n.saturating_sub(1) {
        let Some(i) = (m..n).find(|&i| !h[i][m - 1].is_zero()) else { continue };
        if i != m {
            h.swap(i, m);
            for row in h.iter_mut() {
                row.swap(i, m);
            }
        }
        let pivot = h[m][m - 1].clone();
        for i in (m + 1)..n {
            if h[i][m - 1].is_zero() {
                continue;
            }
            let u = &h[i][m - 1] / &pivot;
            let row_m = h[m].clone();
            for (x, y) in h[i].iter_mut().zip(&row_m) {
                if !y.is_zero() {
                    *x -= &u * y;
                }
            }
            for row in h.iter_mut() {
                if !row[i].is_zero() {
                    let add = &u * &row[i];
                    row[m] += add;
                }
            }
        }
    }
    // p_0 = 1; p_m = (x − h_mm) p_{m−1} − Σ_{i<m} h_im (Π_{j=i+1}^{m} h_{j,j−1}) p_{i−1}
    let mut p: Vec<UniPoly> = vec![UniPoly::one()];
    for m in 0..n {
        let mut next = p[m].mul_linear(&h[m][m]);
        let mut prod = Rational::one();
        for i in (0..m).rev() {
            prod *= &h[i + 1][i];
            if prod.is_zero() {
                break;
            }
            let k = &h[i][m] * &prod;
            if !k.is_zero() {
                next = next.sub(&p[i].scale(&k));
            }
        }
        p.push(next);
    }
    p.pop().expect("non-empty")
}

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UniPoly(Vec<Rational>);

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly(coeffs)
    }

    pub fn one() -> Self {
        UniPoly(vec![Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    /// `self · (x − r)`.
    pub fn mul_linear(&self, r: &Rational) -> Self {
        let mut out = vec![Rational::zero(); self.0.len() + 1];
        for (i, c) in self.0.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= c * r;
        }
        UniPoly::new(out)
    }

    pub fn mul(&self, other: &UniPoly) -> Self {
        if self.0.is_empty() || other.0.is_empty() {
            return UniPoly::default();
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn sub(&self, other: &UniPoly) -> Self {
        let n = self.0.len().max(other.0.len());
        let get = |v: &[Rational], i: usize| v.get(i).cloned().unwrap_or_else(Rational::zero);
        UniPoly::new((0..n).map(|i| get(&self.0, i) - get(&other.0, i)).collect())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        UniPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Quotient by `(x − r)`; `r` must be a root.
    pub fn deflate(&self, r: &Rational) -> Self {
        let n = self.0.len();
        let mut q = vec![Rational::zero(); n.saturating_sub(1)];
        let mut carry = Rational::zero();
        for i in (1..n).rev() {
            carry = &self.0[i] + carry * r;
            q[i - 1] = carry.clone();
        }
        UniPoly::new(q)
    }

    pub fn monic(&self) -> Self {
        match self.0.last() {
            Some(lead) if !lead.is_zero() => self.scale(&lead.recip()),
            _ => self.clone(),
        }
    }

    /// Integer coefficients with content 1 and positive leading coefficient.
    fn primitive_integer(&self) -> Vec<BigInt> {
        let lcm = self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().is_some_and(|c| c.is_negative()) { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| &c / &g * &sign).collect()
    }

    /// Complex roots in floating point (companion-matrix eigenvalues, Newton-polished).
    pub fn roots_f64(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let monic = self.monic();
        let c: Vec<f64> = monic.0.iter().map(to_f64).collect();
        let mut comp = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            comp[(i, d - 1)] = -c[i];
        }
        let eig = comp.complex_eigenvalues();
        eig.iter().map(|&z| newton_polish(&c, z)).collect()
    }

    pub fn display_in<'a>(&'a self, var: &'a str) -> impl fmt::Display + 'a {
        UniDisplay { poly: self, var }
    }
}

fn newton_polish(monic: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

struct UniDisplay<'a> {
    poly: &'a UniPoly,
    var: &'a str,
}

impl fmt::Display for UniDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.poly.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mag = c.abs();
            let var = match d {
                0 => String::new(),
                1 => self.var.to_string(),
                _ => format!("{}^{d}", self.var),
            };
            if var.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&var)?;
            } else {
                write!(f, "{}*{var}", format_rational(&mag))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_in("x"))
    }
}

/// Rational roots with multiplicities, and the cofactor with no rational roots.
#[derive(Debug, Clone)]
pub struct RationalFactorization {
    pub roots: Vec<(Rational, usize)>,
    pub remainder: UniPoly,
}

const MAX_FACTOR: u64 = 1_000_000_000_000;
const MAX_CANDIDATES: usize = 200_000;

fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > MAX_FACTOR {
        return None;
    }
    let mut primes: Vec<(u64, u32)> = Vec::new();
    let mut rest = n;
    let mut p = 2;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            primes.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        primes.push((rest, 1));
    }
    let mut divs = vec![1u64];
    for (p, e) in primes {
        let cur = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divs.extend(cur.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    Some(divs)
}

/// Finds all rational roots of `p` exactly (rational root theorem), using
/// `hints` (approximate roots) when the coefficients are too large to factor.
pub fn rational_roots(p: &UniPoly, hints: &[Complex64]) -> RationalFactorization {
    let mut rest = p.clone();
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let mut record = |r: Rational, rest: &mut UniPoly| {
        let mut mult = 0;
        while !rest.is_constant() && rest.eval(&r).is_zero() {
            *rest = rest.deflate(&r);
            mult += 1;
        }
        if mult > 0 {
            roots.push((r, mult));
        }
    };
    record(Rational::zero(), &mut rest);
    if rest.is_constant() {
        return RationalFactorization { roots, remainder: rest };
    }
    if rest.degree() == 1 {
        let c = &rest.0;
        record(-&c[0] / &c[1], &mut rest);
        return RationalFactorization { roots, remainder: rest };
    }

    let ints = rest.primitive_integer();
    let lead = ints.last().expect("non-constant").clone();
    let tail = ints[0].clone();
    let lead_divs = small_divisors(&lead);
    let tail_divs = small_divisors(&tail);

    let mut candidates: BTreeSet<Rational> = BTreeSet::new();
    if let (Some(ld), Some(td)) = (&lead_divs, &tail_divs) {
        if ld.len() * td.len() * 2 <= MAX_CANDIDATES {
            for &q in ld {
                for &num in td {
                    let r = Rational::new(BigInt::from(num), BigInt::from(q));
                    candidates.insert(-r.clone());
                    candidates.insert(r);
                }
            }
        }
    }
    if candidates.is_empty() {
        let denominators: Vec<u64> = lead_divs.unwrap_or_else(|| (1..=64).collect());
        for z in hints {
            if !z.re.is_finite() {
                continue;
            }
            for &q in &denominators {
                let centre = (z.re * q as f64).round();
                if centre.abs() > 1e15 {
                    continue;
                }
                for off in [-1.0, 0.0, 1.0] {
                    let num = BigInt::from((centre + off) as i64);
                    candidates.insert(Rational::new(num, BigInt::from(q)));
                }
            }
        }
    }
    // Cheap integer evaluation filter before exact deflation.
    for r in candidates {
        if rest.is_constant() {
            break;
        }
        if int_root(&ints, &r) {
            record(r, &mut rest);
        }
    }
    RationalFactorization { roots, remainder: rest.monic() }
}

/// `Σ a_i p^i q^{n−i} = 0` for `r = p/q`.
fn int_root(ints: &[BigInt], r: &Rational) -> bool {
    let p = r.numer();
    let q = r.denom();
    let n = ints.len() - 1;
    let mut acc = BigInt::zero();
    let mut qpow = BigInt::one();
    let mut terms = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        terms.push(qpow.clone());
        qpow *= q;
    }
    // Horner in p with the q powers folded in.
    for (i, a) in ints.iter().enumerate().rev() {
        acc = acc * p + a * &terms[n - i] / &terms[0];
    }
    acc.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    fn leibniz_det(a: &RatMatrix) -> Rational {
        // Cofactor expansion: independent of the Hessenberg path.
        let n = a.len();
        if n == 0 {
            return int(1);
        }
        let mut acc = int(0);
        for j in 0..n {
            if a[0][j].is_zero() {
                continue;
            }
            let minor: RatMatrix = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &a[0][j] * leibniz_det(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn charpoly_matches_determinant_oracle() {
        let a = m(&[&[-3, 2, 0, 1], &[1, -4, 1, 0], &[0, 2, -3, 5], &[7, 0, 1, 2]]);
        let p = charpoly(&a);
        assert_eq!(p.degree(), 4);
        for x in [-3i64, -1, 0, 2, 5] {
            let shifted: RatMatrix = shift(&a, &int(x)).iter().map(|r| r.iter().map(|v| -v).collect()).collect();
            assert_eq!(p.eval(&int(x)), leibniz_det(&shifted), "x = {x}");
        }
    }

    #[test]
    fn consensus_block_factor() {
        let a = m(&[&[-3, 2, 0], &[1, -4, 1], &[0, 2, -3]]);
        let p = charpoly(&a);
        let f = rational_roots(&p, &[]);
        assert_eq!(f.roots, vec![(int(-3), 1)]);
        assert_eq!(f.remainder, UniPoly::new(vec![int(8), int(7), int(1)]));
        assert_eq!(f.remainder.display_in("t").to_string(), "t^2 + 7*t + 8");
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (x + 1/2)^3 (x - 4) x^2
        let mut p = UniPoly::one();
        for _ in 0..3 {
            p = p.mul_linear(&rat(-1, 2));
        }
        p = p.mul_linear(&int(4)).mul_linear(&int(0)).mul_linear(&int(0));
        let f = rational_roots(&p, &[]);
        let mut roots = f.roots.clone();
        roots.sort();
        assert_eq!(roots, vec![(rat(-1, 2), 3), (int(0), 2), (int(4), 1)]);
        assert!(f.remainder.is_constant());
    }

    #[test]
    fn hints_find_roots_of_large_polynomials() {
        let mut p = UniPoly::one();
        for r in [rat(-7, 10), rat(-12, 5), int(-1000003), rat(-999983, 7)] {
            p = p.mul_linear(&r).mul_linear(&r);
        }
        let hints = vec![
            Complex64::new(-0.7, 1e-5),
            Complex64::new(-2.4, 0.0),
            Complex64::new(-1000003.0, 0.0),
            Complex64::new(-999983.0 / 7.0, 0.0),
        ];
        let f = rational_roots(&p, &hints);
        assert!(f.remainder.is_constant(), "remainder {:?}", f.remainder);
        assert_eq!(f.roots.iter().map(|r| r.1).sum::<usize>(), 8);
    }

    #[test]
    fn nullspace_and_solve() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&a, v).iter().all(Zero::is_zero));
        }
        let x = solve_any(&a, &[int(6), int(12)]).unwrap();
        assert_eq!(mat_vec(&a, &x), vec![int(6), int(12)]);
        assert!(solve_any(&a, &[int(1), int(1)]).is_none());
    }

    #[test]
    fn float_roots_of_quadratic() {
        let p = UniPoly::new(vec![int(8), int(7), int(1)]);
        let mut roots: Vec<f64> = p.roots_f64().iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        let s = 17f64.sqrt();
        assert!((roots[0] - (-7.0 - s) / 2.0).abs() < 1e-13);
        assert!((roots[1] - (-7.0 + s) / 2.0).abs() < 1e-13);
    }
}
