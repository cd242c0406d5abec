//! Exact solution of `m' = Ã m` when the spectrum of `Ã` is rational.
//!
//! `Ã` is block triangular along the strongly connected components of its
//! sparsity graph. Components are solved sink-first; each one is a small
//! linear system forced by exponential polynomials from the components it
//! reads, solved by an undetermined-coefficient ansatz plus a homogeneous part
//! built from exact generalized eigenspaces of the diagonal block.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::linalg::{
    charpoly, mat_vec, nullspace, rational_roots, shift, solve_any, zeros, RatMatrix, RationalFactorization, UniPoly,
};
use super::Unsupported;
use crate::poly::rational::to_f64;
use crate::poly::Rational;
use crate::scc::tarjan;

/// `Σ_λ (Σ_d c[λ][d] t^d) e^{λt}` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPoly {
    terms: BTreeMap<Rational, Vec<Rational>>,
}

impl ExpPoly {
    pub fn constant(c: Rational) -> Self {
        let mut out = ExpPoly::default();
        out.add_term(Rational::zero(), 0, c);
        out
    }

    pub fn terms(&self) -> &BTreeMap<Rational, Vec<Rational>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, lambda: Rational, degree: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let coeffs = self.terms.entry(lambda.clone()).or_default();
        if coeffs.len() <= degree {
            coeffs.resize(degree + 1, Rational::zero());
        }
        coeffs[degree] += c;
        trim(coeffs);
        if coeffs.is_empty() {
            self.terms.remove(&lambda);
        }
    }

    pub fn add_scaled(&mut self, other: &ExpPoly, k: &Rational) {
        if k.is_zero() {
            return;
        }
        for (lambda, coeffs) in &other.terms {
            for (d, c) in coeffs.iter().enumerate() {
                self.add_term(lambda.clone(), d, c * k);
            }
        }
    }

    /// `d/dt`: `(p e^{λt})' = (p' + λp) e^{λt}`.
    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::default();
        for (lambda, coeffs) in &self.terms {
            for (d, c) in coeffs.iter().enumerate() {
                out.add_term(lambda.clone(), d, lambda * c);
                if d > 0 {
                    out.add_term(lambda.clone(), d - 1, c * Rational::from_integer(d.into()));
                }
            }
        }
        out
    }

    pub fn at_zero(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + &c[0])
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(lambda, coeffs)| {
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + to_f64(c));
                p * (to_f64(lambda) * t).exp()
            })
            .sum()
    }
}

fn trim(v: &mut Vec<Rational>) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

/// Diagonal block of `Ã` for one strongly connected component.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub indices: Vec<usize>,
    pub charpoly: UniPoly,
    pub factorization: RationalFactorization,
}

pub(crate) fn sub_matrix(a: &[Vec<Rational>], idx: &[usize]) -> RatMatrix {
    idx.iter().map(|&r| idx.iter().map(|&c| a[r][c].clone()).collect()).collect()
}

/// Components of `Ã` in dependency order (a component only reads earlier ones),
/// each with its exact characteristic polynomial and rational roots.
pub fn block_spectra(a: &[Vec<Rational>]) -> Vec<BlockSpectrum> {
    let adj: Vec<Vec<usize>> =
        a.iter().map(|row| row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, _)| j).collect()).collect();
    tarjan(&adj)
        .into_iter()
        .map(|indices| {
            let block = sub_matrix(a, &indices);
            let charpoly = charpoly(&block);
            let hints = if indices.len() > 2 { numeric_eigenvalues(&block) } else { Vec::new() };
            let factorization = rational_roots(&charpoly, &hints);
            BlockSpectrum { indices, charpoly, factorization }
        })
        .collect()
}

fn numeric_eigenvalues(block: &RatMatrix) -> Vec<Complex64> {
    let n = block.len();
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(&block[i][j]));
    m.complex_eigenvalues().iter().copied().collect()
}

/// Product of the parts of the characteristic polynomial without rational roots.
pub fn irrational_factor(spectra: &[BlockSpectrum]) -> UniPoly {
    spectra.iter().fold(UniPoly::one(), |acc, b| acc.mul(&b.factorization.remainder)).monic()
}

/// Exact solution of every component of `m' = Ã m`, `m(0) = state0`.
pub fn solve_exact(a: &[Vec<Rational>], state0: &[Rational]) -> Result<Vec<ExpPoly>, Unsupported> {
    let spectra = block_spectra(a);
    let factor = irrational_factor(&spectra);
    if !factor.is_constant() {
        return Err(Unsupported::IrrationalSpectrum { factor });
    }
    let mut solution: Vec<Option<ExpPoly>> = vec![None; a.len()];
    for block in &spectra {
        let idx = &block.indices;
        let mut forcing: Vec<ExpPoly> = vec![ExpPoly::default(); idx.len()];
        for (row, &r) in idx.iter().enumerate() {
            for (c, coeff) in a[r].iter().enumerate() {
                if coeff.is_zero() || idx.contains(&c) {
                    continue;
                }
                let known = solution[c].as_ref().expect("components are solved in dependency order");
                forcing[row].add_scaled(known, coeff);
            }
        }
        let m = sub_matrix(a, idx);
        let y0: Vec<Rational> = idx.iter().map(|&r| state0[r].clone()).collect();
        let parts = solve_block(&m, &block.factorization.roots, &forcing, &y0);
        for (row, part) in parts.into_iter().enumerate() {
            solution[idx[row]] = Some(part);
        }
    }
    Ok(solution.into_iter().map(|s| s.expect("every component solved")).collect())
}

fn factorial(d: usize) -> Rational {
    (1..=d).fold(Rational::one(), |acc, k| acc * Rational::from_integer(k.into()))
}

/// Solves `y' = M y + f(t)`, `y(0) = y0`, for one component.
fn solve_block(m: &RatMatrix, eigen: &[(Rational, usize)], forcing: &[ExpPoly], y0: &[Rational]) -> Vec<ExpPoly> {
    let s = m.len();
    let mut out = vec![ExpPoly::default(); s];

    // Forcing grouped by exponent: μ → w[d][row].
    let mut by_mu: BTreeMap<Rational, Vec<Vec<Rational>>> = BTreeMap::new();
    for (row, f) in forcing.iter().enumerate() {
        for (mu, coeffs) in f.terms() {
            let w = by_mu.entry(mu.clone()).or_default();
            if w.len() < coeffs.len() {
                w.resize(coeffs.len(), vec![Rational::zero(); s]);
            }
            for (d, c) in coeffs.iter().enumerate() {
                w[d][row] += c;
            }
        }
    }

    // Particular solution e^{μt} Σ_j q_j t^j with (M − μI) q_j − (j+1) q_{j+1} = −w_j.
    let mut residual0: Vec<Rational> = y0.to_vec();
    for (mu, w) in &by_mu {
        let mult = eigen.iter().find(|(l, _)| l == mu).map_or(0, |e| e.1);
        let top = w.len() - 1 + mult;
        let size = s * (top + 1);
        let shifted = shift(m, mu);
        let mut sys = zeros(size, size);
        let mut rhs = vec![Rational::zero(); size];
        for j in 0..=top {
            for r in 0..s {
                for c in 0..s {
                    sys[j * s + r][j * s + c] = shifted[r][c].clone();
                }
                if j < top {
                    sys[j * s + r][(j + 1) * s + r] = -Rational::from_integer((j + 1).into());
                }
                if let Some(wj) = w.get(j) {
                    rhs[j * s + r] = -wj[r].clone();
                }
            }
        }
        let q = solve_any(&sys, &rhs).expect("exponential-polynomial forcing always admits a particular solution");
        for j in 0..=top {
            for r in 0..s {
                out[r].add_term(mu.clone(), j, q[j * s + r].clone());
            }
        }
        for r in 0..s {
            residual0[r] -= &q[r];
        }
    }

    // Homogeneous part e^{Mt} residual0 via generalized eigenspaces.
    if residual0.iter().all(Zero::is_zero) {
        return out;
    }
    if s == 1 {
        out[0].add_term(eigen[0].0.clone(), 0, residual0[0].clone());
        return out;
    }
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (k, (lambda, mult)) in eigen.iter().enumerate() {
        let n = shift(m, lambda);
        let nm = super::linalg::mat_pow(&n, *mult);
        for v in nullspace(&nm) {
            basis.push((k, v));
        }
    }
    let p: RatMatrix = (0..s).map(|r| basis.iter().map(|(_, v)| v[r].clone()).collect()).collect();
    let x = solve_any(&p, &residual0).expect("generalized eigenspaces span the whole space");
    for (k, (lambda, mult)) in eigen.iter().enumerate() {
        let mut v = vec![Rational::zero(); s];
        for ((owner, b), xi) in basis.iter().zip(&x) {
            if *owner == k && !xi.is_zero() {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += xi * bi;
                }
            }
        }
        if v.iter().all(Zero::is_zero) {
            continue;
        }
        let n = shift(m, lambda);
        let mut u = v;
        for d in 0..*mult {
            let f = factorial(d).recip();
            for r in 0..s {
                out[r].add_term(lambda.clone(), d, &u[r] * &f);
            }
            u = mat_vec(&n, &u);
        }
    }
    out
}

/// Checks `d/dt m = Ã m` and `m(0) = state0` coefficient by coefficient.
pub fn check_solution(a: &[Vec<Rational>], state0: &[Rational], solution: &[ExpPoly]) -> Result<(), String> {
    for (r, row) in a.iter().enumerate() {
        let mut rhs = ExpPoly::default();
        for (c, coeff) in row.iter().enumerate() {
            rhs.add_scaled(&solution[c], coeff);
        }
        if solution[r].derivative() != rhs {
            return Err(format!("ODE residual is non-zero in component {r}"));
        }
        if solution[r].at_zero() != state0[r] {
            return Err(format!("initial value mismatch in component {r}"));
        }
    }
    Ok(())
}
