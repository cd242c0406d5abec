//! Closed forms from a numeric eigendecomposition, for diagonalizable
//! spectra that do not split over ℚ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::closed_form::{ClosedForm, ClosedFormTerm, Scalar, ScalarKind};
use super::exact::block_spectra;
use super::Unsupported;
use crate::poly::rational::to_f64;
use crate::poly::Rational;

/// Eigenvalues closer than this are treated as one repeated cluster.
const NEGLIGIBLE: f64 = 1e-13;

pub const CLUSTER_TOLERANCE: f64 = 1e-8;

fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1e-14 * (1.0 + z.re.abs()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Simple eigenvalues of `a`: exact rational roots plus polished numeric roots
/// of the factors without rational roots.
pub fn simple_spectrum(a: &[Vec<Rational>]) -> Result<Vec<Complex64>, Unsupported> {
    let mut eigs = Vec::with_capacity(a.len());
    for block in block_spectra(a) {
        for (root, mult) in &block.factorization.roots {
            if *mult > 1 {
                return Err(Unsupported::RepeatedEigenvalue { near: Complex64::new(to_f64(root), 0.0) });
            }
            eigs.push(Complex64::new(to_f64(root), 0.0));
        }
        eigs.extend(block.factorization.remainder.roots_f64().into_iter().map(snap_real));
    }
    for (i, a) in eigs.iter().enumerate() {
        for b in &eigs[i + 1..] {
            if (a - b).norm() < CLUSTER_TOLERANCE * (1.0 + a.norm()) {
                return Err(Unsupported::RepeatedEigenvalue { near: *a });
            }
        }
    }
    Ok(eigs)
}

/// `Σ_r weights[r] m_r(t)` as a float closed form.
pub fn float_closed_form(a: &[Vec<Rational>], state0: &[Rational], weights: &[Rational]) -> Result<ClosedForm, Unsupported> {
    let n = a.len();
    let eigs = simple_spectrum(a)?;
    let af = DMatrix::from_fn(n, n, |i, j| Complex64::new(to_f64(&a[i][j]), 0.0));
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for (k, lambda) in eigs.iter().enumerate() {
        let shifted = &af - DMatrix::<Complex64>::identity(n, n) * *lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Unsupported::Numeric("singular value decomposition failed".into()))?;
        let (min_idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty spectrum");
        for r in 0..n {
            vecs[(r, k)] = v_t[(min_idx, r)].conj();
        }
    }
    let x0 = DVector::from_iterator(n, state0.iter().map(|v| Complex64::new(to_f64(v), 0.0)));
    let x = vecs.clone().lu().solve(&x0).ok_or_else(|| Unsupported::Numeric("eigenvector matrix is singular".into()))?;
    let coeffs: Vec<Complex64> = eigs
        .iter()
        .enumerate()
        .map(|(k, lambda)| {
            let mut c: Complex64 =
                weights.iter().enumerate().map(|(r, w)| vecs[(r, k)] * to_f64(w)).sum::<Complex64>() * x[k];
            if lambda.im == 0.0 {
                c.im = 0.0;
            }
            c
        })
        .collect();
    // Coefficients at roundoff level relative to the largest are exact zeros.
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let terms = eigs
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.norm() > NEGLIGIBLE * scale)
        .map(|(lambda, c)| ClosedFormTerm { lambda: Scalar::Complex(*lambda), coeffs: vec![Scalar::Complex(c)] })
        .collect();
    Ok(ClosedForm::new(terms, ScalarKind::Float))
}
