//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaled norm target: `‖A‖₁ / 2^s ≤ 0.5`.
const THETA: f64 = 0.5;
const MAX_SQUARINGS: i32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ExpmError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix norm {norm:e} needs more than {MAX_SQUARINGS} squarings")]
    NormTooLarge { norm: f64 },
    #[error("Padé denominator is singular")]
    Singular,
    #[error("result overflowed to non-finite values")]
    Overflow,
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>, ExpmError> {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(ExpmError::NonFinite);
    }
    let norm = norm1(a);
    let s = if norm <= THETA { 0 } else { (norm / THETA).log2().ceil() as i32 };
    if s > MAX_SQUARINGS {
        return Err(ExpmError::NormTooLarge { norm });
    }
    let a = a * 2f64.powi(-s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(ExpmError::Singular)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(ExpmError::Overflow);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.0, 2.5]));
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - 1.0).abs() < 1e-15);
        assert!((e[(2, 2)] - 2.5f64.exp()).abs() < 1e-13);
        // [[0, 3], [0, 0]] → [[1, 3], [0, 1]]
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&n).unwrap();
        assert!(max_diff(&e, &DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let w = 7.3;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -w, w, 0.0]);
        let e = expm(&a).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[w.cos(), -w.sin(), w.sin(), w.cos()]);
        assert!(max_diff(&e, &want) < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let a = DMatrix::from_row_slice(1, 1, &[1000.0]);
        assert_eq!(expm(&a), Err(ExpmError::Overflow));
        let a = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert_eq!(expm(&a), Err(ExpmError::NonFinite));
    }
}
