//! Solving the closed linear moment ODE `m' = A m + c`.
//!
//! Everything goes through the augmented matrix `Ã = [[A, c], [0, 0]]` acting
//! on `[m; 1]`, which turns the affine system into a homogeneous one.

pub mod closed_form;
mod dd;
pub mod exact;
pub mod expm;
pub mod float;
pub mod linalg;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

pub use closed_form::{eval_closed_form, ClosedForm, ClosedFormTerm, Scalar, ScalarKind};
pub use exact::ExpPoly;
pub use expm::ExpmError;
pub use linalg::UniPoly;

use crate::closure::{build_closure_multi, ClosureBudget, ClosureError, DivergenceReport, MomentSystem};
use crate::model::SdeModel;
use crate::poly::rational::to_f64;
use crate::poly::{Monomial, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("time {0} is negative or not finite")]
    InvalidTime(f64),
    #[error("times must be sorted ascending")]
    UnsortedTimes,
    #[error("matrix exponential at t = {t}: {source}")]
    Expm { t: f64, source: ExpmError },
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("power must be an even positive integer, got {0}")]
    InvalidPower(u32),
    #[error("moment value must be non-negative, got {0}")]
    NegativeMoment(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Unsupported {
    #[error("characteristic polynomial has the factor {} with no rational roots", .factor.display_in("t"))]
    IrrationalSpectrum { factor: UniPoly },
    #[error("eigenvalue near {near} is repeated or clustered; numeric Jordan structure is ill-posed")]
    RepeatedEigenvalue { near: Complex64 },
    #[error("numeric eigendecomposition failed: {0}")]
    Numeric(String),
}

/// `Ã = [[A, c], [0, 0]]` with state `[m(0); 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedSystem {
    matrix: Vec<Vec<Rational>>,
    state0: Vec<Rational>,
}

impl AugmentedSystem {
    pub fn new(ms: &MomentSystem) -> Self {
        let k = ms.dim();
        let mut matrix: Vec<Vec<Rational>> = ms
            .matrix_a
            .iter()
            .zip(&ms.vector_c)
            .map(|(row, c)| {
                let mut r = row.clone();
                r.push(c.clone());
                r
            })
            .collect();
        matrix.push(vec![Rational::zero(); k + 1]);
        let mut state0 = ms.m0.clone();
        state0.push(Rational::one());
        AugmentedSystem { matrix, state0 }
    }

    pub fn dim(&self) -> usize {
        self.state0.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn state0(&self) -> &[Rational] {
        &self.state0
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| to_f64(&self.matrix[i][j]))
    }

    pub fn state0_f64(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.state0.iter().map(to_f64))
    }

    /// `expm(Ã t)`.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>, OdeError> {
        expm::expm(&(self.matrix_f64() * t)).map_err(|source| OdeError::Expm { t, source })
    }
}

fn check_times(times: &[f64]) -> Result<(), OdeError> {
    if let Some(&bad) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(OdeError::InvalidTime(bad));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::UnsortedTimes);
    }
    Ok(())
}

/// `m(t_j)` for every time, as the first `|S|` entries of `expm(Ã t_j) [m(0); 1]`.
pub fn eval_numeric(ms: &MomentSystem, times: &[f64]) -> Result<Vec<Vec<f64>>, OdeError> {
    check_times(times)?;
    let aug = AugmentedSystem::new(ms);
    let a = aug.matrix_f64();
    let x0 = aug.state0_f64();
    times
        .par_iter()
        .map(|&t| {
            let e = expm::expm(&(&a * t)).map_err(|source| OdeError::Expm { t, source })?;
            let x = e * &x0;
            Ok(x.iter().take(ms.dim()).copied().collect())
        })
        .collect()
}

/// Exact solution of every component of `[m; 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub components: Vec<ExpPoly>,
}

impl ExactSolution {
    pub fn closed_form(&self, component: usize) -> ClosedForm {
        ClosedForm::from_exp_poly(&self.components[component])
    }

    /// `Σ_r weights[r] m_r(t) + constant`.
    pub fn combination(&self, weights: &[Rational], constant: &Rational) -> ClosedForm {
        let mut acc = ExpPoly::constant(constant.clone());
        for (w, p) in weights.iter().zip(&self.components) {
            acc.add_scaled(p, w);
        }
        ClosedForm::from_exp_poly(&acc)
    }

    /// Symbolic check of the ODE and of the initial values.
    pub fn verify(&self, ms: &MomentSystem) -> Result<(), String> {
        let aug = AugmentedSystem::new(ms);
        exact::check_solution(aug.matrix(), aug.state0(), &self.components)
    }
}

pub fn solve_exact_vector(ms: &MomentSystem) -> Result<ExactSolution, Unsupported> {
    let aug = AugmentedSystem::new(ms);
    exact::solve_exact(aug.matrix(), aug.state0()).map(|components| ExactSolution { components })
}

/// Exact closed form of the target moment (component 0).
pub fn solve_closed_form(ms: &MomentSystem) -> Result<ClosedForm, Unsupported> {
    solve_exact_vector(ms).map(|s| s.closed_form(0))
}

/// Float-spectrum closed form of the target moment.
pub fn solve_closed_form_float(ms: &MomentSystem) -> Result<ClosedForm, Unsupported> {
    let mut weights = vec![Rational::zero(); ms.dim() + 1];
    weights[0] = Rational::one();
    let aug = AugmentedSystem::new(ms);
    float::float_closed_form(aug.matrix(), aug.state0(), &weights)
}

/// `E[Σ_β w_β X^β]` over one closure seeded with every non-constant monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFunctional {
    system: MomentSystem,
    weights: Vec<Rational>,
    constant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum FunctionalOutcome {
    Closed(LinearFunctional),
    Diverged(DivergenceReport),
}

pub fn linear_functional_moment(
    model: &SdeModel,
    coeffs: &Polynomial,
    budget: ClosureBudget,
) -> Result<FunctionalOutcome, ClosureError> {
    let seeds: Vec<Monomial> = coeffs.terms().rev().filter(|(m, _)| !m.is_one()).map(|(m, _)| m.clone()).collect();
    let constant = coeffs.constant_term();
    let system = match build_closure_multi(model, &seeds, budget)? {
        crate::closure::ClosureOutcome::Closed(ms) => ms,
        crate::closure::ClosureOutcome::Diverged(report) => return Ok(FunctionalOutcome::Diverged(report)),
    };
    let weights = system.indices.iter().map(|m| coeffs.coefficient(m)).collect();
    Ok(FunctionalOutcome::Closed(LinearFunctional { system, weights, constant }))
}

impl LinearFunctional {
    pub fn system(&self) -> &MomentSystem {
        &self.system
    }

    /// Weight of each closure index.
    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn initial_value(&self) -> Rational {
        self.weights.iter().zip(&self.system.m0).fold(self.constant.clone(), |acc, (w, m)| acc + w * m)
    }

    pub fn closed_form(&self) -> Result<ClosedForm, Unsupported> {
        solve_exact_vector(&self.system).map(|s| s.combination(&self.weights, &self.constant))
    }

    pub fn closed_form_float(&self) -> Result<ClosedForm, Unsupported> {
        let aug = AugmentedSystem::new(&self.system);
        let mut weights = self.weights.clone();
        weights.push(self.constant.clone());
        float::float_closed_form(aug.matrix(), aug.state0(), &weights)
    }

    pub fn eval_numeric(&self, times: &[f64]) -> Result<Vec<f64>, OdeError> {
        let w: Vec<f64> = self.weights.iter().map(to_f64).collect();
        let c = to_f64(&self.constant);
        Ok(eval_numeric(&self.system, times)?
            .into_iter()
            .map(|m| m.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() + c)
            .collect())
    }
}

/// Markov bound `P(|Z| ≥ a) ≤ E[|Z|^p] / a^p`.
pub fn markov_tail_bound(moment_value: f64, threshold: f64, power: u32) -> Result<f64, OdeError> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(OdeError::InvalidThreshold(threshold));
    }
    if power == 0 || power % 2 != 0 {
        return Err(OdeError::InvalidPower(power));
    }
    if moment_value < 0.0 || moment_value.is_nan() {
        return Err(OdeError::NegativeMoment(moment_value));
    }
    Ok(moment_value / threshold.powi(power as i32))
}
