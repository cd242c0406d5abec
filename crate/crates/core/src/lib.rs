//! Exact moments of polynomial stochastic differential equations.
//!
//! For an SDE `dX = b(X) dt + σ(X) dW` with polynomial `b` and `σ`, the
//! moment `E[X_t^α]` is obtained by closing the moment hierarchy under the
//! infinitesimal generator into a finite linear ODE `m' = A m + c`, which is
//! then solved exactly (rational spectra) or numerically.
//!
//! Pipeline: [`model`] → [`generator`] → [`closure`] → [`odesolve`], with
//! [`prosolve`] deciding in advance whether the closure must terminate and
//! [`montecarlo`] providing an independent statistical check.

pub mod closure;
pub mod generator;
pub mod model;
pub mod montecarlo;
pub mod odesolve;
pub mod poly;
pub mod prosolve;
pub mod scc;

pub use closure::{build_closure, ClosureBudget, ClosureOutcome, DivergenceReport, MomentSystem};
pub use generator::{Generator, GeneratorImage};
pub use model::{InitialCondition, ModelError, SdeModel};
pub use poly::{parse_polynomial, Monomial, Polynomial, Rational};
pub use odesolve::{
    eval_closed_form, eval_numeric, linear_functional_moment, markov_tail_bound, solve_closed_form,
    solve_closed_form_float, ClosedForm, FunctionalOutcome, LinearFunctional, Scalar, ScalarKind, Unsupported,
};
pub use montecarlo::{simulate_moment, simulate_polynomial, MomentEstimate, SimConfig, SimError};
