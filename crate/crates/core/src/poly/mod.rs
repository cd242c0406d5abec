//! Exact sparse multivariate polynomials over ℚ.

mod monomial;
mod parse;
mod polynomial;
pub mod rational;

use thiserror::Error;

pub use monomial::Monomial;
pub use parse::{parse_constant, parse_polynomial, ParseError, ParseErrorKind};
pub use polynomial::Polynomial;
pub(crate) use polynomial::eval_monomial;
pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}
