//! Shared fixtures for the criterion benchmarks.

use sdemoment::model::corpus;
use sdemoment::{Monomial, SdeModel};

/// Loads a bundled benchmark model, panicking on corpus corruption.
pub fn model(name: &str) -> SdeModel {
    corpus::load(name).unwrap_or_else(|e| panic!("bundled model {name}: {e}"))
}

pub fn alpha(exponents: &[u32]) -> Monomial {
    Monomial::new(exponents.to_vec())
}
