//! Benchmark models shipped with the repository, plus the published
//! closure sizes used as regression targets.

use super::{ModelError, SdeModel};
use crate::poly::Monomial;

pub const NAMES: [&str; 7] = ["ou-env", "gene", "consensus", "vehicles", "oscillator", "coupled3d", "double-well"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "ou-env" => include_str!("../../../../benchmarks/ou-env.json"),
        "gene" => include_str!("../../../../benchmarks/gene.json"),
        "consensus" => include_str!("../../../../benchmarks/consensus.json"),
        "vehicles" => include_str!("../../../../benchmarks/vehicles.json"),
        "oscillator" => include_str!("../../../../benchmarks/oscillator.json"),
        "coupled3d" => include_str!("../../../../benchmarks/coupled3d.json"),
        "double-well" => include_str!("../../../../benchmarks/double-well.json"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<SdeModel, ModelError> {
    let src = source(name).ok_or_else(|| ModelError::Schema(format!("no bundled benchmark named {name:?}")))?;
    SdeModel::from_json(src)
}

/// One row of the published closure-size table.
#[derive(Debug, Clone, Copy)]
pub struct PublishedRow {
    pub benchmark: &'static str,
    pub alpha: &'static [u32],
    pub closure_size: usize,
    pub prosolvable: bool,
}

impl PublishedRow {
    pub fn monomial(&self) -> Monomial {
        Monomial::new(self.alpha.to_vec())
    }
}

const fn row(benchmark: &'static str, alpha: &'static [u32], closure_size: usize, prosolvable: bool) -> PublishedRow {
    PublishedRow { benchmark, alpha, closure_size, prosolvable }
}

/// Vehicles' `x2` is the third declared variable `p2` (order p1, v1, p2, v2).
pub const PUBLISHED: [PublishedRow; 12] = [
    row("ou-env", &[0, 2], 8, true),
    row("ou-env", &[0, 3], 15, true),
    row("ou-env", &[0, 4], 24, true),
    row("ou-env", &[0, 5], 35, true),
    row("ou-env", &[0, 10], 120, true),
    row("gene", &[1, 0, 0, 0, 1], 23, true),
    row("gene", &[0, 0, 0, 0, 2], 85, true),
    row("gene", &[1, 0, 0, 0, 2], 115, true),
    row("consensus", &[1, 1], 3, true),
    row("vehicles", &[0, 0, 2, 0], 13, true),
    row("oscillator", &[0, 1, 2], 6, true),
    row("coupled3d", &[2, 2, 0], 3, false),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_model_loads() {
        for name in NAMES {
            let m = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(m.name(), name);
        }
        assert!(load("nope").is_err());
    }

    #[test]
    fn published_rows_match_model_dimensions() {
        for row in PUBLISHED {
            assert_eq!(load(row.benchmark).unwrap().dim(), row.alpha.len());
        }
    }
}
