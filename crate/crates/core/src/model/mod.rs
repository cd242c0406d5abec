//! SDE models `dX = b(X) dt + σ(X) dW`, their JSON file format and initial moments.

pub mod corpus;

use std::collections::{BTreeMap, HashSet};

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::rational::{format_rational, parse_rational};
use crate::poly::{eval_monomial, parse_polynomial, Monomial, ParseError, Polynomial, Rational};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("in {field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid variables: {0}")]
    Variables(String),
    #[error("initial moment table has no entry for {0}")]
    MissingMoment(Monomial),
    #[error("initial moment index {index} has dimension {got}, expected {expected}")]
    MomentDimension { index: Monomial, got: usize, expected: usize },
}

/// Distribution of `X_0`, reduced to what moment computations need.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Deterministic start `X_0 = x0`.
    Point(Vec<Rational>),
    /// Explicit table `β ↦ E[X_0^β]`.
    Moments(BTreeMap<Monomial, Rational>),
}

impl InitialCondition {
    pub fn moment(&self, beta: &Monomial) -> Result<Rational, ModelError> {
        match self {
            InitialCondition::Point(x0) => {
                if beta.dim() != x0.len() {
                    return Err(ModelError::MomentDimension {
                        index: beta.clone(),
                        got: beta.dim(),
                        expected: x0.len(),
                    });
                }
                Ok(eval_monomial(beta, x0))
            }
            InitialCondition::Moments(table) => {
                if beta.is_one() {
                    return Ok(Rational::one());
                }
                table.get(beta).cloned().ok_or_else(|| ModelError::MissingMoment(beta.clone()))
            }
        }
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            InitialCondition::Point(p) => Some(p),
            InitialCondition::Moments(_) => None,
        }
    }
}

/// `E[X_0^β]` for the given initial condition.
pub fn initial_moment(ic: &InitialCondition, beta: &Monomial) -> Result<Rational, ModelError> {
    ic.moment(beta)
}

/// A validated polynomial SDE.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeModel {
    name: String,
    variables: Vec<String>,
    brownian_dim: usize,
    drift: Vec<Polynomial>,
    diffusion: Vec<Vec<Polynomial>>,
    initial: InitialCondition,
}

impl SdeModel {
    /// Validates shapes and builds the model.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        brownian_dim: usize,
        drift: Vec<Polynomial>,
        diffusion: Vec<Vec<Polynomial>>,
        initial: InitialCondition,
    ) -> Result<Self, ModelError> {
        let n = variables.len();
        check_variables(&variables)?;
        if brownian_dim == 0 {
            return Err(ModelError::Shape("brownian_dim must be at least 1".into()));
        }
        if drift.len() != n {
            return Err(ModelError::Shape(format!("drift has {} entries, expected {n}", drift.len())));
        }
        if diffusion.len() != n {
            return Err(ModelError::Shape(format!("diffusion has {} rows, expected {n}", diffusion.len())));
        }
        for (i, row) in diffusion.iter().enumerate() {
            if row.len() != brownian_dim {
                return Err(ModelError::Shape(format!(
                    "diffusion row {} has {} columns, expected {brownian_dim}",
                    i + 1,
                    row.len()
                )));
            }
        }
        if drift.iter().chain(diffusion.iter().flatten()).any(|p| p.dim() != n) {
            return Err(ModelError::Shape(format!("all coefficients must have dimension {n}")));
        }
        match &initial {
            InitialCondition::Point(p) if p.len() != n => {
                return Err(ModelError::Shape(format!("initial point has {} values, expected {n}", p.len())))
            }
            InitialCondition::Moments(table) => {
                if let Some(bad) = table.keys().find(|k| k.dim() != n) {
                    return Err(ModelError::MomentDimension { index: bad.clone(), got: bad.dim(), expected: n });
                }
            }
            _ => {}
        }
        Ok(SdeModel { name: name.into(), variables, brownian_dim, drift, diffusion, initial })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Brownian dimension `m`.
    pub fn brownian_dim(&self) -> usize {
        self.brownian_dim
    }

    pub fn drift(&self) -> &[Polynomial] {
        &self.drift
    }

    /// Row-major `n × m` diffusion matrix.
    pub fn diffusion(&self) -> &[Vec<Polynomial>] {
        &self.diffusion
    }

    pub fn initial(&self) -> &InitialCondition {
        &self.initial
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Result<Self, ModelError> {
        self.initial = initial;
        SdeModel::new(self.name, self.variables, self.brownian_dim, self.drift, self.diffusion, self.initial)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Parses a polynomial over this model's variables.
    pub fn parse(&self, src: &str) -> Result<Polynomial, ParseError> {
        parse_polynomial(src, &self.variables)
    }

    /// Largest total degree among drift and diffusion entries.
    pub fn max_degree(&self) -> u32 {
        self.drift
            .iter()
            .chain(self.diffusion.iter().flatten())
            .map(Polynomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Loads a model from its JSON text.
    pub fn from_json(src: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(src).map_err(|e| ModelError::Schema(e.to_string()))?;
        file.into_model()
    }

    pub fn to_file(&self) -> ModelFile {
        let names = &self.variables;
        let show = |p: &Polynomial| p.display_with(names).to_string();
        ModelFile {
            name: self.name.clone(),
            variables: self.variables.clone(),
            brownian_dim: self.brownian_dim,
            drift: self.drift.iter().map(show).collect(),
            diffusion: self.diffusion.iter().map(|row| row.iter().map(show).collect()).collect(),
            initial: match &self.initial {
                InitialCondition::Point(p) => InitialFile::Point { values: p.iter().map(format_rational).collect() },
                InitialCondition::Moments(t) => InitialFile::Moments {
                    table: t.iter().map(|(k, v)| (k.to_tuple_string(), format_rational(v))).collect(),
                },
            },
        }
    }

    /// Canonical JSON text; `from_json(to_json(m)) == m`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model file serializes")
    }
}

/// Alias matching the file-level operation name.
pub fn load_model(src: &str) -> Result<SdeModel, ModelError> {
    SdeModel::from_json(src)
}

pub fn print_model(model: &SdeModel) -> String {
    model.to_json()
}

fn check_variables(vars: &[String]) -> Result<(), ModelError> {
    if vars.is_empty() {
        return Err(ModelError::Variables("at least one variable is required".into()));
    }
    let mut seen = HashSet::new();
    for v in vars {
        let valid = v.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && v.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !valid {
            return Err(ModelError::Variables(format!("`{v}` is not an identifier")));
        }
        if v == "t" {
            return Err(ModelError::Variables(
                "`t` is reserved for time; coefficients must be time-homogeneous".into(),
            ));
        }
        if !seen.insert(v.as_str()) {
            return Err(ModelError::Variables(format!("duplicate variable `{v}`")));
        }
    }
    Ok(())
}

/// On-disk JSON layout of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub variables: Vec<String>,
    pub brownian_dim: usize,
    pub drift: Vec<String>,
    pub diffusion: Vec<Vec<String>>,
    pub initial: InitialFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialFile {
    Point { values: Vec<String> },
    Moments { table: BTreeMap<String, String> },
}

impl ModelFile {
    pub fn into_model(self) -> Result<SdeModel, ModelError> {
        check_variables(&self.variables)?;
        let vars = &self.variables;
        let parse = |field: String, src: &str| {
            parse_polynomial(src, vars).map_err(|source| {
                let source = time_hint(source);
                ModelError::Parse { field, source }
            })
        };
        let drift = self
            .drift
            .iter()
            .enumerate()
            .map(|(i, s)| parse(format!("drift[{i}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let diffusion = self
            .diffusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(k, s)| parse(format!("diffusion[{i}][{k}]"), s))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let initial = match self.initial {
            InitialFile::Point { values } => InitialCondition::Point(
                values
                    .iter()
                    .map(|s| parse_rational(s).ok_or_else(|| ModelError::Schema(format!("invalid rational {s:?}"))))
                    .collect::<Result<_, _>>()?,
            ),
            InitialFile::Moments { table } => {
                let mut out = BTreeMap::new();
                for (k, v) in &table {
                    let key = Monomial::parse_tuple(k)
                        .ok_or_else(|| ModelError::Schema(format!("invalid moment index {k:?}")))?;
                    let value =
                        parse_rational(v).ok_or_else(|| ModelError::Schema(format!("invalid rational {v:?}")))?;
                    out.insert(key, value);
                }
                InitialCondition::Moments(out)
            }
        };
        SdeModel::new(self.name, self.variables, self.brownian_dim, drift, diffusion, initial)
    }
}

fn time_hint(err: ParseError) -> ParseError {
    use crate::poly::ParseErrorKind;
    match err.kind {
        ParseErrorKind::UnknownVariable(ref v) if v == "t" => ParseError {
            position: err.position,
            kind: ParseErrorKind::NonPolynomial("time-dependent coefficients are not supported".into()),
        },
        _ => err,
    }
}
