//! Moment closure: grow the index set `S ∋ α` until it is closed under the
//! generator, then assemble `m' = A m + c`.

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Generator;
use crate::model::{ModelError, SdeModel};
use crate::poly::rational::{format_rational, serde_rational};
use crate::poly::{Monomial, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureBudget {
    pub max_monomials: usize,
    pub max_total_degree: u32,
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget { max_monomials: 10_000, max_total_degree: 200 }
    }
}

impl ClosureBudget {
    pub fn new(max_monomials: usize, max_total_degree: u32) -> Result<Self, ClosureError> {
        if max_monomials == 0 || max_total_degree == 0 {
            return Err(ClosureError::InvalidBudget);
        }
        Ok(ClosureBudget { max_monomials, max_total_degree })
    }
}

#[derive(Debug, Error)]
pub enum ClosureError {
    #[error("target {0} must have positive total degree")]
    ConstantTarget(Monomial),
    #[error("target {target} has dimension {got}, model has {expected}")]
    Dimension { target: Monomial, got: usize, expected: usize },
    #[error("no target monomials given")]
    NoTargets,
    #[error("closure budget limits must be positive")]
    InvalidBudget,
    #[error(transparent)]
    Initial(#[from] ModelError),
}

/// Which budget limit stopped the worklist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetLimit {
    MonomialCount,
    Degree,
}

/// Evidence that the closure kept growing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub exceeded: BudgetLimit,
    /// Generator-linked chain from a target with strictly increasing degree.
    pub witness_chain: Vec<Monomial>,
    pub visited_count: usize,
}

/// The closed linear system `m'(t) = A m(t) + c`, `m(0) = m0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentSystem {
    #[serde(rename = "model")]
    pub model_name: String,
    /// `indices[0]` is the target; the first `seed_count` entries are the requested targets.
    pub indices: Vec<Monomial>,
    #[serde(rename = "matrix", with = "serde_rational::matrix")]
    pub matrix_a: Vec<Vec<Rational>>,
    #[serde(rename = "vector", with = "serde_rational::vec")]
    pub vector_c: Vec<Rational>,
    #[serde(rename = "initial", with = "serde_rational::vec")]
    pub m0: Vec<Rational>,
    #[serde(default = "one")]
    pub seed_count: usize,
}

fn one() -> usize {
    1
}

/// Row `r` of the system: `d/dt m_index = Σ_s row[s] m_s + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemRow {
    pub index: Monomial,
    pub row: Vec<Rational>,
    pub constant: Rational,
}

impl MomentSystem {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn target(&self) -> &Monomial {
        &self.indices[0]
    }

    pub fn position(&self, mono: &Monomial) -> Option<usize> {
        self.indices.iter().position(|m| m == mono)
    }

    pub fn rows(&self) -> Vec<SystemRow> {
        system_rows(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("moment system serializes")
    }

    pub fn from_json(src: &str) -> serde_json::Result<Self> {
        serde_json::from_str(src)
    }

    /// Row dump in the style `d/dt m(0,2) = -4*m(0,2) + 2*m(2,1) + 1`.
    pub fn render_rows(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let mut terms: Vec<String> = r
                .row
                .iter()
                .zip(&self.indices)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, m)| format!("{}*m{}", format_rational(c), m))
                .collect();
            if !r.constant.is_zero() || terms.is_empty() {
                terms.push(format_rational(&r.constant));
            }
            out.push_str(&format!("d/dt m{} = {}\n", r.index, terms.join(" + ").replace("+ -", "- ")));
        }
        out
    }
}

pub fn system_rows(ms: &MomentSystem) -> Vec<SystemRow> {
    ms.indices
        .iter()
        .zip(&ms.matrix_a)
        .zip(&ms.vector_c)
        .map(|((index, row), constant)| SystemRow { index: index.clone(), row: row.clone(), constant: constant.clone() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum ClosureOutcome {
    Closed(MomentSystem),
    Diverged(DivergenceReport),
}

impl ClosureOutcome {
    pub fn closed(self) -> Option<MomentSystem> {
        match self {
            ClosureOutcome::Closed(ms) => Some(ms),
            ClosureOutcome::Diverged(_) => None,
        }
    }

    pub fn diverged(self) -> Option<DivergenceReport> {
        match self {
            ClosureOutcome::Closed(_) => None,
            ClosureOutcome::Diverged(d) => Some(d),
        }
    }
}

/// Discipline for picking the next unprocessed monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorklistOrder {
    #[default]
    Fifo,
    Lifo,
}

pub fn build_closure(model: &SdeModel, alpha: &Monomial, budget: ClosureBudget) -> Result<ClosureOutcome, ClosureError> {
    build_closure_with(model, std::slice::from_ref(alpha), budget, WorklistOrder::Fifo)
}

/// Closure seeded with several targets at once (used for linear functionals).
pub fn build_closure_multi(
    model: &SdeModel,
    seeds: &[Monomial],
    budget: ClosureBudget,
) -> Result<ClosureOutcome, ClosureError> {
    build_closure_with(model, seeds, budget, WorklistOrder::Fifo)
}

pub fn build_closure_with(
    model: &SdeModel,
    seeds: &[Monomial],
    budget: ClosureBudget,
    order: WorklistOrder,
) -> Result<ClosureOutcome, ClosureError> {
    let n = model.dim();
    if seeds.is_empty() {
        return Err(ClosureError::NoTargets);
    }
    if budget.max_monomials == 0 || budget.max_total_degree == 0 {
        return Err(ClosureError::InvalidBudget);
    }
    for s in seeds {
        if s.dim() != n {
            return Err(ClosureError::Dimension { target: s.clone(), got: s.dim(), expected: n });
        }
        if s.is_one() {
            return Err(ClosureError::ConstantTarget(s.clone()));
        }
    }

    let generator = Generator::new(model);
    let mut indices: Vec<Monomial> = Vec::new();
    let mut position: HashMap<Monomial, usize> = HashMap::new();
    let mut preds: Vec<Vec<usize>> = Vec::new();
    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut constants: Vec<Rational> = Vec::new();
    let mut pending: VecDeque<usize> = VecDeque::new();

    let mut seed_count = 0;
    for s in seeds {
        if position.contains_key(s) {
            continue;
        }
        if let Some(report) = check_budget(&budget, s, indices.len()) {
            return Ok(ClosureOutcome::Diverged(DivergenceReport {
                exceeded: report,
                witness_chain: vec![s.clone()],
                visited_count: indices.len(),
            }));
        }
        position.insert(s.clone(), indices.len());
        indices.push(s.clone());
        preds.push(Vec::new());
        rows.push(Vec::new());
        constants.push(Rational::zero());
        pending.push_back(indices.len() - 1);
        seed_count += 1;
    }

    while let Some(r) = match order {
        WorklistOrder::Fifo => pending.pop_front(),
        WorklistOrder::Lifo => pending.pop_back(),
    } {
        let image = generator.apply(&indices[r]);
        constants[r] = image.constant;
        // Newly discovered monomials are queued in descending graded-lex order.
        for (gamma, coeff) in image.linear_part.into_iter().rev() {
            let s = match position.get(&gamma) {
                Some(&s) => s,
                None => {
                    if let Some(limit) = check_budget(&budget, &gamma, indices.len()) {
                        let witness_chain = witness_chain(&indices, &preds, seed_count, r, gamma);
                        return Ok(ClosureOutcome::Diverged(DivergenceReport {
                            exceeded: limit,
                            witness_chain,
                            visited_count: indices.len(),
                        }));
                    }
                    let s = indices.len();
                    position.insert(gamma.clone(), s);
                    indices.push(gamma);
                    preds.push(Vec::new());
                    rows.push(Vec::new());
                    constants.push(Rational::zero());
                    pending.push_back(s);
                    s
                }
            };
            preds[s].push(r);
            rows[r].push((s, coeff));
        }
    }

    let k = indices.len();
    let mut matrix_a = vec![vec![Rational::zero(); k]; k];
    for (r, entries) in rows.into_iter().enumerate() {
        for (s, c) in entries {
            matrix_a[r][s] = c;
        }
    }
    let m0 = indices
        .iter()
        .map(|b| model.initial().moment(b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClosureOutcome::Closed(MomentSystem {
        model_name: model.name().to_string(),
        indices,
        matrix_a,
        vector_c: constants,
        m0,
        seed_count,
    }))
}

fn check_budget(budget: &ClosureBudget, gamma: &Monomial, size: usize) -> Option<BudgetLimit> {
    if gamma.degree() > budget.max_total_degree {
        Some(BudgetLimit::Degree)
    } else if size >= budget.max_monomials {
        Some(BudgetLimit::MonomialCount)
    } else {
        None
    }
}

/// Longest strictly degree-increasing generator path from a seed to the
/// monomial that broke the budget (or to the highest reachable one).
fn witness_chain(
    indices: &[Monomial],
    preds: &[Vec<usize>],
    seed_count: usize,
    breaker_parent: usize,
    breaker: Monomial,
) -> Vec<Monomial> {
    let k = indices.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&v| (indices[v].degree(), v));
    // length of best increasing chain ending at v, and its predecessor
    let mut best: Vec<Option<(usize, Option<usize>)>> = vec![None; k];
    for &v in &order {
        if v < seed_count {
            best[v] = Some((1, None));
        }
        let dv = indices[v].degree();
        for &u in &preds[v] {
            if indices[u].degree() >= dv {
                continue;
            }
            if let Some((len_u, _)) = best[u] {
                if best[v].is_none_or(|(len_v, _)| len_u + 1 > len_v) {
                    best[v] = Some((len_u + 1, Some(u)));
                }
            }
        }
    }
    let trace = |mut v: usize| {
        let mut chain = vec![indices[v].clone()];
        while let Some((_, Some(u))) = best[v] {
            chain.push(indices[u].clone());
            v = u;
        }
        chain.reverse();
        chain
    };
    if breaker.degree() > indices[breaker_parent].degree() && best[breaker_parent].is_some() {
        let mut chain = trace(breaker_parent);
        chain.push(breaker);
        return chain;
    }
    let end = (0..k)
        .filter(|&v| best[v].is_some())
        .max_by_key(|&v| (best[v].map(|b| b.0), indices[v].degree()))
        .unwrap_or(0);
    trace(end)
}

/// Checks the closedness invariant of `ms` against a fresh generator pass.
pub fn verify_closed(model: &SdeModel, ms: &MomentSystem) -> Result<(), String> {
    let generator = Generator::new(model);
    let k = ms.dim();
    if ms.matrix_a.len() != k || ms.matrix_a.iter().any(|r| r.len() != k) || ms.vector_c.len() != k || ms.m0.len() != k {
        return Err("matrix/vector shapes disagree with the index list".into());
    }
    let mut position = HashMap::new();
    for (i, m) in ms.indices.iter().enumerate() {
        if position.insert(m.clone(), i).is_some() {
            return Err(format!("duplicate index {m}"));
        }
    }
    for (r, beta) in ms.indices.iter().enumerate() {
        let image = generator.apply(beta);
        let mut expected = vec![Rational::zero(); k];
        for (gamma, c) in &image.linear_part {
            let s = *position
                .get(gamma)
                .ok_or_else(|| format!("image of {beta} contains {gamma}, which is not in the index set"))?;
            expected[s] = c.clone();
        }
        if expected != ms.matrix_a[r] {
            return Err(format!("row {beta} disagrees with the generator image"));
        }
        if image.constant != ms.vector_c[r] {
            return Err(format!("constant of row {beta} disagrees with the generator image"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::corpus;
    use crate::poly::rational::int;

    fn ou() -> SdeModel {
        corpus::load("ou-env").unwrap()
    }

    #[test]
    fn example_closure_has_eight_indices_in_bfs_order() {
        let ms = build_closure(&ou(), &Monomial::from([0, 2]), ClosureBudget::default())
            .unwrap()
            .closed()
            .unwrap();
        let expected: Vec<Monomial> = [[0, 2], [2, 1], [2, 0], [1, 1], [4, 0], [3, 0], [0, 1], [1, 0]]
            .into_iter()
            .map(Monomial::from)
            .collect();
        assert_eq!(ms.indices, expected);
        assert_eq!(ms.m0, vec![int(0); 8]);
        verify_closed(&ou(), &ms).unwrap();
    }

    #[test]
    fn rows_match_hand_derived_equations() {
        let ms = build_closure(&ou(), &Monomial::from([0, 2]), ClosureBudget::default())
            .unwrap()
            .closed()
            .unwrap();
        let rows = ms.rows();
        let at = |e: [u32; 2]| ms.position(&Monomial::from(e)).unwrap();
        let r20 = &rows[at([2, 0])];
        assert_eq!(r20.row[at([2, 0])], int(-2));
        assert_eq!(r20.constant, int(1));
        assert_eq!(r20.row.iter().filter(|c| !c.is_zero()).count(), 1);
        let r10 = &rows[at([1, 0])];
        assert_eq!(r10.row[at([1, 0])], int(-1));
        assert_eq!(r10.constant, int(0));
        let r40 = &rows[at([4, 0])];
        assert_eq!(r40.row[at([2, 0])], int(6));
        assert_eq!(r40.row[at([4, 0])], int(-4));
        assert_eq!(r40.row.iter().filter(|c| !c.is_zero()).count(), 2);
        assert!(ms.render_rows().contains("d/dt m(2,0) = -2*m(2,0) + 1"));
    }

    #[test]
    fn degree_ten_target_has_120_indices() {
        let ms = build_closure(&ou(), &Monomial::from([0, 10]), ClosureBudget::default())
            .unwrap()
            .closed()
            .unwrap();
        assert_eq!(ms.dim(), 120);
    }

    #[test]
    fn double_well_diverges_with_even_chain() {
        let m = corpus::load("double-well").unwrap();
        let report = build_closure(&m, &Monomial::from([2]), ClosureBudget::default())
            .unwrap()
            .diverged()
            .unwrap();
        assert_eq!(report.exceeded, BudgetLimit::Degree);
        assert_eq!(&report.witness_chain[..3], &[Monomial::from([2]), Monomial::from([4]), Monomial::from([6])]);
        for w in report.witness_chain.windows(2) {
            assert_eq!(w[1].degree(), w[0].degree() + 2);
        }
        let small = ClosureBudget::new(5, 200).unwrap();
        let report = build_closure(&m, &Monomial::from([2]), small).unwrap().diverged().unwrap();
        assert_eq!(report.exceeded, BudgetLimit::MonomialCount);
        assert_eq!(report.visited_count, 5);
    }

    #[test]
    fn rejects_bad_targets() {
        let m = ou();
        assert!(matches!(
            build_closure(&m, &Monomial::from([0, 0]), ClosureBudget::default()),
            Err(ClosureError::ConstantTarget(_))
        ));
        assert!(matches!(
            build_closure(&m, &Monomial::from([1]), ClosureBudget::default()),
            Err(ClosureError::Dimension { .. })
        ));
        assert!(ClosureBudget::new(0, 3).is_err());
    }

    #[test]
    fn missing_table_moment_propagates() {
        let src = r#"{"name":"tab","variables":["x"],"brownian_dim":1,
            "drift":["-x"],"diffusion":[["1"]],
            "initial":{"kind":"moments","table":{"(2)":"1"}}}"#;
        let m = SdeModel::from_json(src).unwrap();
        assert!(build_closure(&m, &Monomial::from([2]), ClosureBudget::default()).is_ok());
        let err = build_closure(&m, &Monomial::from([3]), ClosureBudget::default()).unwrap_err();
        assert!(matches!(err, ClosureError::Initial(ModelError::MissingMoment(_))));
    }

    #[test]
    fn json_round_trip() {
        let ms = build_closure(&ou(), &Monomial::from([0, 2]), ClosureBudget::default())
            .unwrap()
            .closed()
            .unwrap();
        let text = ms.to_json();
        assert!(text.contains("\"indices\""));
        assert_eq!(MomentSystem::from_json(&text).unwrap(), ms);
    }
}
