//! Structural test for guaranteed closure termination.
//!
//! A model qualifies when its variables admit an ordered partition
//! `G₁ ≺ … ≺ G_r` such that every drift and diffusion entry of a block is
//! affine in that block's variables plus an arbitrary polynomial in earlier
//! blocks. The partition is inferred from the variable dependency graph: the
//! condition holds iff no strongly connected component contains a nonlinear
//! edge.

mod weights;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::SdeModel;
use crate::poly::{Monomial, Polynomial};
use crate::scc;

pub use weights::{
    certify_closure, closure_size_bound, compute_block_weights, primitive_terms, weighted_degree, BlockWeights,
    Certificate, DerivativeOp, PrimitiveTerm,
};

#[derive(Debug, Error)]
pub enum ProsolveError {
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error("partition does not give a block-triangular affine structure: {0}")]
    NotBlockTriangular(PartitionViolation),
    #[error("weighted degree increases from {from} to {to}")]
    CertificateViolation { from: Monomial, to: Monomial },
    #[error("block bound violated: {index} has s_{block} = {sum} > {bound}")]
    BlockBoundViolation { index: Monomial, block: usize, sum: u64, bound: u64 },
    #[error("block weights overflow")]
    WeightOverflow,
    #[error("moment system dimension {got} does not match model dimension {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Dependency `x_from → x_to`: `x_from` occurs in `b_to` or some `σ_{to,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DependencyEdge {
    pub from: usize,
    pub to: usize,
    /// `x_from` occurs in a monomial of total degree ≥ 2.
    pub nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: usize,
    pub edges: Vec<DependencyEdge>,
}

impl DependencyGraph {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        adj
    }
}

pub fn build_dependency_graph(model: &SdeModel) -> DependencyGraph {
    let n = model.dim();
    let mut edges: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for to in 0..n {
        let coeffs = std::iter::once(&model.drift()[to]).chain(model.diffusion()[to].iter());
        for p in coeffs {
            for (m, _) in p.terms() {
                let nonlinear = m.degree() >= 2;
                for from in 0..n {
                    if m.exponent(from) > 0 {
                        let flag = edges.entry((from, to)).or_insert(false);
                        *flag |= nonlinear;
                    }
                }
            }
        }
    }
    DependencyGraph {
        nodes: n,
        edges: edges.into_iter().map(|((from, to), nonlinear)| DependencyEdge { from, to, nonlinear }).collect(),
    }
}

/// Ordered blocks `G₁ ≺ … ≺ G_r` of 0-based variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self, ProsolveError> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(ProsolveError::MalformedPartition("empty block".into()));
            }
            for &v in block {
                if v >= n {
                    return Err(ProsolveError::MalformedPartition(format!("variable index {v} out of range")));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(ProsolveError::MalformedPartition(format!("variable index {v} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ProsolveError::MalformedPartition(format!("variable index {missing} is not covered")));
        }
        Ok(OrderedPartition { blocks })
    }

    /// The single block `{0..n}`.
    pub fn single(n: usize) -> Self {
        OrderedPartition { blocks: vec![(0..n).collect()] }
    }

    /// Parses `"x1|x2,x3"`: blocks separated by `|`, variables by `,`.
    pub fn parse(src: &str, vars: &[String]) -> Result<Self, ProsolveError> {
        let blocks = src
            .split('|')
            .map(|block| {
                block
                    .split(',')
                    .map(|name| {
                        let name = name.trim();
                        vars.iter()
                            .position(|v| v == name)
                            .ok_or_else(|| ProsolveError::MalformedPartition(format!("unknown variable `{name}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        OrderedPartition::new(blocks, vars.len())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block position of each variable.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (p, block) in self.blocks.iter().enumerate() {
            for &v in block {
                out[v] = p;
            }
        }
        out
    }

    /// Merges blocks `p` and `p + 1`.
    pub fn merge_adjacent(&self, p: usize) -> Option<Self> {
        if p + 1 >= self.blocks.len() {
            return None;
        }
        let mut blocks = self.blocks.clone();
        let next = blocks.remove(p + 1);
        blocks[p].extend(next);
        blocks[p].sort_unstable();
        Some(OrderedPartition { blocks })
    }

    pub fn display_with<'a>(&'a self, vars: &'a [String]) -> impl fmt::Display + 'a {
        PartitionDisplay { partition: self, vars }
    }
}

struct PartitionDisplay<'a> {
    partition: &'a OrderedPartition,
    vars: &'a [String],
}

impl fmt::Display for PartitionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .partition
            .blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&v| self.vars[v].as_str()).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        write!(f, "({})", blocks.join(","))
    }
}

/// First coefficient that breaks the block-triangular affine shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionViolation {
    /// `b[i]` or `sigma[i][k]`, 0-based.
    pub coefficient: String,
    pub monomial: Monomial,
    pub reason: String,
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} has monomial {}: {}", self.coefficient, self.monomial, self.reason)
    }
}

/// Drift and diffusion entries of variable `i`, labelled.
pub(crate) fn coefficients_of(model: &SdeModel, i: usize) -> Vec<(String, &Polynomial)> {
    let mut out = vec![(format!("b[{i}]"), &model.drift()[i])];
    for (k, p) in model.diffusion()[i].iter().enumerate() {
        out.push((format!("sigma[{i}][{k}]"), p));
    }
    out
}

/// Checks that each coefficient of a block-`p` variable is affine in block `p`
/// plus a polynomial in blocks before `p`.
pub fn verify_partition(model: &SdeModel, partition: &OrderedPartition) -> Result<(), PartitionViolation> {
    assert_eq!(partition.dim(), model.dim(), "partition must cover the model variables");
    let block_of = partition.block_of();
    for (p, block) in partition.blocks().iter().enumerate() {
        for &i in block {
            for (label, poly) in coefficients_of(model, i) {
                for (m, _) in poly.terms() {
                    let mut own = 0;
                    for (v, &e) in m.exponents().iter().enumerate() {
                        if e == 0 {
                            continue;
                        }
                        if block_of[v] > p {
                            return Err(PartitionViolation {
                                coefficient: label,
                                monomial: m.clone(),
                                reason: format!("depends on variable {v} from later block {}", block_of[v] + 1),
                            });
                        }
                        if block_of[v] == p {
                            own += e;
                        }
                    }
                    if own > 0 && m.degree() > 1 {
                        return Err(PartitionViolation {
                            coefficient: label,
                            monomial: m.clone(),
                            reason: format!("not affine-linear in block {}", p + 1),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProsolvableViolation {
    pub edge: DependencyEdge,
    /// The strongly connected component containing both endpoints.
    pub component: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProsolvableReport {
    pub prosolvable: bool,
    pub partition: Option<OrderedPartition>,
    pub violation: Option<ProsolvableViolation>,
    /// Set when the inferred order failed re-verification against the coefficients.
    pub partition_check: Option<PartitionViolation>,
}

/// Graph-based decision; on success the partition is the condensation in
/// topological order (finest valid partition).
pub fn check_prosolvable(model: &SdeModel) -> ProsolvableReport {
    let graph = build_dependency_graph(model);
    let adj = graph.adjacency();
    let comps = scc::condensation_order(&adj);
    let mut comp_of = vec![0; graph.nodes];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let bad = graph
        .edges
        .iter()
        .filter(|e| e.nonlinear && comp_of[e.from] == comp_of[e.to])
        .min_by_key(|e| (e.to, e.from));
    if let Some(&edge) = bad {
        return ProsolvableReport {
            prosolvable: false,
            partition: None,
            violation: Some(ProsolvableViolation { edge, component: comps[comp_of[edge.from]].clone() }),
            partition_check: None,
        };
    }
    let partition = OrderedPartition { blocks: comps };
    match verify_partition(model, &partition) {
        Ok(()) => ProsolvableReport { prosolvable: true, partition: Some(partition), violation: None, partition_check: None },
        Err(v) => ProsolvableReport { prosolvable: true, partition: None, violation: None, partition_check: Some(v) },
    }
}
