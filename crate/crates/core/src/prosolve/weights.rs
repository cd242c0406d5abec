//! Block weights and the weighted-block-degree termination certificate.
//!
//! Each generator term whose coefficient carries a factor from a
//! lower-block polynomial part (`Bᵢ`, `P_ik`) lowers the exponent sum of its
//! source block and may raise earlier blocks by at most `C_{p,q}`. Weights
//! `W₁ = 1`, `W_p = 1 + Σ_{q<p} C_{p,q} W_q` then make
//! `deg_W(x^β) = Σ_p W_p s_p(β)` non-increasing along the closure.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::Serialize;

use super::{verify_partition, OrderedPartition, ProsolveError};
use crate::closure::MomentSystem;
use crate::generator::Generator;
use crate::model::SdeModel;
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DerivativeOp {
    /// `∂_i`
    First(usize),
    /// `∂_i ∂_j` with `i ≤ j`
    Second(usize, usize),
}

/// A polynomial-produced primitive term `x^γ · D` with its source block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PrimitiveTerm {
    pub coefficient: Monomial,
    pub op: DerivativeOp,
    /// 0-based block index.
    pub source_block: usize,
}

/// Splits a block-`p` coefficient into its own-block linear part and the
/// polynomial in earlier blocks.
fn split_affine(poly: &Polynomial, own: &[bool]) -> (Polynomial, Polynomial) {
    let n = poly.dim();
    let mut linear = Polynomial::zero(n);
    let mut rest = Polynomial::zero(n);
    for (m, c) in poly.terms() {
        let in_own = m.exponents().iter().enumerate().any(|(v, &e)| e > 0 && own[v]);
        let target = if in_own { &mut linear } else { &mut rest };
        target.add_term(m.clone(), c.clone());
    }
    (linear, rest)
}

/// Enumerates the polynomial-produced primitive terms of the generator under
/// `partition` (which must already be verified).
pub fn primitive_terms(model: &SdeModel, partition: &OrderedPartition) -> Vec<PrimitiveTerm> {
    let n = model.dim();
    let block_of = partition.block_of();
    let own_mask = |p: usize| -> Vec<bool> { (0..n).map(|v| block_of[v] == p).collect() };
    let masks: Vec<Vec<bool>> = (0..partition.len()).map(own_mask).collect();

    let mut out: BTreeSet<PrimitiveTerm> = BTreeSet::new();
    let mut push = |poly: &Polynomial, op: DerivativeOp, source_block: usize| {
        for (m, _) in poly.terms() {
            out.insert(PrimitiveTerm { coefficient: m.clone(), op, source_block });
        }
    };

    // sigma_parts[i][k] = (L_ik, P_ik)
    let mut sigma_parts: Vec<Vec<(Polynomial, Polynomial)>> = Vec::with_capacity(n);
    for i in 0..n {
        let p = block_of[i];
        let (_, b_rest) = split_affine(&model.drift()[i], &masks[p]);
        push(&b_rest, DerivativeOp::First(i), p);
        sigma_parts.push(model.diffusion()[i].iter().map(|s| split_affine(s, &masks[p])).collect());
    }

    let two = Polynomial::constant(n, crate::poly::rational::int(2));
    for k in 0..model.brownian_dim() {
        for i in 0..n {
            let p = block_of[i];
            let (li, pi) = &sigma_parts[i][k];
            // ∂_i²: 2·L_ik·P_ik and P_ik²
            let mixed = two.mul(li).and_then(|t| t.mul(pi)).expect("same dimension");
            push(&mixed, DerivativeOp::Second(i, i), p);
            push(&pi.mul(pi).expect("same dimension"), DerivativeOp::Second(i, i), p);
            for j in (i + 1)..n {
                let q = block_of[j];
                let (lj, pj) = &sigma_parts[j][k];
                let op = DerivativeOp::Second(i, j);
                push(&pi.mul(pj).expect("same dimension"), op, p.max(q));
                // L·P cross terms carry a factor from exactly one polynomial part.
                push(&li.mul(pj).expect("same dimension"), op, q);
                push(&pi.mul(lj).expect("same dimension"), op, p);
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockWeights {
    pub partition: OrderedPartition,
    /// `C_{p,q}` for `q < p`, 0-based keys; absent pairs are 0.
    pub c: BTreeMap<(usize, usize), u32>,
    /// `W_p`, with `W_1 = 1`.
    pub weights: Vec<u64>,
}

impl BlockWeights {
    pub fn c(&self, p: usize, q: usize) -> u32 {
        self.c.get(&(p, q)).copied().unwrap_or(0)
    }

    /// Block exponent sums `s_p(β)`.
    pub fn block_sums(&self, beta: &Monomial) -> Vec<u64> {
        self.partition.blocks().iter().map(|b| u64::from(beta.degree_in(b))).collect()
    }

    /// Integer `C₀` with `|β| ≤ C₀ |α|` for every `β` reachable from `α`.
    pub fn degree_constant(&self) -> u64 {
        let wmax = *self.weights.iter().max().unwrap_or(&1);
        // ceil(wmax · Σ 1/W_p)
        let mut num: u128 = 0;
        let lcm = self.weights.iter().fold(1u128, |acc, &w| num_integer::lcm(acc, u128::from(w)));
        for &w in &self.weights {
            num += lcm / u128::from(w);
        }
        let total = u128::from(wmax) * num;
        total.div_ceil(lcm) as u64
    }
}

pub fn compute_block_weights(model: &SdeModel, partition: &OrderedPartition) -> Result<BlockWeights, ProsolveError> {
    verify_partition(model, partition).map_err(ProsolveError::NotBlockTriangular)?;
    let blocks = partition.blocks();
    let mut c: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for term in primitive_terms(model, partition) {
        let p = term.source_block;
        for (q, block) in blocks.iter().enumerate().take(p) {
            let d = term.coefficient.degree_in(block);
            if d > 0 {
                let entry = c.entry((p, q)).or_insert(0);
                *entry = (*entry).max(d);
            }
        }
    }
    let mut weights: Vec<u64> = Vec::with_capacity(blocks.len());
    for p in 0..blocks.len() {
        let mut w: u64 = 1;
        for (q, &wq) in weights.iter().enumerate() {
            let cpq = u64::from(c.get(&(p, q)).copied().unwrap_or(0));
            w = cpq
                .checked_mul(wq)
                .and_then(|x| w.checked_add(x))
                .ok_or(ProsolveError::WeightOverflow)?;
        }
        weights.push(w);
    }
    Ok(BlockWeights { partition: partition.clone(), c, weights })
}

/// `deg_W(x^β) = Σ_p W_p s_p(β)`.
pub fn weighted_degree(bw: &BlockWeights, beta: &Monomial) -> u64 {
    bw.block_sums(beta).iter().zip(&bw.weights).map(|(s, w)| s * w).sum()
}

/// Result of checking the weighted degree along a constructed closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub weights: BlockWeights,
    /// Largest `deg_W` among the requested targets.
    pub target_degree: u64,
    pub max_observed: u64,
    /// `⌊deg_W(x^α) / W_p⌋` per block.
    pub block_bounds: Vec<u64>,
    /// Largest observed `s_p` per block.
    pub max_block_sums: Vec<u64>,
    pub degree_constant: u64,
    pub checked_edges: usize,
}

/// Checks `deg_W(γ) ≤ deg_W(β)` for every generator edge `β → γ` of `ms`.
pub fn certify_closure(
    model: &SdeModel,
    partition: &OrderedPartition,
    ms: &MomentSystem,
) -> Result<Certificate, ProsolveError> {
    if ms.indices.first().map_or(0, Monomial::dim) != model.dim() {
        return Err(ProsolveError::Dimension { got: ms.indices.first().map_or(0, Monomial::dim), expected: model.dim() });
    }
    let bw = compute_block_weights(model, partition)?;
    let generator = Generator::new(model);
    let seeds = ms.seed_count.clamp(1, ms.dim());
    let target_degree = ms.indices[..seeds].iter().map(|a| weighted_degree(&bw, a)).max().unwrap_or(0);
    let block_bounds: Vec<u64> = bw.weights.iter().map(|w| target_degree / w).collect();
    let mut cache: HashMap<&Monomial, u64> = HashMap::new();
    let mut max_observed = 0;
    let mut max_block_sums = vec![0; bw.weights.len()];
    let mut checked_edges = 0;
    for beta in &ms.indices {
        let db = *cache.entry(beta).or_insert_with(|| weighted_degree(&bw, beta));
        max_observed = max_observed.max(db);
        for (p, s) in bw.block_sums(beta).into_iter().enumerate() {
            if s > block_bounds[p] {
                return Err(ProsolveError::BlockBoundViolation { index: beta.clone(), block: p + 1, sum: s, bound: block_bounds[p] });
            }
            max_block_sums[p] = max_block_sums[p].max(s);
        }
        for gamma in generator.apply(beta).linear_part.keys() {
            checked_edges += 1;
            if weighted_degree(&bw, gamma) > db {
                return Err(ProsolveError::CertificateViolation { from: beta.clone(), to: gamma.clone() });
            }
        }
    }
    let degree_constant = bw.degree_constant();
    Ok(Certificate { weights: bw, target_degree, max_observed, block_bounds, max_block_sums, degree_constant, checked_edges })
}

/// `C(n + d, d)` with `d = C₀·|α|`: number of monomials of degree ≤ d in n variables.
pub fn closure_size_bound(n: usize, degree_constant: u64, alpha_degree: u32) -> BigUint {
    let d = degree_constant * u64::from(alpha_degree);
    let mut acc = BigUint::from(1u32);
    for i in 1..=n as u64 {
        acc = acc * BigUint::from(d + i) / BigUint::from(i);
    }
    acc
}
