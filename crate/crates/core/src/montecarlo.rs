//! Euler–Maruyama simulation, used as an independent statistical check of
//! exact moments.
//!
//! Path `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, with
//! normals from the ziggurat sampler in `rand_distr`. Per-path results are
//! stored by index and reduced by pairwise summation, so estimates are
//! bitwise identical for any number of worker threads.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SdeModel;
use crate::poly::rational::to_f64;
use crate::poly::{Monomial, Polynomial};

/// Any coordinate beyond this magnitude aborts the simulation.
pub const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub record_times: Vec<f64>,
}

impl SimConfig {
    /// Defaults `dt = 1e-3`, `100000` paths, seed 0; the horizon is the last record time.
    pub fn new(record_times: Vec<f64>) -> Self {
        let horizon = record_times.iter().copied().fold(0.0, f64::max);
        SimConfig { dt: 1e-3, horizon, paths: 100_000, seed: 0, record_times }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_paths(mut self, paths: usize) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.dt > self.horizon {
            return bad(format!("dt {} exceeds the horizon {}", self.dt, self.horizon));
        }
        if self.paths == 0 {
            return bad("paths must be positive".into());
        }
        if self.record_times.iter().any(|t| !(*t >= 0.0 && *t <= self.horizon)) {
            return bad("record times must lie in [0, horizon]".into());
        }
        if self.record_times.windows(2).any(|w| w[1] < w[0]) {
            return bad("record times must be sorted".into());
        }
        Ok(())
    }

    /// Step index at which each record time is sampled (nearest grid point).
    fn record_steps(&self) -> Vec<usize> {
        self.record_times.iter().map(|t| (t / self.dt).round() as usize).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub time: f64,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(paths)`.
    pub std_error: f64,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation needs a point initial condition, not a moment table")]
    NotPointInitial,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("observable has {found} variables, model has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("path {path} blew up at t = {time}: |{variable}| = {value:e} exceeds {BLOW_UP:e}")]
    BlowUp { path: usize, time: f64, variable: String, value: f64 },
}

/// A polynomial compiled to `f64` terms.
#[derive(Debug, Clone)]
struct Compiled(Vec<(f64, Vec<u32>)>);

impl Compiled {
    fn new(p: &Polynomial) -> Self {
        Compiled(p.to_f64_terms())
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|(c, e)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) }))
            .sum()
    }
}

/// Sum by recursive halving: the reduction tree depends only on the length.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn simulate_moment(model: &SdeModel, alpha: &Monomial, cfg: &SimConfig) -> Result<Vec<MomentEstimate>, SimError> {
    if alpha.dim() != model.dim() {
        return Err(SimError::Dimension { expected: model.dim(), found: alpha.dim() });
    }
    simulate_polynomial(model, &Polynomial::monomial(alpha.clone()), cfg)
}

/// Estimates `E[f(X_t)]` at every record time.
pub fn simulate_polynomial(model: &SdeModel, f: &Polynomial, cfg: &SimConfig) -> Result<Vec<MomentEstimate>, SimError> {
    cfg.validate()?;
    if f.dim() != model.dim() {
        return Err(SimError::Dimension { expected: model.dim(), found: f.dim() });
    }
    let x0: Vec<f64> = model.initial().point().ok_or(SimError::NotPointInitial)?.iter().map(to_f64).collect();
    let drift: Vec<Compiled> = model.drift().iter().map(Compiled::new).collect();
    let diffusion: Vec<Vec<Compiled>> = model.diffusion().iter().map(|row| row.iter().map(Compiled::new).collect()).collect();
    let observable = Compiled::new(f);
    let steps = cfg.record_steps();
    let total = steps.iter().copied().max().unwrap_or(0);
    let n = model.dim();
    let m = model.brownian_dim();
    let sqrt_dt = cfg.dt.sqrt();

    let run = |path: usize| -> Result<Vec<f64>, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path as u64);
        let mut x = x0.clone();
        let mut next = x.clone();
        let mut xi = vec![0.0; m];
        let mut out = Vec::with_capacity(steps.len());
        let mut rec = 0;
        for step in 0..=total {
            while rec < steps.len() && steps[rec] == step {
                out.push(observable.eval(&x));
                rec += 1;
            }
            if step == total {
                break;
            }
            for z in xi.iter_mut() {
                *z = StandardNormal.sample(&mut rng);
            }
            for i in 0..n {
                let noise: f64 = diffusion[i].iter().zip(&xi).map(|(s, z)| s.eval(&x) * z).sum();
                next[i] = x[i] + drift[i].eval(&x) * cfg.dt + noise * sqrt_dt;
            }
            std::mem::swap(&mut x, &mut next);
            if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(v.abs() <= BLOW_UP)) {
                return Err(SimError::BlowUp {
                    path,
                    time: (step + 1) as f64 * cfg.dt,
                    variable: model.variables()[i].clone(),
                    value: *v,
                });
            }
        }
        Ok(out)
    };

    let results: Vec<Result<Vec<f64>, SimError>> = (0..cfg.paths).into_par_iter().map(run).collect();
    let mut per_path = Vec::with_capacity(cfg.paths);
    for r in results {
        per_path.push(r?);
    }
    let count = cfg.paths as f64;
    Ok(cfg
        .record_times
        .iter()
        .enumerate()
        .map(|(j, &time)| {
            let values: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
            let mean = pairwise_sum(&values) / count;
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = if cfg.paths > 1 { pairwise_sum(&sq) / (count - 1.0) } else { 0.0 };
            MomentEstimate { time, mean, std_error: (var / count).sqrt(), paths: cfg.paths }
        })
        .collect())
}

/// CSV with header `time,mean,std_error,paths`.
pub fn to_csv(estimates: &[MomentEstimate]) -> String {
    let mut out = String::from("time,mean,std_error,paths\n");
    for e in estimates {
        out += &format!("{},{},{},{}\n", e.time, e.mean, e.std_error, e.paths);
    }
    out
}
