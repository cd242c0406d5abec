//! Acceptance criteria, one test per criterion.
//!
//! Each test prints a single `criterion N ... PASS|FAIL` line (visible with
//! `--nocapture`) and then asserts. Tolerances and runtime limits are fixed
//! constants below.

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use sdemoment::closure::{verify_closed, BudgetLimit};
use sdemoment::model::corpus;
use sdemoment::odesolve::solve_exact_vector;
use sdemoment::poly::rational::{int, rat};
use sdemoment::prosolve::{certify_closure, check_prosolvable};
use sdemoment::{
    build_closure, linear_functional_moment, markov_tail_bound, parse_polynomial, simulate_moment,
    simulate_polynomial, solve_closed_form, ClosureBudget, FunctionalOutcome, Generator, LinearFunctional, Monomial,
    MomentSystem, Polynomial, Rational, SimConfig, Unsupported,
};

const CONSENSUS_ABS_TOL: f64 = 1e-9;
const MC_STANDARD_ERRORS: f64 = 4.0;
const MC_DT: f64 = 1e-3;
const MC_PATHS: usize = 100_000;
const PROPERTY_CASES: u32 = 100;

fn report(n: u32, title: &str, start: Instant, limit: Duration, outcome: Result<String, String>) {
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:?}, limit {limit:?}")),
        other => other,
    };
    match &outcome {
        Ok(detail) => println!("criterion {n} {title}: PASS ({detail}; {elapsed:.2?})"),
        Err(detail) => println!("criterion {n} {title}: FAIL ({detail}; {elapsed:.2?})"),
    }
    if let Err(detail) = outcome {
        panic!("criterion {n} {title} failed: {detail}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mono(e: &[u32]) -> Monomial {
    Monomial::new(e.to_vec())
}

fn closed(name: &str, alpha: &[u32]) -> MomentSystem {
    let model = corpus::load(name).unwrap();
    build_closure(&model, &mono(alpha), ClosureBudget::default()).unwrap().closed().unwrap()
}

fn functional(name: &str, expr: &str) -> LinearFunctional {
    let model = corpus::load(name).unwrap();
    let p = parse_polynomial(expr, model.variables()).unwrap();
    match linear_functional_moment(&model, &p, ClosureBudget::default()).unwrap() {
        FunctionalOutcome::Closed(f) => f,
        FunctionalOutcome::Diverged(r) => panic!("{name} {expr} diverged: {r:?}"),
    }
}

#[test]
fn criterion_1_example_system_rows() {
    let start = Instant::now();
    let ms = closed("ou-env", &[0, 2]);
    // (row index, [(column index, coefficient)], constant)
    type Row = (&'static [u32], &'static [(&'static [u32], i64)], i64);
    let rows: [Row; 8] = [
        (&[0, 2], &[(&[0, 2], -4), (&[2, 1], 2), (&[2, 0], 1), (&[1, 1], 2)], 0),
        (&[2, 1], &[(&[2, 1], -4), (&[4, 0], 1), (&[3, 0], 1), (&[0, 1], 1)], 0),
        (&[2, 0], &[(&[2, 0], -2)], 1),
        (&[1, 1], &[(&[2, 0], 1), (&[1, 1], -3), (&[3, 0], 1)], 0),
        (&[4, 0], &[(&[2, 0], 6), (&[4, 0], -4)], 0),
        (&[3, 0], &[(&[3, 0], -3), (&[1, 0], 3)], 0),
        (&[0, 1], &[(&[2, 0], 1), (&[0, 1], -2), (&[1, 0], 1)], 0),
        (&[1, 0], &[(&[1, 0], -1)], 0),
    ];
    let outcome = (|| {
        let want: Vec<Monomial> = rows.iter().map(|r| mono(r.0)).collect();
        ensure(ms.indices == want, || format!("indices {:?}", ms.indices))?;
        for (r, (_, entries, constant)) in rows.iter().enumerate() {
            let mut row = vec![int(0); 8];
            for (col, c) in entries.iter() {
                row[want.iter().position(|m| m == &mono(col)).unwrap()] = int(*c);
            }
            ensure(ms.matrix_a[r] == row, || format!("row {} differs: {:?}", want[r], ms.matrix_a[r]))?;
            ensure(ms.vector_c[r] == int(*constant), || format!("constant of row {}", want[r]))?;
        }
        ensure(ms.m0 == vec![int(0); 8], || "initial moments".into())?;
        Ok("8 indices, all rows exact".to_string())
    })();
    report(1, "example system rows", start, Duration::from_secs(1), outcome);
}

#[test]
fn criterion_2_example_closed_form() {
    let start = Instant::now();
    let outcome = (|| {
        let cf = solve_closed_form(&closed("ou-env", &[0, 2])).map_err(|e| e.to_string())?;
        let want: Vec<(Rational, Vec<Rational>)> = vec![
            (int(0), vec![rat(1, 3)]),
            (int(-2), vec![rat(-11, 8), rat(-1, 4)]),
            (int(-3), vec![rat(2, 3)]),
            (int(-4), vec![rat(3, 8), int(1), rat(3, 4)]),
        ];
        let got = cf.exact_terms().ok_or("closed form is not exact")?;
        ensure(got == want, || format!("got {cf}"))?;
        Ok(cf.to_string())
    })();
    report(2, "example closed form", start, Duration::from_secs(1), outcome);
}

#[test]
fn criterion_3_closure_sizes() {
    let start = Instant::now();
    let expected: [(&str, &[u32], usize); 12] = [
        ("ou-env", &[0, 2], 8),
        ("ou-env", &[0, 3], 15),
        ("ou-env", &[0, 4], 24),
        ("ou-env", &[0, 5], 35),
        ("ou-env", &[0, 10], 120),
        ("gene", &[1, 0, 0, 0, 1], 23),
        ("gene", &[0, 0, 0, 0, 2], 85),
        ("gene", &[1, 0, 0, 0, 2], 115),
        ("consensus", &[1, 1], 3),
        ("vehicles", &[0, 0, 2, 0], 13),
        ("oscillator", &[0, 1, 2], 6),
        ("coupled3d", &[2, 2, 0], 3),
    ];
    let outcome = (|| {
        for (name, alpha, size) in expected {
            let got = closed(name, alpha).dim();
            ensure(got == size, || format!("{name} {alpha:?}: |S| = {got}, want {size}"))?;
        }
        Ok("12 rows".to_string())
    })();
    report(3, "closure sizes", start, Duration::from_secs(5), outcome);
}

#[test]
fn criterion_4_prosolvability_flags() {
    let start = Instant::now();
    let outcome = (|| {
        for (name, want) in [
            ("ou-env", true),
            ("gene", true),
            ("consensus", true),
            ("vehicles", true),
            ("oscillator", true),
            ("coupled3d", false),
        ] {
            let got = check_prosolvable(&corpus::load(name).unwrap()).prosolvable;
            ensure(got == want, || format!("{name}: prosolvable = {got}"))?;
        }
        let dw = check_prosolvable(&corpus::load("double-well").unwrap());
        let edge = dw.violation.ok_or("double-well accepted")?.edge;
        ensure(!dw.prosolvable && edge.nonlinear && edge.from == edge.to, || format!("double-well edge {edge:?}"))?;
        Ok("6 benchmarks, double-well self-loop".to_string())
    })();
    report(4, "pro-solvability flags", start, Duration::from_secs(1), outcome);
}

fn consensus_sqrt17(t: f64) -> f64 {
    let s = 17f64.sqrt();
    ((17.0 - 3.0 * s) * ((s - 7.0) * t / 2.0).exp() + (17.0 + 3.0 * s) * (-(s + 7.0) * t / 2.0).exp()) / 34.0
}

#[test]
fn criterion_5_consensus_tail_bound() {
    let start = Instant::now();
    let outcome = (|| {
        let cf = functional("consensus", "(x1 - x2)^2").closed_form_float().map_err(|e| e.to_string())?;
        let mut worst = 0f64;
        for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let err = (cf.eval(t) - consensus_sqrt17(t)).abs();
            worst = worst.max(err);
            ensure(err <= CONSENSUS_ABS_TOL, || format!("t = {t}: error {err:e}"))?;
        }
        for t in [10.0, 12.0, 15.0] {
            let bound = markov_tail_bound(cf.eval(t), 0.1, 2).map_err(|e| e.to_string())?;
            ensure(bound <= (-t).exp(), || format!("t = {t}: bound {bound:e} > e^-t"))?;
        }
        Ok(format!("max error {worst:.1e}"))
    })();
    report(5, "consensus tail bound", start, Duration::from_secs(1), outcome);
}

#[test]
fn criterion_6_vehicles_distance() {
    let start = Instant::now();
    let outcome = (|| {
        let cf = functional("vehicles", "p1 - p2").closed_form().map_err(|e| e.to_string())?;
        let want: Vec<(Rational, Vec<Rational>)> =
            vec![(int(0), vec![rat(3, 4)]), (int(-1), vec![rat(1, 2)]), (int(-2), vec![rat(-1, 4)])];
        let got = cf.exact_terms().ok_or("closed form is not exact")?;
        ensure(got == want, || format!("got {cf}, want 3/4 + 1/2*exp(-t) - 1/4*exp(-2*t)"))?;
        for i in 0..=100 {
            let t = f64::from(i) / 10.0;
            let v = cf.eval(t);
            ensure((0.75..=1.0).contains(&v), || format!("value {v} at t = {t} outside [3/4, 1]"))?;
        }
        Ok(cf.to_string())
    })();
    report(6, "vehicles distance", start, Duration::from_secs(1), outcome);
}

#[test]
fn criterion_7_monte_carlo_cross_validation() {
    let start = Instant::now();
    let outcome = (|| {
        let mut lines = Vec::new();
        let ou = corpus::load("ou-env").unwrap();
        let alpha = mono(&[0, 2]);
        let times = [0.5, 1.0, 2.0];
        let exact = solve_closed_form(&closed("ou-env", &[0, 2])).map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(times.to_vec()).with_dt(MC_DT).with_paths(MC_PATHS).with_seed(1);
        for e in simulate_moment(&ou, &alpha, &cfg).map_err(|e| e.to_string())? {
            let z = (e.mean - exact.eval(e.time)).abs() / e.std_error;
            lines.push(format!("ou-env t={} z={z:.2}", e.time));
            ensure(z <= MC_STANDARD_ERRORS, || format!("ou-env t = {}: {} vs {} ({z:.2} SE)", e.time, e.mean, exact.eval(e.time)))?;
        }
        let veh = corpus::load("vehicles").unwrap();
        let f = functional("vehicles", "p1 - p2");
        let exact = f.closed_form().map_err(|e| e.to_string())?;
        let diff = parse_polynomial("p1 - p2", veh.variables()).unwrap();
        let cfg = SimConfig::new(vec![1.0, 2.0]).with_dt(MC_DT).with_paths(MC_PATHS).with_seed(2);
        for e in simulate_polynomial(&veh, &diff, &cfg).map_err(|e| e.to_string())? {
            let z = (e.mean - exact.eval(e.time)).abs() / e.std_error;
            lines.push(format!("vehicles t={} z={z:.2}", e.time));
            ensure(z <= MC_STANDARD_ERRORS, || format!("vehicles t = {}: {} vs {} ({z:.2} SE)", e.time, e.mean, exact.eval(e.time)))?;
        }
        Ok(lines.join(", "))
    })();
    report(7, "Monte Carlo cross-validation", start, Duration::from_secs(600), outcome);
}

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn small_polynomial(dim: usize) -> impl Strategy<Value = Polynomial> {
    let mono = proptest::collection::vec(0u32..=2, dim).prop_map(Monomial::new);
    proptest::collection::vec((mono, rational()), 0..4).prop_map(move |t| Polynomial::from_terms(dim, t).unwrap())
}

fn generator_properties(name: &str) -> Result<(), String> {
    let model = corpus::load(name).unwrap();
    let g = Generator::new(&model);
    let dim = model.dim();
    let mut runner = TestRunner::new_with_rng(
        Config { cases: PROPERTY_CASES, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner
        .run(&(small_polynomial(dim), small_polynomial(dim), rational(), 0..dim), |(p, q, a, i)| {
            let combo = p.scale(&a).add(&q).unwrap();
            let lhs = g.apply_polynomial(&combo);
            let rhs = g.apply_polynomial(&p).scale(&a).add(&g.apply_polynomial(&q)).unwrap();
            prop_assert_eq!(lhs, rhs);
            let d = p.mul(&q).unwrap().partial(i).unwrap();
            let leibniz = p.partial(i).unwrap().mul(&q).unwrap().add(&p.mul(&q.partial(i).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(d, leibniz);
            Ok(())
        })
        .map_err(|e| format!("{name}: {e}"))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn criterion_8_property_suites() {
    let start = Instant::now();
    let outcome = (|| {
        let mut certified = 0;
        let mut residuals = 0;
        for row in corpus::PUBLISHED {
            let model = corpus::load(row.benchmark).unwrap();
            let ms = closed(row.benchmark, row.alpha);
            verify_closed(&model, &ms).map_err(|e| format!("{} {:?}: {e}", row.benchmark, row.alpha))?;
            if let Some(partition) = check_prosolvable(&model).partition {
                certify_closure(&model, &partition, &ms).map_err(|e| format!("{}: {e}", row.benchmark))?;
                certified += 1;
            }
            match solve_exact_vector(&ms) {
                Ok(sol) => {
                    sol.verify(&ms).map_err(|e| format!("{} residual: {e}", row.benchmark))?;
                    residuals += 1;
                }
                Err(Unsupported::IrrationalSpectrum { .. }) => {}
                Err(e) => return Err(format!("{}: {e}", row.benchmark)),
            }
        }
        ensure(certified == 11, || format!("{certified} certificates"))?;
        for name in corpus::NAMES {
            generator_properties(name)?;
        }
        let model = corpus::load("ou-env").unwrap();
        let cfg = SimConfig::new(vec![0.5, 1.0]).with_dt(1e-2).with_paths(5_000).with_seed(9);
        let runs: Vec<_> =
            [1, 2, 8].iter().map(|&k| in_pool(k, || simulate_moment(&model, &mono(&[0, 2]), &cfg).unwrap())).collect();
        ensure(runs[0] == runs[1] && runs[0] == runs[2], || "simulation depends on worker count".into())?;
        Ok(format!("{certified} certificates, {residuals} zero residuals, {PROPERTY_CASES} cases x 7 models"))
    })();
    report(8, "property suites", start, Duration::from_secs(120), outcome);
}

#[test]
fn criterion_9_double_well_divergence() {
    let start = Instant::now();
    let model = corpus::load("double-well").unwrap();
    let outcome = (|| {
        for (count, degree) in [(10_000, 200), (50, 10_000), (1_000, 60), (7, 30)] {
            let budget = ClosureBudget::new(count, degree).unwrap();
            let report = build_closure(&model, &mono(&[2]), budget)
                .map_err(|e| e.to_string())?
                .diverged()
                .ok_or_else(|| format!("budget ({count}, {degree}) closed"))?;
            let chain = &report.witness_chain;
            ensure(chain.first() == Some(&mono(&[2])) && chain.len() >= 2, || format!("chain {chain:?}"))?;
            for w in chain.windows(2) {
                ensure(w[1].degree() == w[0].degree() + 2, || format!("step {} -> {}", w[0], w[1]))?;
            }
            let limit_ok = match report.exceeded {
                BudgetLimit::Degree => chain.last().unwrap().degree() > degree,
                BudgetLimit::MonomialCount => report.visited_count == count,
            };
            ensure(limit_ok, || format!("budget ({count}, {degree}): {report:?}"))?;
        }
        Ok("4 budgets, chains step by 2".to_string())
    })();
    report(9, "double-well divergence", start, Duration::from_secs(1), outcome);
}
