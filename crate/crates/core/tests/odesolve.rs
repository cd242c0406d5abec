use sdemoment::model::corpus;
use sdemoment::odesolve::{solve_exact_vector, AugmentedSystem};
use sdemoment::poly::rational::{int, rat};
use sdemoment::{
    build_closure, eval_numeric, linear_functional_moment, markov_tail_bound, parse_polynomial, solve_closed_form,
    solve_closed_form_float, ClosureBudget, FunctionalOutcome, LinearFunctional, Monomial, MomentSystem, Rational,
    Unsupported,
};

fn system(name: &str, alpha: &[u32]) -> MomentSystem {
    let model = corpus::load(name).unwrap();
    build_closure(&model, &Monomial::new(alpha.to_vec()), ClosureBudget::default()).unwrap().closed().unwrap()
}

fn functional(name: &str, expr: &str) -> LinearFunctional {
    let model = corpus::load(name).unwrap();
    let p = parse_polynomial(expr, model.variables()).unwrap();
    match linear_functional_moment(&model, &p, ClosureBudget::default()).unwrap() {
        FunctionalOutcome::Closed(f) => f,
        FunctionalOutcome::Diverged(r) => panic!("diverged: {r:?}"),
    }
}

fn example1(t: f64) -> f64 {
    1.0 / 3.0 + 2.0 / 3.0 * (-3.0 * t).exp() + (-t / 4.0 - 11.0 / 8.0) * (-2.0 * t).exp()
        + (0.75 * t * t + t + 0.375) * (-4.0 * t).exp()
}

fn consensus_formula(t: f64) -> f64 {
    let s = 17f64.sqrt();
    ((17.0 - 3.0 * s) * ((s - 7.0) * t / 2.0).exp() + (17.0 + 3.0 * s) * (-(s + 7.0) * t / 2.0).exp()) / 34.0
}

/// Solved by hand from the model: E[v1] = 1 - e^{-t}, E[(v1 - 1)^2] = 1/2 + e^{-2t}/2,
/// E[v2] = 1/2 - e^{-2t}/2, then integrate the positions from (1, 0).
fn vehicles_formula(t: f64) -> f64 {
    0.25 + t / 2.0 + (-t).exp() - (-2.0 * t).exp() / 4.0
}

#[test]
fn example1_exact_terms() {
    let cf = solve_closed_form(&system("ou-env", &[0, 2])).unwrap();
    let terms = cf.exact_terms().unwrap();
    let want: Vec<(Rational, Vec<Rational>)> = vec![
        (int(0), vec![rat(1, 3)]),
        (int(-2), vec![rat(-11, 8), rat(-1, 4)]),
        (int(-3), vec![rat(2, 3)]),
        (int(-4), vec![rat(3, 8), int(1), rat(3, 4)]),
    ];
    assert_eq!(terms, want);
    assert_eq!(cf.to_string(), "1/3 + (-11/8 - 1/4*t)*exp(-2*t) + 2/3*exp(-3*t) + (3/8 + t + 3/4*t^2)*exp(-4*t)");
    assert!(cf.eval(0.0).abs() < 1e-15);
    for t in [0.1, 0.5, 1.0, 3.0] {
        assert!((cf.eval(t) - example1(t)).abs() < 1e-14);
    }
}

#[test]
fn ou_env_numeric_steady_state() {
    let ms = system("ou-env", &[0, 2]);
    let out = eval_numeric(&ms, &[0.0, 1.0, 50.0]).unwrap();
    assert_eq!(out[0][0], 0.0);
    assert!((out[1][0] - example1(1.0)).abs() < 1e-12);
    assert!((out[2][0] - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn vehicles_distance_mean() {
    let f = functional("vehicles", "p1 - p2");
    let cf = f.closed_form().unwrap();
    assert_eq!(cf.to_string(), "(1/4 + 1/2*t) + exp(-t) - 1/4*exp(-2*t)");
    assert_eq!(f.initial_value(), int(1));
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
    let numeric = f.eval_numeric(&grid).unwrap();
    for (t, v) in grid.iter().zip(numeric) {
        assert!((v - vehicles_formula(*t)).abs() < 1e-12, "t = {t}");
        assert!((cf.eval(*t) - vehicles_formula(*t)).abs() < 1e-14);
    }
}

#[test]
fn consensus_float_spectrum() {
    let f = functional("consensus", "(x1 - x2)^2");
    match f.closed_form() {
        Err(Unsupported::IrrationalSpectrum { factor }) => {
            assert_eq!(factor.display_in("t").to_string(), "t^2 + 7*t + 8")
        }
        other => panic!("expected unsupported, got {other:?}"),
    }
    let cf = f.closed_form_float().unwrap();
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        assert!((cf.eval(t) - consensus_formula(t)).abs() < 1e-9, "t = {t}");
    }
    for t in [10.0, 12.0, 15.0] {
        let bound = markov_tail_bound(cf.eval(t), 0.1, 2).unwrap();
        assert!(bound <= (-t).exp(), "t = {t}: {bound}");
    }
}

#[test]
fn single_monomial_functional_matches_plain_pipeline() {
    let f = functional("ou-env", "x2^2");
    let plain = solve_closed_form(&system("ou-env", &[0, 2])).unwrap();
    assert_eq!(f.closed_form().unwrap(), plain);
    assert_eq!(f.system(), &system("ou-env", &[0, 2]));
}

#[test]
fn markov_bound_edge_cases() {
    assert_eq!(markov_tail_bound(0.0, 0.5, 2).unwrap(), 0.0);
    assert_eq!(markov_tail_bound(1.0, 1.0, 2).unwrap(), 1.0);
    assert!(markov_tail_bound(1.0, 0.0, 2).is_err());
    assert!(markov_tail_bound(1.0, -1.0, 2).is_err());
    assert!(markov_tail_bound(1.0, 1.0, 3).is_err());
}

#[test]
fn eval_numeric_rejects_bad_times() {
    let ms = system("ou-env", &[0, 2]);
    assert!(eval_numeric(&ms, &[1.0, 0.5]).is_err());
    assert!(eval_numeric(&ms, &[-1.0]).is_err());
    assert!(eval_numeric(&ms, &[1e300]).is_err());
}

const TIMES: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

fn benchmark_systems() -> Vec<(String, MomentSystem)> {
    corpus::PUBLISHED
        .iter()
        .filter(|r| r.prosolvable)
        .map(|r| (format!("{} {:?}", r.benchmark, r.alpha), system(r.benchmark, r.alpha)))
        .collect()
}

#[test]
fn closed_forms_agree_with_matrix_exponential() {
    for (label, ms) in benchmark_systems() {
        let cf = match solve_closed_form(&ms) {
            Ok(cf) => cf,
            Err(Unsupported::IrrationalSpectrum { .. }) => solve_closed_form_float(&ms).unwrap(),
            Err(e) => panic!("{label}: {e}"),
        };
        let numeric = eval_numeric(&ms, &TIMES).unwrap();
        for (t, m) in TIMES.iter().zip(numeric) {
            let (a, b) = (cf.eval(*t), m[0]);
            let ok = (a - b).abs() <= 1e-10 || (a - b).abs() <= 1e-8 * b.abs();
            assert!(ok, "{label} at t = {t}: closed form {a} vs numeric {b}");
        }
    }
}

#[test]
fn exact_solutions_satisfy_the_ode() {
    let mut exact = 0;
    for (label, ms) in benchmark_systems() {
        if let Ok(sol) = solve_exact_vector(&ms) {
            sol.verify(&ms).unwrap_or_else(|e| panic!("{label}: {e}"));
            assert_eq!(sol.components[0].at_zero(), ms.m0[0]);
            exact += 1;
        }
    }
    assert!(exact >= 8, "only {exact} systems had rational spectra");
}

#[test]
fn propagator_semigroup() {
    for (label, ms) in benchmark_systems() {
        let aug = AugmentedSystem::new(&ms);
        for (s, t) in [(0.3, 0.7), (1.0, 2.5)] {
            let lhs = aug.propagator(s + t).unwrap();
            let rhs = aug.propagator(s).unwrap() * aug.propagator(t).unwrap();
            let scale = lhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let diff = (&lhs - &rhs).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(diff <= 1e-9 * scale, "{label}: {diff}");
        }
    }
}
