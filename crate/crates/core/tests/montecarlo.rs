use sdemoment::model::corpus;
use sdemoment::{
    build_closure, eval_numeric, parse_polynomial, simulate_moment, simulate_polynomial, ClosureBudget, Monomial,
    SimConfig,
};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let model = corpus::load("ou-env").unwrap();
    let alpha = Monomial::new(vec![0, 2]);
    let cfg = SimConfig::new(vec![0.25, 0.5]).with_dt(1e-2).with_paths(4000).with_seed(17);
    let runs: Vec<_> = [1, 2, 8].iter().map(|&k| in_pool(k, || simulate_moment(&model, &alpha, &cfg).unwrap())).collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    let other_seed = simulate_moment(&model, &alpha, &cfg.clone().with_seed(18)).unwrap();
    assert_ne!(runs[0], other_seed);
}

#[test]
fn euler_bias_shrinks_with_step() {
    // E[x1^2] = (1 - e^{-2t}) / 2 for the first coordinate of ou-env.
    let model = corpus::load("ou-env").unwrap();
    let exact = 0.5 * (1.0 - (-4f64).exp());
    let alpha = Monomial::new(vec![2, 0]);
    let bias: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&dt| {
            let cfg = SimConfig::new(vec![2.0]).with_dt(dt).with_paths(1_000_000).with_seed(5);
            let est = &simulate_moment(&model, &alpha, &cfg).unwrap()[0];
            (est.mean - exact).abs()
        })
        .collect();
    assert!(bias[0] > bias[1] && bias[1] > bias[2], "bias {bias:?}");
}

#[test]
fn ou_env_second_moment_within_four_standard_errors() {
    let model = corpus::load("ou-env").unwrap();
    let alpha = Monomial::new(vec![0, 2]);
    let ms = build_closure(&model, &alpha, ClosureBudget::default()).unwrap().closed().unwrap();
    let times = [0.5, 1.0];
    let exact = eval_numeric(&ms, &times).unwrap();
    let cfg = SimConfig::new(times.to_vec()).with_dt(2e-3).with_paths(20_000).with_seed(1);
    let est = simulate_moment(&model, &alpha, &cfg).unwrap();
    for (e, m) in est.iter().zip(exact) {
        assert!((e.mean - m[0]).abs() <= 4.0 * e.std_error, "t = {}: {} vs {}", e.time, e.mean, m[0]);
    }
}

#[test]
fn vehicles_distance_matches_exact_solution() {
    let model = corpus::load("vehicles").unwrap();
    let f = parse_polynomial("p1 - p2", model.variables()).unwrap();
    let cfg = SimConfig::new(vec![1.0, 2.0]).with_dt(2e-3).with_paths(20_000).with_seed(2);
    let est = simulate_polynomial(&model, &f, &cfg).unwrap();
    for e in est {
        let t = e.time;
        let exact = 0.25 + t / 2.0 + (-t).exp() - (-2.0 * t).exp() / 4.0;
        assert!((e.mean - exact).abs() <= 4.0 * e.std_error, "t = {t}: {} vs {exact}", e.mean);
    }
}
