use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use sdemoment::closure::{verify_closed, BudgetLimit, DivergenceReport};
use sdemoment::model::{corpus, load_model};
use sdemoment::montecarlo::to_csv;
use sdemoment::odesolve::solve_exact_vector;
use sdemoment::prosolve::{certify_closure, check_prosolvable, ProsolvableReport};
use sdemoment::{
    linear_functional_moment, simulate_polynomial, ClosedForm, ClosureBudget, FunctionalOutcome,
    LinearFunctional, Monomial, Polynomial, SdeModel, SimConfig, Unsupported,
};

use crate::args::{BudgetArgs, Cli, Command, SimArgs, TargetArgs};
use crate::report::{CertificateSummary, CheckLine, RunReport, Sample, SimComparison, TableRow};
use crate::Failure;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Check { model } => check(cli.json, &load(model)?),
        Command::Closure { model, target, budget } => closure(cli.json, &load(model)?, target, budget),
        Command::Moment { model, target, budget, times, closed_form, certify, simulate, sim } => {
            let opts = MomentOptions { times, closed_form: *closed_form, certify: *certify, simulate: *simulate, sim };
            moment(cli.json, &load(model)?, target, budget, &opts)
        }
        Command::Simulate { model, target, times, sim } => simulate(cli.json, &load(model)?, target, times, sim),
        Command::Table1 => table1(cli.json),
        Command::Verify { model, target, budget } => verify(cli.json, &load(model)?, target, budget),
    }
}

fn load(path: &Path) -> Result<SdeModel, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::Model(format!("{}: {e}", path.display())))?;
    load_model(&src).map_err(|e| Failure::Model(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

/// The target as a polynomial, plus the exponent vector when given as `--alpha`.
fn target(model: &SdeModel, t: &TargetArgs) -> Result<(Polynomial, Option<Monomial>), Failure> {
    if let Some(alpha) = &t.alpha {
        let exps: Vec<u32> = alpha
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("--alpha expects comma-separated exponents, got {alpha:?}")))?;
        if exps.len() != model.dim() {
            return Err(Failure::Usage(format!("--alpha has {} entries, model has {} variables", exps.len(), model.dim())));
        }
        let m = Monomial::new(exps);
        return Ok((Polynomial::monomial(m.clone()), Some(m)));
    }
    let expr = t.expr.as_deref().expect("clap requires one target");
    let p = model.parse(expr).map_err(|e| Failure::Usage(format!("--expr {expr:?}: {e}")))?;
    Ok((p, None))
}

fn target_label(model: &SdeModel, p: &Polynomial, alpha: Option<&Monomial>) -> String {
    match alpha {
        Some(m) => m.display_with(model.variables()).to_string(),
        None => p.display_with(model.variables()).to_string(),
    }
}

fn budget(b: &BudgetArgs) -> Result<ClosureBudget, Failure> {
    ClosureBudget::new(b.budget, b.max_degree).map_err(|e| Failure::Usage(e.to_string()))
}

fn parse_times(src: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--times expects start:stop:step or a comma list, got {src:?}"));
    let times: Vec<f64> = if let [a, b, c] = src.split(':').collect::<Vec<_>>()[..] {
        let (start, stop, step): (f64, f64, f64) =
            (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        src.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::Usage("times must be non-negative and sorted".into()));
    }
    Ok(times)
}

fn render_divergence(model: &SdeModel, d: &DivergenceReport) -> String {
    let chain: Vec<String> = d.witness_chain.iter().map(Monomial::to_string).collect();
    let names: Vec<String> = d.witness_chain.iter().map(|m| m.display_with(model.variables()).to_string()).collect();
    format!(
        "closure diverged: {} budget exceeded after {} monomials\nwitness chain: {}\n               {}\n",
        match d.exceeded {
            BudgetLimit::MonomialCount => "monomial-count",
            BudgetLimit::Degree => "degree",
        },
        d.visited_count,
        chain.join(" -> "),
        names.join(" -> ")
    )
}

fn functional(json: bool, model: &SdeModel, p: &Polynomial, b: ClosureBudget) -> Result<(LinearFunctional, f64), Failure> {
    let start = Instant::now();
    let outcome = linear_functional_moment(model, p, b).map_err(|e| Failure::Model(e.to_string()))?;
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        FunctionalOutcome::Closed(f) => Ok((f, secs)),
        FunctionalOutcome::Diverged(d) => {
            if json {
                print_json(&serde_json::json!({ "model": model.name(), "diverged": d }));
            } else {
                print!("{}", render_divergence(model, &d));
            }
            Err(Failure::Diverged)
        }
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    model: &'a str,
    prosolvable: bool,
    partition: Option<String>,
    violation: Option<String>,
    partition_check: Option<String>,
}

fn check_output<'a>(model: &'a SdeModel, r: &ProsolvableReport) -> CheckOutput<'a> {
    let vars = model.variables();
    CheckOutput {
        model: model.name(),
        prosolvable: r.prosolvable,
        partition: r.partition.as_ref().map(|p| p.display_with(vars).to_string()),
        violation: r.violation.as_ref().map(|v| {
            let comp: Vec<&str> = v.component.iter().map(|&i| vars[i].as_str()).collect();
            format!(
                "nonlinear dependency {} -> {} inside component {{{}}}",
                vars[v.edge.from],
                vars[v.edge.to],
                comp.join(",")
            )
        }),
        partition_check: r.partition_check.as_ref().map(|v| v.to_string()),
    }
}

fn check(json: bool, model: &SdeModel) -> Result<(), Failure> {
    let report = check_prosolvable(model);
    let out = check_output(model, &report);
    if json {
        print_json(&out);
    } else {
        println!("model: {}", out.model);
        println!("prosolvable: {}", if out.prosolvable { "yes" } else { "no" });
        if let Some(p) = &out.partition {
            println!("partition: {p}");
        }
        if let Some(v) = &out.violation {
            println!("violation: {v}");
        }
        if let Some(v) = &out.partition_check {
            println!("partition check failed: {v}");
        }
    }
    if report.prosolvable {
        Ok(())
    } else {
        Err(Failure::NotProsolvable)
    }
}

fn closure(json: bool, model: &SdeModel, t: &TargetArgs, b: &BudgetArgs) -> Result<(), Failure> {
    let (p, _) = target(model, t)?;
    let (f, secs) = functional(json, model, &p, budget(b)?)?;
    let ms = f.system();
    if json {
        println!("{}", ms.to_json());
    } else {
        println!("|S| = {} ({secs:.3} s)", ms.dim());
        let names: Vec<String> = ms.indices.iter().map(|m| m.display_with(model.variables()).to_string()).collect();
        println!("indices: {}", names.join(", "));
        print!("{}", ms.render_rows());
    }
    Ok(())
}

struct MomentOptions<'a> {
    times: &'a str,
    closed_form: bool,
    certify: bool,
    simulate: bool,
    sim: &'a SimArgs,
}

/// Exact closed form, or the float-spectrum one, or the reason neither exists.
fn best_closed_form(f: &LinearFunctional) -> (Option<ClosedForm>, Vec<String>) {
    match f.closed_form() {
        Ok(cf) => (Some(cf), vec![]),
        Err(e @ Unsupported::IrrationalSpectrum { .. }) => {
            let mut notes = vec![format!("exact closed form unsupported: {e}")];
            match f.closed_form_float() {
                Ok(cf) => {
                    notes.push("closed form uses a floating-point spectrum".into());
                    (Some(cf), notes)
                }
                Err(e) => {
                    notes.push(format!("float closed form unsupported: {e}; numeric values only"));
                    (None, notes)
                }
            }
        }
        Err(e) => (None, vec![format!("closed form unsupported: {e}; numeric values only")]),
    }
}

fn moment(json: bool, model: &SdeModel, t: &TargetArgs, b: &BudgetArgs, opts: &MomentOptions) -> Result<(), Failure> {
    let (p, alpha) = target(model, t)?;
    let times = parse_times(opts.times)?;
    let prosolve = check_prosolvable(model);
    let (f, secs) = functional(json, model, &p, budget(b)?)?;
    let mut failures = Vec::new();
    let mut report = RunReport {
        model: model.name().to_string(),
        target: target_label(model, &p, alpha.as_ref()),
        alpha,
        prosolvable: prosolve.prosolvable,
        partition: prosolve.partition.as_ref().map(|q| q.display_with(model.variables()).to_string()),
        closure_size: f.system().dim(),
        closure_seconds: secs,
        closed_form: None,
        closed_form_text: None,
        notes: Vec::new(),
        samples: Vec::new(),
        certificate: None,
        simulation: None,
    };
    if opts.closed_form {
        let (cf, notes) = best_closed_form(&f);
        report.closed_form_text = cf.as_ref().map(ClosedForm::to_string);
        report.closed_form = cf;
        report.notes.extend(notes);
    }
    let values = f.eval_numeric(&times).map_err(|e| Failure::Model(e.to_string()))?;
    report.samples = times.iter().zip(&values).map(|(&time, &value)| Sample { time, value }).collect();

    if opts.certify {
        match &prosolve.partition {
            Some(partition) => match certify_closure(model, partition, f.system()) {
                Ok(c) => report.certificate = Some(CertificateSummary::from(&c)),
                Err(e) => failures.push(format!("certificate: {e}")),
            },
            None => report.notes.push("no certificate: model is not pro-solvable".into()),
        }
    }
    if opts.simulate {
        let cfg = SimConfig::new(times.clone()).with_dt(opts.sim.dt).with_paths(opts.sim.paths).with_seed(opts.sim.seed);
        let est = simulate_polynomial(model, &p, &cfg).map_err(|e| Failure::Model(e.to_string()))?;
        let rows: Vec<SimComparison> = est
            .iter()
            .zip(&values)
            .map(|(e, &exact)| SimComparison {
                time: e.time,
                exact,
                mean: e.mean,
                std_error: e.std_error,
                paths: e.paths,
                pass: (e.mean - exact).abs() <= 4.0 * e.std_error + 1e-12 * exact.abs().max(1.0),
            })
            .collect();
        if let Some(bad) = rows.iter().find(|r| !r.pass) {
            failures.push(format!("simulation at t = {} is {} standard errors away", bad.time, (bad.mean - bad.exact).abs() / bad.std_error));
        }
        report.simulation = Some(rows);
    }
    if json {
        print_json(&report);
    } else {
        print!("{}", report.render());
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(failures.join("; ")))
    }
}

fn simulate(json: bool, model: &SdeModel, t: &TargetArgs, times: &str, sim: &SimArgs) -> Result<(), Failure> {
    let (p, _) = target(model, t)?;
    let times = parse_times(times)?;
    let cfg = SimConfig::new(times).with_dt(sim.dt).with_paths(sim.paths).with_seed(sim.seed);
    let est = simulate_polynomial(model, &p, &cfg).map_err(|e| Failure::Model(e.to_string()))?;
    if json {
        print_json(&est);
    } else {
        print!("{}", to_csv(&est));
    }
    Ok(())
}

fn table1(json: bool) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for published in corpus::PUBLISHED.iter() {
        let model = corpus::load(published.benchmark).map_err(|e| Failure::Model(e.to_string()))?;
        let alpha = Monomial::new(published.alpha.to_vec());
        let prosolvable = check_prosolvable(&model).prosolvable;
        let start = Instant::now();
        let outcome = linear_functional_moment(&model, &Polynomial::monomial(alpha.clone()), ClosureBudget::default())
            .map_err(|e| Failure::Model(e.to_string()))?;
        let closure_seconds = start.elapsed().as_secs_f64();
        let (size, solve, solve_seconds) = match outcome {
            FunctionalOutcome::Closed(f) => {
                let start = Instant::now();
                let solve = match f.closed_form() {
                    Ok(_) => "exact",
                    Err(_) if f.closed_form_float().is_ok() => "float",
                    Err(_) => "numeric",
                };
                (f.system().dim(), solve.to_string(), start.elapsed().as_secs_f64())
            }
            FunctionalOutcome::Diverged(_) => (0, "diverged".to_string(), 0.0),
        };
        rows.push(TableRow {
            benchmark: published.benchmark.to_string(),
            moment: format!("E[{}]", alpha.display_with(model.variables())),
            degree: alpha.degree(),
            prosolvable,
            published_prosolvable: published.prosolvable,
            closure_size: size,
            published_size: published.closure_size,
            closure_seconds,
            solve,
            solve_seconds,
            matches: size == published.closure_size && prosolvable == published.prosolvable,
        });
    }
    if json {
        print_json(&rows);
    } else {
        println!(
            "{:<12} {:<14} {:>3} {:>4} {:>6} {:>9} {:>10} {:>8} {:>10}  status",
            "benchmark", "moment", "deg", "p-s", "|S|", "published", "closure_s", "solve", "solve_s"
        );
        for r in &rows {
            println!(
                "{:<12} {:<14} {:>3} {:>4} {:>6} {:>9} {:>10.4} {:>8} {:>10.4}  {}",
                r.benchmark,
                r.moment,
                r.degree,
                if r.prosolvable { "yes" } else { "no" },
                r.closure_size,
                r.published_size,
                r.closure_seconds,
                r.solve,
                r.solve_seconds,
                if r.matches { "ok" } else { "MISMATCH" }
            );
        }
    }
    let bad: Vec<String> = rows.iter().filter(|r| !r.matches).map(|r| format!("{} {}", r.benchmark, r.moment)).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("rows differ from the published table: {}", bad.join(", "))))
    }
}

const VERIFY_TIMES: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

fn verify(json: bool, model: &SdeModel, t: &TargetArgs, b: &BudgetArgs) -> Result<(), Failure> {
    let (p, _) = target(model, t)?;
    let (f, _) = functional(json, model, &p, budget(b)?)?;
    let ms = f.system();
    let mut lines = Vec::new();
    let mut push = |name: &str, status: &str, detail: String| {
        lines.push(CheckLine { name: name.into(), status: status.into(), detail })
    };

    match verify_closed(model, ms) {
        Ok(()) => push("closedness", "PASS", format!("{} indices", ms.dim())),
        Err(e) => push("closedness", "FAIL", e),
    }
    match check_prosolvable(model).partition {
        Some(partition) => match certify_closure(model, &partition, ms) {
            Ok(c) => push("certificate", "PASS", format!("max weighted degree {} <= {}", c.max_observed, c.target_degree)),
            Err(e) => push("certificate", "FAIL", e.to_string()),
        },
        None => push("certificate", "SKIP", "model is not pro-solvable".into()),
    }
    match solve_exact_vector(ms) {
        Ok(sol) => match sol.verify(ms) {
            Ok(()) => push("ode-residual", "PASS", "exact residual and initial values vanish".into()),
            Err(e) => push("ode-residual", "FAIL", e),
        },
        Err(e) => push("ode-residual", "SKIP", e.to_string()),
    }
    let (cf, _) = best_closed_form(&f);
    match (cf, f.eval_numeric(&VERIFY_TIMES)) {
        (Some(cf), Ok(values)) => {
            let worst = VERIFY_TIMES
                .iter()
                .zip(&values)
                .map(|(t, v)| {
                    let d = (cf.eval(*t) - v).abs();
                    (if d <= 1e-10 { 0.0 } else { d / (1e-8 * v.abs()) }, *t, d)
                })
                .fold((0.0f64, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            if worst.0 <= 1.0 {
                push("closed-form-vs-expm", "PASS", format!("{} closed form within 1e-8 rel / 1e-10 abs", kind(&cf)));
            } else {
                push("closed-form-vs-expm", "FAIL", format!("t = {}: difference {:e}", worst.1, worst.2));
            }
            let x0 = sdemoment::poly::rational::to_f64(&f.initial_value());
            if (cf.eval(0.0) - x0).abs() <= 1e-10 * x0.abs().max(1.0) {
                push("initial-value", "PASS", format!("m(0) = {x0}"));
            } else {
                push("initial-value", "FAIL", format!("closed form gives {} at t = 0, expected {x0}", cf.eval(0.0)));
            }
        }
        (None, _) => push("closed-form-vs-expm", "SKIP", "no closed form available".into()),
        (_, Err(e)) => push("closed-form-vs-expm", "FAIL", e.to_string()),
    }

    if json {
        print_json(&lines);
    } else {
        for l in &lines {
            println!("{:<4} {:<20} {}", l.status, l.name, l.detail);
        }
    }
    let failed: Vec<&str> = lines.iter().filter(|l| l.status == "FAIL").map(|l| l.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(failed.join(", ")))
    }
}

fn kind(cf: &ClosedForm) -> &'static str {
    match cf.scalar_kind() {
        sdemoment::ScalarKind::ExactRational => "exact",
        sdemoment::ScalarKind::Float => "float",
    }
}
