//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its `[PASS]`/`[FAIL]` line; exits non-zero if any fail.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qqueue::des::{simulate_des, DesParams};
use qqueue::gates::{arrival_gate, service_gate, GateParams};
use qqueue::grover::{grover_apply, grover_dense, MarkedStateSet};
use qqueue::harness::io::to_csv;
use qqueue::harness::{
    run_comparison, run_convergence, run_sensitivity, DesSettings, QuantumSettings, Scenario,
    SweepSpec, DEFAULT_QUBIT_RANGE,
};
use qqueue::metrics::{error_bound_first_term, error_bound_first_term_ln, quantum_metrics};
use qqueue::qsim::demo_42;
use qqueue::statevector::{Distribution, StateVector};
use qqueue::theory::{
    metrics, metrics_from_distribution, state_probability, stationary_oracle, TheoryInput,
};

fn verdict(id: u32, title: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("[PASS] criterion {id}: {title}");
    } else {
        println!("[FAIL] criterion {id}: {title}");
        for f in failures {
            println!("         {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {id} failed");
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

const NORM_TOL: f64 = 1e-9;

fn criterion_01_worked_example_report() {
    let start = Instant::now();
    let report = demo_42().unwrap();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    for c in &report.checks {
        check(&mut failures, c.pass, || {
            format!(
                "{}: expected {} +/- {}, got {:.6} (|diff| = {:.2e})",
                c.name,
                c.expected,
                c.tolerance,
                c.actual,
                (c.actual - c.expected).abs()
            )
        });
    }
    let needed = [
        "theta_a",
        "theta_s",
        "arrival[0][0]",
        "service[0][0]",
        "step[0][0]",
        "step[1][0]",
        "step1_qubit0_p0",
        "step1_qubit0_p1",
        "theory_ls",
    ];
    for name in needed {
        check(&mut failures, report.checks.iter().any(|c| c.name == name), || format!("missing check {name}"));
    }
    check(&mut failures, report.final_norm_defect <= NORM_TOL, || {
        format!("norm defect {}", report.final_norm_defect)
    });
    check(&mut failures, elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?} >= 1 s"));
    verdict(1, "worked-example golden report within 1e-3 in < 1 s", &failures);
}

fn criterion_02_reference_distribution_ls() {
    let mut p = vec![0.0; 8];
    p[..5].copy_from_slice(&[0.201, 0.280, 0.313, 0.109, 0.097]);
    let m = quantum_metrics(&Distribution::new(p).unwrap(), 2.0, 3.0).unwrap();
    let mut failures = Vec::new();
    check(&mut failures, (m.ls - 1.621).abs() <= 1e-3, || format!("Ls = {}", m.ls));
    verdict(2, "Ls = 1.621 from the reference final distribution", &failures);
}

fn criterion_03_gate_unitarity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = GateParams {
            rate: rng.gen_range(0.0..=20.0),
            k: rng.gen_range(0..=63),
            amp: rng.gen_range(0.0..=0.5),
            dt: 1.0 - rng.gen::<f64>(), // (0, 1]
        };
        for (label, g) in [("A", arrival_gate(&p).unwrap()), ("S", service_gate(&p).unwrap())] {
            let d = g.unitarity_defect();
            worst = worst.max(d);
            check(&mut failures, d <= 1e-12, || format!("{label} defect {d:e} at {p:?}"));
        }
    }
    let elapsed = start.elapsed();
    check(&mut failures, elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"));
    println!("         worst |U^dagger U - I| = {worst:e}");
    verdict(3, "1000 random A and S gates unitary within 1e-12 in < 1 s", &failures);
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let dim = 1usize << n;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

fn criterion_04_grover_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for n in 2..=6usize {
        let dim = 1usize << n;
        for trial in 0..50 {
            let size = rng.gen_range(1..=dim);
            let mut states: Vec<usize> = (0..dim).collect();
            for i in 0..size {
                let j = rng.gen_range(i..dim);
                states.swap(i, j);
            }
            let m = MarkedStateSet::new(n, states[..size].iter().copied()).unwrap();
            let dense = grover_dense(n, &m).unwrap();
            let input = if trial % 5 == 0 { StateVector::uniform(n).unwrap() } else { random_state(n, &mut rng) };
            let want: Vec<Complex64> = dense
                .iter()
                .map(|row| row.iter().zip(input.amplitudes()).map(|(a, b)| a * b).sum())
                .collect();
            let mut got = input.clone();
            grover_apply(&mut got, &m).unwrap();
            let diff = got
                .amplitudes()
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            check(&mut failures, diff <= 1e-12, || format!("n={n} |M|={size}: max diff {diff:e}"));
        }
    }
    let m = MarkedStateSet::new(2, [3]).unwrap();
    let mut s = StateVector::uniform(2).unwrap();
    grover_apply(&mut s, &m).unwrap();
    let p = s.probabilities().get(3);
    check(&mut failures, (p - 1.0).abs() <= 1e-12, || format!("classic n=2 search p = {p}"));
    verdict(4, "Grover step equals dense matrix within 1e-12 (n = 2..6, 50 sets each)", &failures);
}

fn criterion_05_theory_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut inputs: Vec<TheoryInput> = (0..200)
        .map(|_| {
            TheoryInput::new(rng.gen_range(0.0..20.0), rng.gen_range(0.05..20.0), rng.gen_range(1..=100)).unwrap()
        })
        .collect();
    for k in [1u64, 2, 7, 31, 100] {
        let r = rng.gen_range(0.1..20.0);
        inputs.push(TheoryInput::new(r, r, k).unwrap());
    }
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for t in &inputs {
        let oracle = stationary_oracle(t).unwrap();
        for (i, o) in oracle.iter().enumerate() {
            let c = state_probability(t, i as u64).unwrap();
            worst = worst.max((c - o).abs());
            check(&mut failures, (c - o).abs() <= 1e-12, || format!("{t:?} P_{i}: {c} vs {o}"));
        }
        let closed = metrics(t).unwrap();
        let from_oracle = metrics_from_distribution(&oracle, t.lambda, t.mu);
        let pairs = [
            ("Lq", Some(closed.lq), Some(from_oracle.lq)),
            ("Ls", Some(closed.ls), Some(from_oracle.ls)),
            ("Wq", closed.wq, from_oracle.wq),
            ("Ws", closed.ws, from_oracle.ws),
            ("lambda_eff", Some(closed.lambda_eff), Some(from_oracle.lambda_eff)),
        ];
        for (name, a, b) in pairs {
            match (a, b) {
                (Some(a), Some(b)) => {
                    // metrics carry units and reach the hundreds, so the
                    // tolerance scales with magnitude above 1
                    let scaled = (a - b).abs() / b.abs().max(1.0);
                    worst = worst.max(scaled);
                    check(&mut failures, scaled <= 1e-12, || format!("{t:?} {name}: {a} vs {b}"));
                }
                (None, None) => {}
                _ => failures.push(format!("{t:?} {name}: presence differs ({a:?} vs {b:?})")),
            }
        }
    }
    println!("         worst scaled |closed form - oracle| = {worst:e}");
    verdict(5, "closed form equals balance-equation oracle within 1e-12 (205 instances)", &failures);
}

fn criterion_06_reference_theory_columns() {
    let mut failures = Vec::new();
    for sc in [Scenario::Low, Scenario::Moderate] {
        let t = metrics(&TheoryInput::for_qubits(sc.lambda(), sc.mu(), 5).unwrap()).unwrap();
        let got = [t.lq, t.ls, t.wq.unwrap(), t.ws.unwrap(), t.lambda_eff];
        for ((name, g), want) in ["Lq", "Ls", "Wq", "Ws", "lambda_eff"].iter().zip(got).zip(sc.reference_theory_k31()) {
            check(&mut failures, (g - want).abs() <= 1e-3, || format!("{sc} {name}: {g} vs {want}"));
        }
    }
    // high traffic: the reference column is not reproducible from the
    // formulas; check against the oracle and require the mismatch to be flagged
    let t_in = TheoryInput::for_qubits(9.5, 10.0, 5).unwrap();
    let t = metrics(&t_in).unwrap();
    let o = metrics_from_distribution(&stationary_oracle(&t_in).unwrap(), 9.5, 10.0);
    let pairs = [
        ("Lq", t.lq, o.lq),
        ("Ls", t.ls, o.ls),
        ("Wq", t.wq.unwrap(), o.wq.unwrap()),
        ("Ws", t.ws.unwrap(), o.ws.unwrap()),
        ("lambda_eff", t.lambda_eff, o.lambda_eff),
    ];
    for (name, a, b) in pairs {
        check(&mut failures, (a - b).abs() <= 1e-9, || format!("high {name}: {a} vs oracle {b}"));
    }
    let quick = QuantumSettings { steps: 10, ..QuantumSettings::default() };
    let des = DesSettings { horizon_events: 20_000, ..DesSettings::default() };
    let report = run_comparison(Scenario::High, 5, &quick, &des).unwrap();
    let le_row = report.rows.iter().find(|r| r.metric == "lambda_eff").unwrap();
    check(&mut failures, le_row.flags.iter().any(|f| f == "reference_mismatch"), || {
        format!("high lambda_eff row not flagged: {le_row:?}")
    });
    println!("         high traffic theory: lambda_eff = {:.4}, Ls = {:.4}", t.lambda_eff, t.ls);
    verdict(6, "reference theory columns (low, moderate) within 1e-3; high vs oracle within 1e-9", &failures);
}

fn criterion_07_des_confidence_coverage() {
    let start = Instant::now();
    let jobs: Vec<(Scenario, u64)> = Scenario::ALL
        .iter()
        .flat_map(|&sc| (0..20u64).map(move |seed| (sc, seed)))
        .collect();
    let results: Vec<(Scenario, bool, f64, f64)> = jobs
        .par_iter()
        .map(|&(sc, seed)| {
            let p = DesParams::new(sc.lambda(), sc.mu(), 31, 1000 + seed);
            let r = simulate_des(&p).unwrap();
            let t = metrics(&TheoryInput::new(sc.lambda(), sc.mu(), 31).unwrap()).unwrap();
            let inside = (r.metrics.ls - t.ls).abs() <= r.half_widths.ls;
            (sc, inside, r.metrics.ls, r.half_widths.ls)
        })
        .collect();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    for sc in Scenario::ALL {
        let covered = results.iter().filter(|r| r.0 == sc && r.1).count();
        println!("         {sc}: theoretical Ls inside 95% CI in {covered}/20 runs");
        check(&mut failures, covered >= 18, || format!("{sc}: coverage {covered}/20 < 18"));
    }
    check(&mut failures, elapsed < Duration::from_secs(120), || format!("runtime {elapsed:?}"));
    verdict(7, "DES 95% CI covers theoretical Ls in >= 18/20 runs per scenario, < 2 min", &failures);
}

fn criterion_08_error_bound() {
    let mut failures = Vec::new();
    let v = error_bound_first_term(9.5, 0.95, 5).unwrap();
    let direct = 9.5 * 0.95f64.powi(32) / (1.0 - 0.95f64.powi(32));
    check(&mut failures, (v - 2.283).abs() <= 0.01, || format!("bound at (9.5, 0.95, 5) = {v}"));
    check(&mut failures, (v - direct).abs() <= 1e-12, || format!("bound {v} vs direct {direct}"));
    for sc in Scenario::ALL {
        let logs: Vec<f64> = (2..=9).map(|n| error_bound_first_term_ln(sc.lambda(), sc.rho(), n).unwrap()).collect();
        let vals: Vec<f64> = (2..=9).map(|n| error_bound_first_term(sc.lambda(), sc.rho(), n).unwrap()).collect();
        for i in 1..logs.len() {
            check(&mut failures, logs[i] < logs[i - 1], || format!("{sc}: ln bound not decreasing at n={}", i + 2));
            // strict in f64 wherever the term is representable
            let strict = vals[i] < vals[i - 1] || (vals[i] == 0.0 && vals[i - 1] < f64::MIN_POSITIVE);
            check(&mut failures, strict, || format!("{sc}: bound not decreasing at n={}: {vals:?}", i + 2));
        }
    }
    verdict(8, "error-bound first term exact and strictly decreasing over n = 2..9", &failures);
}

fn criterion_09_convergence_and_sweep() {
    let mut failures = Vec::new();
    let q = QuantumSettings::default();
    let mut conv_rows = Vec::new();
    for sc in Scenario::ALL {
        let rows = run_convergence(sc, DEFAULT_QUBIT_RANGE, &q).unwrap();
        check(&mut failures, rows.len() == 8, || format!("{sc}: {} convergence rows", rows.len()));
        conv_rows.extend(rows);
    }
    let conv_a = to_csv(&conv_rows).unwrap();
    let mut again = Vec::new();
    for sc in Scenario::ALL {
        again.extend(run_convergence(sc, DEFAULT_QUBIT_RANGE, &q).unwrap());
    }
    check(&mut failures, to_csv(&again).unwrap() == conv_a, || "convergence CSV differs on rerun".into());

    let spec = SweepSpec::default();
    let start = Instant::now();
    let rows = run_sensitivity(&spec, None).unwrap();
    let full_sweep = start.elapsed();
    check(&mut failures, rows.len() == 675, || format!("{} sweep rows", rows.len()));
    let csv_default = to_csv(&rows).unwrap();
    for workers in [1usize, 3, 8] {
        let csv = to_csv(&run_sensitivity(&spec, Some(workers)).unwrap()).unwrap();
        check(&mut failures, csv == csv_default, || format!("sweep CSV differs with {workers} workers"));
    }
    check(&mut failures, full_sweep < Duration::from_secs(300), || format!("full sweep took {full_sweep:?}"));
    println!("         full default sweep: {full_sweep:?}");

    // annotations only: the settings behind these published percentages are
    // not stated, so they are printed next to ours rather than asserted
    let annotate = [(Scenario::Low, 3, "0.49%"), (Scenario::Moderate, 5, "0.195%"), (Scenario::High, 6, "0.097%")];
    for (sc, n, published) in annotate {
        if let Some(r) = conv_rows.iter().find(|r| r.scenario == sc && r.n == n) {
            println!("         note: {sc} n={n} rel_err {:.3}% (reference {published})", 100.0 * r.rel_err);
        }
    }
    verdict(9, "8 convergence rows per scenario; 675 sweep rows identical across reruns/workers; < 5 min", &failures);
}

fn criterion_10_norm_preservation() {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut note = |what: String, d: f64, failures: &mut Vec<String>| {
        worst = worst.max(d);
        check(failures, d <= NORM_TOL, || format!("{what}: norm defect {d:e}"));
    };
    note("demo".into(), demo_42().unwrap().final_norm_defect, &mut failures);
    let des = DesSettings { horizon_events: 20_000, ..DesSettings::default() };
    for sc in Scenario::ALL {
        let r = run_comparison(sc, 5, &QuantumSettings::default(), &des).unwrap();
        note(format!("comparison {sc}"), r.final_norm_defect, &mut failures);
        for row in run_convergence(sc, DEFAULT_QUBIT_RANGE, &QuantumSettings::default()).unwrap() {
            note(format!("convergence {sc} n={}", row.n), row.final_norm_defect, &mut failures);
        }
    }
    for row in run_sensitivity(&SweepSpec::default(), None).unwrap() {
        note(format!("sweep {} a={} b={}", row.scenario, row.alpha, row.beta), row.final_norm_defect, &mut failures);
    }
    println!("         worst | |psi|^2 - 1 | = {worst:e}");
    verdict(10, "every quantum run ends with | |psi|^2 - 1 | <= 1e-9", &failures);
}

fn main() {
    let criteria: [fn(); 10] = [
        criterion_01_worked_example_report,
        criterion_02_reference_distribution_ls,
        criterion_03_gate_unitarity,
        criterion_04_grover_matches_dense,
        criterion_05_theory_matches_oracle,
        criterion_06_reference_theory_columns,
        criterion_07_des_confidence_coverage,
        criterion_08_error_bound,
        criterion_09_convergence_and_sweep,
        criterion_10_norm_preservation,
    ];
    // verdict() prints its own details; anything else is unexpected
    std::panic::set_hook(Box::new(|info| {
        let msg = info.payload().downcast_ref::<String>().map(String::as_str).unwrap_or("");
        if !msg.starts_with("criterion ") {
            eprintln!("unexpected panic: {info}");
        }
    }));
    let failed = criteria
        .iter()
        .filter(|c| std::panic::catch_unwind(**c).is_err())
        .count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
