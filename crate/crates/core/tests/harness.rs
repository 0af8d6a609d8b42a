use qqueue::harness::io::{from_csv, sidecar_path, to_csv, write_csv_with_sidecar};
use qqueue::harness::{
    run_comparison, run_sensitivity, DesSettings, GridRange, QuantumSettings, Scenario, SweepSpec,
};
use qqueue::metrics::ComparisonRow;
use qqueue::theory::{metrics, TheoryInput};

fn quick() -> (QuantumSettings, DesSettings) {
    (
        QuantumSettings { steps: 50, ..QuantumSettings::default() },
        DesSettings { horizon_events: 50_000, ..DesSettings::default() },
    )
}

#[test]
fn comparison_theory_column_is_closed_form() {
    let (q, d) = quick();
    for sc in Scenario::ALL {
        let r = run_comparison(sc, 5, &q, &d).unwrap();
        let t = metrics(&TheoryInput::for_qubits(sc.lambda(), sc.mu(), 5).unwrap()).unwrap();
        let by_name = |m: &str| r.rows.iter().find(|row| row.metric == m).unwrap().theory;
        assert_eq!(by_name("Ls"), Some(t.ls));
        assert_eq!(by_name("Lq"), Some(t.lq));
        assert_eq!(by_name("lambda_eff"), Some(t.lambda_eff));
        assert_eq!(r.rows.len(), 5);
        assert!(r.rows.iter().all(|row| row.des.is_some()));
        let flagged = r.rows.iter().any(|row| row.flags.iter().any(|f| f == "reference_mismatch"));
        assert_eq!(flagged, sc == Scenario::High, "{sc}");
    }
}

#[test]
fn comparison_csv_round_trips_through_files() {
    let (q, d) = quick();
    let r = run_comparison(Scenario::Moderate, 5, &q, &d).unwrap();
    let csv = to_csv(&r.rows).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    write_csv_with_sidecar(&path, &csv, &r.sim_params).unwrap();
    let back: Vec<ComparisonRow> = from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(to_csv(&back).unwrap(), csv);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(side["steps"], 50);
}

#[test]
fn small_sweep_is_worker_independent() {
    let grid = GridRange::new(0.02, 0.06, 0.02).unwrap();
    let spec = SweepSpec { alpha: grid, beta: grid, n: 4, steps: 100, ..SweepSpec::default() };
    let base = to_csv(&run_sensitivity(&spec, Some(1)).unwrap()).unwrap();
    for w in [2, 5] {
        assert_eq!(to_csv(&run_sensitivity(&spec, Some(w)).unwrap()).unwrap(), base);
    }
    assert_eq!(base.lines().count(), 1 + 3 * 9);
}
