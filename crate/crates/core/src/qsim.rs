//! Time-stepped quantum M/M/1/K simulation.
//!
//! Starting from `|0...0>`, each step applies the arrival gate to every
//! qubit, then the service gate to every qubit, then the Grover step
//! `grover_iters` times. The marked set is fixed for the whole run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{arrival_gate, event_angle, service_gate, Gate2, GateParams};
use crate::grover::{determine_marked_states, grover_apply, MarkedStateSet, Thresholds};
use crate::metrics::quantum_metrics;
use crate::statevector::{check_qubits, Distribution, StateVector};
use crate::theory::{expected_in_system, TheoryInput};

/// Where the amplification index `k` of each step comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KSource {
    /// `k` is the step index `0..T`.
    #[default]
    StepIndex,
    /// `k = 0` every step.
    ConstantZero,
    /// `k` is the rounded mean basis index of the state before the step.
    ExpectedLength,
}

impl KSource {
    pub const ALL: [KSource; 3] = [KSource::StepIndex, KSource::ConstantZero, KSource::ExpectedLength];

    pub fn as_str(&self) -> &'static str {
        match self {
            KSource::StepIndex => "step-index",
            KSource::ConstantZero => "constant-zero",
            KSource::ExpectedLength => "expected-length",
        }
    }
}

impl fmt::Display for KSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KSource::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown k source {s:?}")))
    }
}

/// Default shot count when sampling is enabled.
pub const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dt: f64,
    pub steps: u64,
    pub n: usize,
    pub thresholds: Thresholds,
    pub grover_iters: u32,
    pub k_source: KSource,
    pub seed: u64,
    /// When set, the final distribution is also sampled this many times.
    pub shots: Option<u64>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            lambda: 1.0,
            mu: 10.0,
            alpha: 0.1,
            beta: 0.1,
            dt: 0.1,
            steps: 1000,
            n: 5,
            thresholds: Thresholds::default(),
            grover_iters: 1,
            k_source: KSource::StepIndex,
            seed: 0,
            shots: None,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n)?;
        self.thresholds.validate()?;
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid(format!("service rate must be > 0, got {}", self.mu)));
        }
        GateParams { rate: self.lambda, k: 0, amp: self.alpha, dt: self.dt }.validate()?;
        GateParams { rate: self.mu, k: 0, amp: self.beta, dt: self.dt }.validate()?;
        if self.shots == Some(0) {
            return Err(invalid("shots must be >= 1 when set"));
        }
        Ok(())
    }

    pub fn arrival_params(&self, k: u64) -> GateParams {
        GateParams { rate: self.lambda, k, amp: self.alpha, dt: self.dt }
    }

    pub fn service_params(&self, k: u64) -> GateParams {
        GateParams { rate: self.mu, k, amp: self.beta, dt: self.dt }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub k: u64,
    pub theta_a: f64,
    pub theta_s: f64,
    pub arrival_saturated: bool,
    pub service_saturated: bool,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub params: SimParams,
    pub marked_states: MarkedStateSet,
    pub steps: Vec<StepRecord>,
    pub final_state: StateVector,
    pub final_distribution: Distribution,
    pub counts: Option<BTreeMap<usize, u64>>,
}

impl SimTrace {
    pub fn any_saturated(&self) -> bool {
        self.steps.iter().any(|s| s.arrival_saturated || s.service_saturated)
    }

    /// Distribution used for metrics: the sampled one when shots were
    /// taken, otherwise the exact one.
    pub fn measured_distribution(&self) -> Result<Distribution> {
        match &self.counts {
            Some(c) => Distribution::from_counts(c, self.final_distribution.len()),
            None => Ok(self.final_distribution.clone()),
        }
    }
}

pub fn simulate(p: &SimParams) -> Result<SimTrace> {
    p.validate()?;
    let mut state = StateVector::zero_state(p.n)?;
    let marked = determine_marked_states(p.lambda, p.mu, p.n, &p.thresholds)?;
    let mut records = Vec::with_capacity(p.steps as usize);

    for step in 0..p.steps {
        let k = match p.k_source {
            KSource::StepIndex => step,
            KSource::ConstantZero => 0,
            KSource::ExpectedLength => state.probabilities().mean().round() as u64,
        };
        let ap = p.arrival_params(k);
        let sp = p.service_params(k);
        state.apply_uniform(&arrival_gate(&ap)?)?;
        state.apply_uniform(&service_gate(&sp)?)?;
        for _ in 0..p.grover_iters {
            grover_apply(&mut state, &marked)?;
        }
        records.push(StepRecord {
            step,
            k,
            theta_a: event_angle(&ap)?,
            theta_s: event_angle(&sp)?,
            arrival_saturated: ap.saturated(),
            service_saturated: sp.saturated(),
            distribution: state.probabilities(),
        });
    }

    let final_distribution = state.probabilities();
    let counts = match p.shots {
        Some(shots) => Some(final_distribution.sample(shots, p.seed)?),
        None => None,
    };
    Ok(SimTrace {
        params: *p,
        marked_states: marked,
        steps: records,
        final_state: state,
        final_distribution,
        counts,
    })
}

/// One named numeric check in the worked-example report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DemoCheck {
    fn new(name: &str, expected: f64, actual: f64, tolerance: f64) -> Self {
        DemoCheck {
            name: name.to_string(),
            expected,
            actual,
            tolerance,
            pass: (actual - expected).abs() <= tolerance,
        }
    }
}

/// Intermediate quantities of the three-qubit worked example
/// (`lambda = 2`, `mu = 3`, `alpha = beta = 0.1`, `dt = 0.1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub params: SimParams,
    pub theta_a: f64,
    pub theta_s: f64,
    pub arrival_matrix: [[f64; 2]; 2],
    pub service_matrix: [[f64; 2]; 2],
    pub step_matrix: [[f64; 2]; 2],
    /// Product of the arrival and service matrices after truncating each to
    /// three decimals, the precision the reference matrices are quoted at.
    /// Informational only; checks use the exact `step_matrix`.
    pub step_matrix_from_rounded: [[f64; 2]; 2],
    /// Single-qubit amplitudes `(<0|, <1|)` after one step.
    pub step1_qubit_amplitudes: [f64; 2],
    /// Qubit-0 marginal `(p(0), p(1))` of the full register after one step.
    pub step1_qubit0_marginal: [f64; 2],
    pub marked_states: Vec<usize>,
    pub theory_ls: f64,
    /// `Ls` read off the reference final distribution
    /// `{0.201, 0.280, 0.313, 0.109, 0.097}`.
    pub reference_distribution_ls: f64,
    pub final_norm_defect: f64,
    pub checks: Vec<DemoCheck>,
}

impl DemoReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn demo_42() -> Result<DemoReport> {
    const TOL: f64 = 1e-3;
    let params = SimParams {
        lambda: 2.0,
        mu: 3.0,
        alpha: 0.1,
        beta: 0.1,
        dt: 0.1,
        steps: 1,
        n: 3,
        thresholds: Thresholds::default(),
        grover_iters: 0,
        k_source: KSource::ConstantZero,
        seed: 0,
        shots: None,
    };
    let ap = params.arrival_params(0);
    let sp = params.service_params(0);
    let a = arrival_gate(&ap)?;
    let s = service_gate(&sp)?;
    let sa: Gate2 = s * a;
    let theta_a = event_angle(&ap)?;
    let theta_s = event_angle(&sp)?;

    let trace = simulate(&params)?;
    let marginal1 = trace.final_state.qubit_one_probability(0)?;
    let marginal = [1.0 - marginal1, marginal1];
    let amps = [sa.entry(0, 0).re, sa.entry(1, 0).re];

    let theory_ls = expected_in_system(&TheoryInput::for_qubits(params.lambda, params.mu, params.n)?)?;
    let mut reference = vec![0.0; 8];
    reference[..5].copy_from_slice(&[0.201, 0.280, 0.313, 0.109, 0.097]);
    let reference_ls = quantum_metrics(&Distribution::new(reference)?, params.lambda, params.mu)?.ls;

    let trunc3 = |g: &Gate2| {
        let m = g.re();
        Gate2::from_real(m.map(|row| row.map(|x| (x * 1e3).trunc() / 1e3)))
    };
    let sa_rounded = (trunc3(&s) * trunc3(&a)).re();

    let mut checks = vec![
        DemoCheck::new("theta_a", 0.927, theta_a, TOL),
        DemoCheck::new("theta_s", 1.159, theta_s, TOL),
    ];
    let matrices = [
        ("arrival", a.re(), [[0.894, -0.447], [0.447, 0.894]]),
        ("service", s.re(), [[0.836, -0.547], [0.547, 0.836]]),
        ("step", sa.re(), [[0.502, -0.862], [0.862, 0.502]]),
    ];
    for (name, got, want) in &matrices {
        for r in 0..2 {
            for c in 0..2 {
                checks.push(DemoCheck::new(&format!("{name}[{r}][{c}]"), want[r][c], got[r][c], TOL));
            }
        }
    }
    checks.push(DemoCheck::new("step1_amplitude_0", 0.502, amps[0], TOL));
    checks.push(DemoCheck::new("step1_amplitude_1", 0.862, amps[1], TOL));
    checks.push(DemoCheck::new("step1_qubit0_p0", 0.252, marginal[0], TOL));
    checks.push(DemoCheck::new("step1_qubit0_p1", 0.743, marginal[1], 0.006));
    checks.push(DemoCheck::new("theory_ls", 1.675, theory_ls, TOL));
    checks.push(DemoCheck::new("reference_distribution_ls", 1.621, reference_ls, TOL));
    let final_norm_defect = (trace.final_state.norm_sqr() - 1.0).abs();
    checks.push(DemoCheck::new("final_norm_defect", 0.0, final_norm_defect, 1e-9));

    Ok(DemoReport {
        params,
        theta_a,
        theta_s,
        arrival_matrix: a.re(),
        service_matrix: s.re(),
        step_matrix: sa.re(),
        step_matrix_from_rounded: sa_rounded,
        step1_qubit_amplitudes: amps,
        step1_qubit0_marginal: marginal,
        marked_states: trace.marked_states.states().to_vec(),
        theory_ls,
        reference_distribution_ls: reference_ls,
        final_norm_defect,
        checks,
    })
}
