//! Queue metrics from a measured distribution, relative errors against
//! baselines, and the effective-arrival-rate error bound.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::statevector::Distribution;
use crate::theory::QueueMetrics;

/// Metric order used in every comparison table.
pub const METRIC_NAMES: [&str; 5] = ["Lq", "Ls", "Wq", "Ws", "lambda_eff"];

/// Flag set when the theoretical value is zero and the row's relative
/// error is the absolute quantum value instead.
pub const FLAG_ZERO_BASELINE: &str = "zero_baseline";
/// Flag set when either side of the comparison is absent.
pub const FLAG_UNDEFINED: &str = "undefined";

/// Reads the quantum queue metrics off a basis-state distribution.
///
/// The last basis state `2^n - 1` is the full system, so
/// `lambda_eff = lambda * (1 - p_last)`.
pub fn quantum_metrics(dist: &Distribution, lambda: f64, mu: f64) -> Result<QueueMetrics> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(invalid(format!("service rate must be > 0, got {mu}")));
    }
    let ls = dist.mean();
    let p0 = dist.get(0);
    let pk = dist.get(dist.len() - 1);
    Ok(QueueMetrics::from_parts(ls, p0, pk, lambda, mu))
}

/// First term of the effective arrival rate error bound,
/// `lambda * rho^(2^n) / (1 - rho^(2^n))`.
pub fn error_bound_first_term(lambda: f64, rho: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("error bound requires 0 <= rho < 1, got {rho}")));
    }
    if n > 62 {
        return Err(invalid(format!("qubit count {n} out of range")));
    }
    let e = (1u64 << n) as f64;
    let pow = (e * rho.ln()).exp();
    Ok(lambda * pow / -(e * rho.ln()).exp_m1())
}

/// Natural log of [`error_bound_first_term`]. Stays finite (and strictly
/// decreasing in `n`) where the bound itself underflows, e.g. `rho = 0.1`
/// at nine qubits.
pub fn error_bound_first_term_ln(lambda: f64, rho: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) || rho == 0.0 {
        return Err(invalid(format!("log error bound requires 0 < rho < 1, got {rho}")));
    }
    if !(lambda > 0.0) {
        return Err(invalid(format!("log error bound requires lambda > 0, got {lambda}")));
    }
    if n > 62 {
        return Err(invalid(format!("qubit count {n} out of range")));
    }
    let e = (1u64 << n) as f64;
    let x = e * rho.ln();
    Ok(lambda.ln() + x - (-x.exp_m1()).ln())
}

/// Unscaled `1/sqrt(2^n)`, the order of the sampling term in the bound.
/// Its constant factor is not known, so this is reported for reference only.
pub fn sampling_term_order(n: usize) -> f64 {
    1.0 / ((1u64 << n) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub quantum: Option<f64>,
    pub theory: Option<f64>,
    pub des: Option<f64>,
    pub rel_err_qt: Option<f64>,
    pub flags: Vec<String>,
}

fn pick(m: &QueueMetrics, name: &str) -> Option<f64> {
    match name {
        "Lq" => Some(m.lq),
        "Ls" => Some(m.ls),
        "Wq" => m.wq,
        "Ws" => m.ws,
        "lambda_eff" => Some(m.lambda_eff),
        _ => None,
    }
}

/// `|q - t| / |t|`, or `|q|` with a flag when `t == 0`.
pub fn relative_error(q: f64, t: f64) -> (f64, Option<&'static str>) {
    if t == 0.0 {
        (q.abs(), Some(FLAG_ZERO_BASELINE))
    } else {
        ((q - t).abs() / t.abs(), None)
    }
}

pub fn compare(
    q: &QueueMetrics,
    t: &QueueMetrics,
    d: Option<&QueueMetrics>,
) -> Vec<ComparisonRow> {
    METRIC_NAMES
        .iter()
        .map(|&name| {
            let quantum = pick(q, name);
            let theory = pick(t, name);
            let des = d.and_then(|d| pick(d, name));
            let mut flags = Vec::new();
            let rel_err_qt = match (quantum, theory) {
                (Some(qv), Some(tv)) => {
                    let (e, flag) = relative_error(qv, tv);
                    flags.extend(flag.map(String::from));
                    Some(e)
                }
                _ => {
                    flags.push(FLAG_UNDEFINED.to_string());
                    None
                }
            };
            ComparisonRow { metric: name.to_string(), quantum, theory, des, rel_err_qt, flags }
        })
        .collect()
}
