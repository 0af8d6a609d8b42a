//! Closed-form M/M/1/K results and an independent balance-equation oracle.
//!
//! With `rho = lambda / mu` and capacity `K`, the stationary distribution is
//! `P_i = rho^i (1 - rho) / (1 - rho^(K+1))`, uniform when `rho = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `|rho - 1|` below this routes to the `rho = 1` limit formulas.
pub const RHO_ONE_BAND: f64 = 1e-9;

/// Largest capacity accepted by [`stationary_oracle`].
pub const ORACLE_MAX_CAPACITY: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryInput {
    pub lambda: f64,
    pub mu: f64,
    /// Maximum number of customers in the system.
    pub capacity: u64,
}

impl TheoryInput {
    pub fn new(lambda: f64, mu: f64, capacity: u64) -> Result<Self> {
        let t = TheoryInput { lambda, mu, capacity };
        t.validate()?;
        Ok(t)
    }

    /// Capacity `2^n - 1` of an `n`-qubit register.
    pub fn for_qubits(lambda: f64, mu: f64, n: usize) -> Result<Self> {
        if !(1..=63).contains(&n) {
            return Err(invalid(format!("qubit count {n} out of range")));
        }
        Self::new(lambda, mu, (1u64 << n) - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid(format!("service rate must be > 0, got {}", self.mu)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid(format!("arrival rate must be >= 0, got {}", self.lambda)));
        }
        if self.capacity < 1 {
            return Err(invalid("capacity must be >= 1"));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    fn near_one(&self) -> bool {
        (self.rho() - 1.0).abs() < RHO_ONE_BAND
    }
}

/// The five queue observables plus the empty and blocking probabilities.
///
/// Waits are `None` when the effective arrival rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueMetrics {
    pub ls: f64,
    pub lq: f64,
    pub ws: Option<f64>,
    pub wq: Option<f64>,
    pub lambda_eff: f64,
    pub p0: f64,
    pub pk: f64,
}

impl QueueMetrics {
    /// Derives `Lq`, `Ws`, `Wq` from `Ls`, `P_0`, `P_K` and the rates.
    pub fn from_parts(ls: f64, p0: f64, pk: f64, lambda: f64, mu: f64) -> Self {
        let lambda_eff = lambda * (1.0 - pk);
        let lq = ls - (1.0 - p0);
        let (ws, wq) = if lambda_eff > 0.0 {
            let ws = ls / lambda_eff;
            (Some(ws), Some(ws - 1.0 / mu))
        } else {
            (None, None)
        };
        QueueMetrics { ls, lq, ws, wq, lambda_eff, p0, pk }
    }
}

/// `x^e` evaluated as `exp(e * ln x)` for `x` near 1, where repeated
/// multiplication loses digits.
fn rho_pow(t: &TheoryInput, e: f64) -> f64 {
    let d = (t.lambda - t.mu) / t.mu; // rho - 1 with a single rounding
    (e * d.ln_1p()).exp()
}

/// `1 - rho^e` without cancellation.
fn one_minus_rho_pow(t: &TheoryInput, e: f64) -> f64 {
    let d = (t.lambda - t.mu) / t.mu;
    -(e * d.ln_1p()).exp_m1()
}

/// Stationary probability of `i` customers.
pub fn state_probability(t: &TheoryInput, i: u64) -> Result<f64> {
    t.validate()?;
    if i > t.capacity {
        return Err(invalid(format!("state {i} exceeds capacity {}", t.capacity)));
    }
    let k = t.capacity as f64;
    if t.lambda == 0.0 {
        return Ok(if i == 0 { 1.0 } else { 0.0 });
    }
    if t.near_one() {
        return Ok(1.0 / (k + 1.0));
    }
    let rho = t.rho();
    let one_minus_rho = (t.mu - t.lambda) / t.mu;
    if rho < 1.0 {
        Ok(rho_pow(t, i as f64) * one_minus_rho / one_minus_rho_pow(t, k + 1.0))
    } else {
        // rewrite in r = 1/rho so nothing overflows for large K
        let inv = TheoryInput { lambda: t.mu, mu: t.lambda, capacity: t.capacity };
        let one_minus_r = (t.lambda - t.mu) / t.lambda;
        Ok(rho_pow(&inv, k - i as f64) * one_minus_r / one_minus_rho_pow(&inv, k + 1.0))
    }
}

/// Expected number in system.
///
/// `rho / (1 - rho) - (K+1) rho^(K+1) / (1 - rho^(K+1))`, or `K/2` at `rho = 1`.
pub fn expected_in_system(t: &TheoryInput) -> Result<f64> {
    t.validate()?;
    let k = t.capacity as f64;
    if t.lambda == 0.0 {
        return Ok(0.0);
    }
    if t.near_one() {
        return Ok(k / 2.0);
    }
    let rho = t.rho();
    let first = t.lambda / (t.mu - t.lambda);
    if rho < 1.0 {
        let pow = rho_pow(t, k + 1.0);
        Ok(first - (k + 1.0) * pow / one_minus_rho_pow(t, k + 1.0))
    } else {
        // (K+1) rho^(K+1) / (1 - rho^(K+1)) = -(K+1) / (1 - r^(K+1))
        let inv = TheoryInput { lambda: t.mu, mu: t.lambda, capacity: t.capacity };
        Ok(first + (k + 1.0) / one_minus_rho_pow(&inv, k + 1.0))
    }
}

pub fn metrics(t: &TheoryInput) -> Result<QueueMetrics> {
    let ls = expected_in_system(t)?;
    let p0 = state_probability(t, 0)?;
    let pk = state_probability(t, t.capacity)?;
    Ok(QueueMetrics::from_parts(ls, p0, pk, t.lambda, t.mu))
}

/// Solves `lambda P_{i-1} = mu P_i` by recursion and normalizes.
///
/// Recurses upward from `P_0` when `lambda <= mu` and downward from `P_K`
/// otherwise, so intermediate values never exceed 1.
pub fn stationary_oracle(t: &TheoryInput) -> Result<Vec<f64>> {
    t.validate()?;
    if t.capacity > ORACLE_MAX_CAPACITY {
        return Err(invalid(format!(
            "oracle capacity limited to {ORACLE_MAX_CAPACITY}, got {}",
            t.capacity
        )));
    }
    let len = t.capacity as usize + 1;
    let mut p = vec![0.0; len];
    if t.lambda <= t.mu {
        p[0] = 1.0;
        for i in 1..len {
            p[i] = p[i - 1] * t.lambda / t.mu;
        }
    } else {
        p[len - 1] = 1.0;
        for i in (0..len - 1).rev() {
            p[i] = p[i + 1] * t.mu / t.lambda;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Metrics computed from an arbitrary stationary distribution over `0..=K`.
pub fn metrics_from_distribution(p: &[f64], lambda: f64, mu: f64) -> QueueMetrics {
    let ls = p.iter().enumerate().map(|(i, x)| i as f64 * x).sum();
    let p0 = p.first().copied().unwrap_or(0.0);
    let pk = p.last().copied().unwrap_or(0.0);
    QueueMetrics::from_parts(ls, p0, pk, lambda, mu)
}
