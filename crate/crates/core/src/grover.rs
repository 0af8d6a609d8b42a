//! Traffic-dependent marked states and the Grover step
//! `G = (2|psi><psi| - I)(2|m><m| - I)`.
//!
//! `|psi>` is the equal superposition over all basis states and `|m>` the
//! equal superposition over the marked set. Both reflections are rank-1
//! updates, so [`grover_apply`] runs in `O(2^n)` without forming `G`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::statevector::{check_qubits, StateVector};

/// Largest register for which [`grover_dense`] will build a matrix.
pub const DENSE_MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps0: f64,
    pub eps1: f64,
}

impl Thresholds {
    pub fn new(eps0: f64, eps1: f64) -> Result<Self> {
        let t = Thresholds { eps0, eps1 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eps0 && self.eps0 < self.eps1 && self.eps1 < 1.0) {
            return Err(invalid(format!(
                "thresholds must satisfy 0 < eps0 < eps1 < 1, got eps0={} eps1={}",
                self.eps0, self.eps1
            )));
        }
        Ok(())
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eps0: 0.3, eps1: 0.7 }
    }
}

/// Non-empty, sorted set of basis indices of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedStateSet {
    n: usize,
    states: Vec<usize>,
}

impl MarkedStateSet {
    pub fn new(n: usize, states: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_qubits(n)?;
        let set: BTreeSet<usize> = states.into_iter().collect();
        if set.is_empty() {
            return Err(invalid("marked state set must be non-empty"));
        }
        let dim = 1usize << n;
        if let Some(&s) = set.iter().next_back().filter(|&&s| s >= dim) {
            return Err(invalid(format!("marked state {s} outside {dim} basis states")));
        }
        Ok(MarkedStateSet { n, states: set.into_iter().collect() })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }
}

/// Picks the marked block from utilization `rho = lambda / mu`.
///
/// With `N = 2^n - 1`: low traffic (`rho < eps0`) marks `0..=N/3`,
/// moderate (`eps0 <= rho < eps1`) marks `N/3..=2N/3`, and high marks
/// `2N/3..=N`, using floor division and inclusive endpoints.
pub fn determine_marked_states(
    lambda: f64,
    mu: f64,
    n: usize,
    th: &Thresholds,
) -> Result<MarkedStateSet> {
    check_qubits(n)?;
    th.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(invalid(format!("service rate must be > 0, got {mu}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("arrival rate must be >= 0, got {lambda}")));
    }
    let rho = lambda / mu;
    let top = (1usize << n) - 1;
    let third = top / 3;
    let two_thirds = 2 * top / 3;
    let range = if rho < th.eps0 {
        0..=third
    } else if rho < th.eps1 {
        third..=two_thirds
    } else {
        two_thirds..=top
    };
    MarkedStateSet::new(n, range)
}

/// Applies `G` once to `state` in place.
pub fn grover_apply(state: &mut StateVector, m: &MarkedStateSet) -> Result<()> {
    if m.num_qubits() != state.num_qubits() {
        return Err(invalid(format!(
            "marked set is for {} qubits but state has {}",
            m.num_qubits(),
            state.num_qubits()
        )));
    }
    let amps = state.amplitudes_mut();

    // 2|m><m| - I: |m> has weight 1/sqrt(|M|) on each marked index, so
    // 2|m><m|x> contributes (2/|M|) * sum_{s in M} x_s on marked indices.
    let marked_sum: Complex64 = m.states().iter().map(|&s| amps[s]).sum();
    let coef = marked_sum * (2.0 / m.len() as f64);
    for a in amps.iter_mut() {
        *a = -*a;
    }
    for &s in m.states() {
        amps[s] += coef;
    }

    // 2|psi><psi| - I: inversion about the mean.
    let dim = amps.len() as f64;
    let total: Complex64 = amps.iter().sum();
    let twice_mean = total * (2.0 / dim);
    for a in amps.iter_mut() {
        *a = twice_mean - *a;
    }
    Ok(())
}

/// Explicit `2^n x 2^n` Grover matrix, row-major. Test and debugging aid.
pub fn grover_dense(n: usize, m: &MarkedStateSet) -> Result<Vec<Vec<Complex64>>> {
    if n > DENSE_MAX_QUBITS {
        return Err(invalid(format!(
            "dense Grover matrix limited to {DENSE_MAX_QUBITS} qubits, got {n}"
        )));
    }
    check_qubits(n)?;
    if m.num_qubits() != n {
        return Err(invalid(format!("marked set is for {} qubits, not {n}", m.num_qubits())));
    }
    let dim = 1usize << n;
    let zero = Complex64::new(0.0, 0.0);

    let mut r_psi = vec![vec![Complex64::new(2.0 / dim as f64, 0.0); dim]; dim];
    for (i, row) in r_psi.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    let mut r_m = vec![vec![zero; dim]; dim];
    let w = 2.0 / m.len() as f64;
    for &i in m.states() {
        for &j in m.states() {
            r_m[i][j] = Complex64::new(w, 0.0);
        }
    }
    for (i, row) in r_m.iter_mut().enumerate() {
        row[i] -= 1.0;
    }

    let mut out = vec![vec![zero; dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let a = r_psi[i][k];
            for j in 0..dim {
                out[i][j] += a * r_m[k][j];
            }
        }
    }
    Ok(out)
}
