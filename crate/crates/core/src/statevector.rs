//! Dense statevector for up to [`MAX_QUBITS`] qubits.
//!
//! Bit convention is little-endian: qubit 0 is the least-significant bit of
//! the basis index, so basis index `s` reads as "`s` customers".
//!
//! Sampling uses the ChaCha8 generator from `rand_chacha` 0.3, seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`, and inverse-CDF lookup on the
//! cumulative distribution. ChaCha output is specified by its algorithm, so
//! a seed reproduces the same counts on every platform and build.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gates::Gate2;

pub const MAX_QUBITS: usize = 12;

/// Unitarity tolerance for gates accepted by [`StateVector::apply_1q`].
pub const GATE_UNITARY_TOL: f64 = 1e-9;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(invalid(format!("qubit count must be in [1, {MAX_QUBITS}], got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`, the empty queue.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amplitudes })
    }

    /// Equal superposition over all `2^n` basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector { n, amplitudes: vec![a; dim] })
    }

    /// Wraps raw amplitudes. The length must be `2^n` for some valid `n`
    /// and the vector must be normalized within 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(invalid(format!("amplitude count must be 2^n with n >= 1, got {dim}")));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubits(n)?;
        let sv = StateVector { n, amplitudes };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("state is not normalized: |psi|^2 = {norm}")));
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` to `qubit` in place.
    pub fn apply_1q(&mut self, gate: &Gate2, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return Err(invalid(format!("qubit {qubit} out of range for {} qubits", self.n)));
        }
        check_gate(gate)?;
        self.apply_1q_unchecked(gate, qubit);
        Ok(())
    }

    /// Applies the same gate to every qubit, i.e. `gate^{(x)n}`.
    pub fn apply_uniform(&mut self, gate: &Gate2) -> Result<()> {
        check_gate(gate)?;
        for q in 0..self.n {
            self.apply_1q_unchecked(gate, q);
        }
        Ok(())
    }

    fn apply_1q_unchecked(&mut self, gate: &Gate2, qubit: usize) {
        let [[g00, g01], [g10, g11]] = gate.0;
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = g00 * x + g01 * y;
                *a1 = g10 * x + g11 * y;
            }
        }
    }

    pub fn probabilities(&self) -> Distribution {
        Distribution(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Probability that `qubit` reads `|1>`.
    pub fn qubit_one_probability(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n {
            return Err(invalid(format!("qubit {qubit} out of range for {} qubits", self.n)));
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> qubit) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

fn check_gate(gate: &Gate2) -> Result<()> {
    let defect = gate.unitarity_defect();
    if !(defect <= GATE_UNITARY_TOL) {
        return Err(invalid(format!("gate is not unitary (defect {defect:e})")));
    }
    Ok(())
}

/// Probabilities over the `2^n` basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates that entries lie in `[0, 1]` and sum to 1 within 1e-9.
    /// The length need not be a power of two.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(invalid("distribution must be non-empty"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution(probabilities))
    }

    /// Empirical distribution from sampled counts over `dim` outcomes.
    pub fn from_counts(counts: &BTreeMap<usize, u64>, dim: usize) -> Result<Self> {
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(invalid("counts are empty"));
        }
        let mut p = vec![0.0; dim];
        for (&idx, &c) in counts {
            if idx >= dim {
                return Err(invalid(format!("outcome {idx} outside {dim} states")));
            }
            p[idx] = c as f64 / shots as f64;
        }
        Ok(Distribution(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }

    /// `sum_s s * p_s`.
    pub fn mean(&self) -> f64 {
        self.0.iter().enumerate().map(|(s, p)| s as f64 * p).sum()
    }

    /// Draws `shots` outcomes by inverse CDF. Only non-zero counts are kept.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(invalid("shots must be >= 1"));
        }
        let mut cdf = Vec::with_capacity(self.0.len());
        let mut acc = 0.0;
        for p in &self.0 {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        let last_nonzero = self.0.iter().rposition(|&p| p > 0.0).unwrap_or(0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            // first index with cdf > u; rounding slack maps to the last
            // outcome that actually has mass
            let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }
}
