//! Single-qubit gates: the `RY` rotation and the arrival/service gates
//! whose angles encode a per-step event probability.
//!
//! For a rate `r`, amplification coefficient `a`, amplification index `k`
//! and time step `dt`, the event probability is
//!
//! ```text
//! p' = min(r * (1 + a*k) * dt, 1)
//! theta = 2 * asin(sqrt(p'))
//! ```
//!
//! so that `RY(theta)|0>` has `|1>`-probability exactly `p'`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A 2x2 complex matrix acting on one qubit, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate2(pub [[Complex64; 2]; 2]);

impl Gate2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Gate2([[one, zero], [zero, one]])
    }

    /// Builds a gate from real entries.
    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Gate2([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Gate2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Largest absolute entry of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = Gate2::identity();
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Real parts of the entries, for reporting gates that are known to be real.
    pub fn re(&self) -> [[f64; 2]; 2] {
        let m = &self.0;
        [[m[0][0].re, m[0][1].re], [m[1][0].re, m[1][1].re]]
    }
}

impl Mul for Gate2 {
    type Output = Gate2;

    fn mul(self, rhs: Gate2) -> Gate2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Gate2(out)
    }
}

/// Rate parameters for one arrival or service gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// Events per unit time (arrival rate or service rate).
    pub rate: f64,
    /// Amplification index.
    pub k: u64,
    /// Amplification coefficient.
    pub amp: f64,
    /// Time step.
    pub dt: f64,
}

impl GateParams {
    pub fn new(rate: f64, k: u64, amp: f64, dt: f64) -> Result<Self> {
        let p = GateParams { rate, k, amp, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(invalid(format!("rate must be finite and >= 0, got {}", self.rate)));
        }
        if !(self.amp.is_finite() && self.amp >= 0.0) {
            return Err(invalid(format!(
                "amplification coefficient must be finite and >= 0, got {}",
                self.amp
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("time step must be finite and > 0, got {}", self.dt)));
        }
        Ok(())
    }

    /// Unclamped `rate * (1 + amp*k) * dt`.
    pub fn raw_probability(&self) -> f64 {
        self.rate * (1.0 + self.amp * self.k as f64) * self.dt
    }

    /// Per-step event probability, clamped to 1.
    pub fn event_probability(&self) -> f64 {
        self.raw_probability().min(1.0)
    }

    /// True when the clamp is active.
    pub fn saturated(&self) -> bool {
        self.raw_probability() >= 1.0
    }
}

pub fn ry(theta: f64) -> Result<Gate2> {
    if !theta.is_finite() {
        return Err(invalid(format!("rotation angle must be finite, got {theta}")));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    Ok(Gate2::from_real([[c, -s], [s, c]]))
}

/// Rotation angle in `[0, pi]` whose `|1>`-probability is the clamped
/// event probability.
pub fn event_angle(p: &GateParams) -> Result<f64> {
    p.validate()?;
    Ok(2.0 * p.event_probability().sqrt().asin())
}

/// Arrival gate `A(lambda, k, alpha, dt)`.
///
/// Entries are written directly as `sqrt(1 - p')` and `sqrt(p')` rather than
/// through `cos`/`sin` of the angle, which keeps `p(|1>)` exact to rounding.
pub fn arrival_gate(p: &GateParams) -> Result<Gate2> {
    event_gate(p)
}

/// Service gate `S(mu, k, beta, dt)`; same construction as [`arrival_gate`].
pub fn service_gate(p: &GateParams) -> Result<Gate2> {
    event_gate(p)
}

fn event_gate(p: &GateParams) -> Result<Gate2> {
    p.validate()?;
    let prob = p.event_probability();
    let s = prob.sqrt();
    let c = (1.0 - prob).sqrt();
    Ok(Gate2::from_real([[c, -s], [s, c]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_close(g: &Gate2, want: [[f64; 2]; 2], tol: f64) {
        for r in 0..2 {
            for c in 0..2 {
                let e = g.entry(r, c);
                assert!(
                    (e.re - want[r][c]).abs() <= tol && e.im.abs() <= tol,
                    "entry ({r},{c}) = {e}, want {}",
                    want[r][c]
                );
            }
        }
    }

    #[test]
    fn ry_special_angles() {
        assert_close(&ry(0.0).unwrap(), [[1.0, 0.0], [0.0, 1.0]], 1e-15);
        assert_close(&ry(PI).unwrap(), [[0.0, -1.0], [1.0, 0.0]], 1e-15);
        assert_close(&ry(0.927).unwrap(), [[0.894, -0.447], [0.447, 0.894]], 1e-3);
    }

    #[test]
    fn ry_rejects_non_finite() {
        assert!(ry(f64::NAN).is_err());
        assert!(ry(f64::INFINITY).is_err());
    }

    #[test]
    fn demo_angles() {
        let a = GateParams::new(2.0, 0, 0.1, 0.1).unwrap();
        let s = GateParams::new(3.0, 0, 0.1, 0.1).unwrap();
        assert!((event_angle(&a).unwrap() - 0.927).abs() < 1e-3);
        assert!((event_angle(&s).unwrap() - 1.159).abs() < 1e-3);
    }

    #[test]
    fn angle_saturates_at_pi() {
        let p = GateParams::new(20.0, 0, 0.0, 0.1).unwrap();
        assert!(p.saturated());
        assert!((event_angle(&p).unwrap() - PI).abs() < 1e-15);
        let g = service_gate(&p).unwrap();
        assert_close(&g, ry(PI).unwrap().re(), 1e-15);
    }

    #[test]
    fn demo_gates_and_product() {
        let a = arrival_gate(&GateParams::new(2.0, 0, 0.1, 0.1).unwrap()).unwrap();
        let s = service_gate(&GateParams::new(3.0, 0, 0.1, 0.1).unwrap()).unwrap();
        assert_close(&a, [[0.894, -0.447], [0.447, 0.894]], 1e-3);
        assert_close(&s, [[0.836, -0.547], [0.547, 0.836]], 1e-3);
        // exact product is RY(theta_a + theta_s)
        let c = 0.7f64.sqrt() * 0.8f64.sqrt() - 0.3f64.sqrt() * 0.2f64.sqrt();
        let d = 0.3f64.sqrt() * 0.8f64.sqrt() + 0.7f64.sqrt() * 0.2f64.sqrt();
        assert_close(&(s * a), [[c, -d], [d, c]], 1e-14);
        assert!((c - 0.50338).abs() < 1e-5 && (d - 0.86406).abs() < 1e-5);
    }

    #[test]
    fn arrival_gate_matches_ry_of_angle() {
        let p = GateParams::new(4.0, 3, 0.2, 0.05).unwrap();
        let g = arrival_gate(&p).unwrap();
        let r = ry(event_angle(&p).unwrap()).unwrap();
        assert_close(&g, r.re(), 1e-14);
    }

    #[test]
    fn zero_amplification_ignores_k() {
        let a5 = arrival_gate(&GateParams::new(3.0, 5, 0.0, 0.1).unwrap()).unwrap();
        let a0 = arrival_gate(&GateParams::new(3.0, 0, 0.0, 0.1).unwrap()).unwrap();
        assert_eq!(a5, a0);
    }

    #[test]
    fn zero_rate_is_identity() {
        let g = arrival_gate(&GateParams::new(0.0, 7, 0.3, 0.1).unwrap()).unwrap();
        assert_eq!(g, Gate2::identity());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GateParams::new(-1.0, 0, 0.1, 0.1).is_err());
        assert!(GateParams::new(1.0, 0, -0.1, 0.1).is_err());
        assert!(GateParams::new(1.0, 0, 0.1, 0.0).is_err());
        let bad = GateParams { rate: 1.0, k: 0, amp: 0.1, dt: -1.0 };
        assert!(arrival_gate(&bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = GateParams> {
            (0.0..=20.0f64, 0u64..=63, 0.0..=0.5f64, 1e-6..=1.0f64)
                .prop_map(|(rate, k, amp, dt)| GateParams { rate, k, amp, dt })
        }

        proptest! {
            #[test]
            fn gates_are_unitary(p in params()) {
                prop_assert!(arrival_gate(&p).unwrap().unitarity_defect() <= 1e-12);
                prop_assert!(service_gate(&p).unwrap().unitarity_defect() <= 1e-12);
            }

            #[test]
            fn one_probability_is_clamped_rate(p in params()) {
                let g = arrival_gate(&p).unwrap();
                let p1 = g.entry(1, 0).norm_sqr();
                prop_assert!((p1 - p.raw_probability().min(1.0)).abs() <= 1e-12);
            }

            #[test]
            fn angle_monotone(p in params(), dr in 0.0..1.0f64, dk in 0u64..4, da in 0.0..0.1f64, ddt in 0.0..0.1f64) {
                let base = event_angle(&p).unwrap();
                let bumps = [
                    GateParams { rate: p.rate + dr, ..p },
                    GateParams { k: p.k + dk, ..p },
                    GateParams { amp: p.amp + da, ..p },
                    GateParams { dt: p.dt + ddt, ..p },
                ];
                for q in bumps {
                    let theta = event_angle(&q).unwrap();
                    prop_assert!(theta >= base);
                    prop_assert!((0.0..=std::f64::consts::PI).contains(&theta));
                }
            }
        }
    }
}
