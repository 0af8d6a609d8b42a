//! Statevector simulation of finite-capacity single-server Markovian
//! (M/M/1/K) queues.
//!
//! Queue length is encoded directly in the computational basis of an
//! `n`-qubit register: basis index `s` means "`s` customers in the
//! system", giving capacity `K = 2^n - 1`. Each time step applies a
//! rotation-based arrival gate and service gate to every qubit, followed
//! by a traffic-dependent Grover amplification step. The quantum estimate
//! is compared against closed-form M/M/1/K results and against a seeded
//! discrete-event simulation.
//!
//! Module map:
//!
//! - [`statevector`]: dense amplitudes, single-qubit gate application, sampling
//! - [`gates`]: `RY` and the rate-parameterized arrival/service rotations
//! - [`grover`]: marked-state selection and the two-reflection Grover step
//! - [`qsim`]: the time-stepped quantum queue simulation
//! - [`theory`]: closed-form M/M/1/K metrics and a balance-equation oracle
//! - [`des`]: discrete-event M/M/1/K baseline with batch-means intervals
//! - [`metrics`]: distribution-to-metrics conversion, relative errors, error bound
//! - [`harness`]: scenarios, comparison/convergence/sensitivity runs, CSV/JSON I/O

pub mod des;
pub mod error;
pub mod gates;
pub mod grover;
pub mod harness;
pub mod metrics;
pub mod qsim;
pub mod statevector;
pub mod theory;

pub use error::{Error, Result};
