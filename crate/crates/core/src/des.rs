//! Discrete-event simulation of an M/M/1/K queue.
//!
//! Arrivals finding `K` customers in the system are lost. Service is FIFO.
//! Interarrival and service times are exponential, drawn by inverse
//! transform from two ChaCha8 streams (`rand_chacha` 0.3) sharing the
//! run's seed: stream 0 for arrivals and stream 1 for services.
//!
//! The first `warmup_fraction` of arrivals is discarded. The remaining
//! arrivals are split into equal-count batches and 95% confidence
//! half-widths come from batch means with a Student-t quantile.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};
use crate::theory::QueueMetrics;

pub const MIN_HORIZON_EVENTS: u64 = 1000;
const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesParams {
    pub lambda: f64,
    pub mu: f64,
    pub capacity: u64,
    /// Total arrivals generated, including warm-up.
    pub horizon_events: u64,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub batches: usize,
}

impl DesParams {
    /// Defaults: one million arrivals, 10% warm-up, 20 batches.
    pub fn new(lambda: f64, mu: f64, capacity: u64, seed: u64) -> Self {
        DesParams {
            lambda,
            mu,
            capacity,
            horizon_events: 1_000_000,
            warmup_fraction: 0.1,
            seed,
            batches: 20,
        }
    }

    fn warmup_arrivals(&self) -> u64 {
        (self.horizon_events as f64 * self.warmup_fraction).floor() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid(format!("DES arrival rate must be > 0, got {}", self.lambda)));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid(format!("DES service rate must be > 0, got {}", self.mu)));
        }
        if self.capacity < 1 {
            return Err(invalid("capacity must be >= 1"));
        }
        if self.horizon_events < MIN_HORIZON_EVENTS {
            return Err(invalid(format!(
                "horizon must be >= {MIN_HORIZON_EVENTS} arrivals, got {}",
                self.horizon_events
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(invalid(format!(
                "warm-up fraction must be in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.batches < 2 {
            return Err(invalid(format!("need at least 2 batches, got {}", self.batches)));
        }
        let kept = self.horizon_events - self.warmup_arrivals();
        if (self.batches as u64) > kept {
            return Err(invalid(format!(
                "{} batches exceed the {kept} post-warm-up arrivals",
                self.batches
            )));
        }
        Ok(())
    }
}

/// 95% confidence half-widths for each point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfWidths {
    pub ls: f64,
    pub lq: f64,
    pub ws: Option<f64>,
    pub wq: Option<f64>,
    pub lambda_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesResult {
    pub params: DesParams,
    pub metrics: QueueMetrics,
    pub half_widths: HalfWidths,
    /// Arrival plus departure events executed.
    pub events_processed: u64,
    pub arrivals: u64,
    pub accepted: u64,
    pub blocked: u64,
    /// Length of the post-warm-up observation window.
    pub observed_time: f64,
}

impl DesResult {
    /// True when `value` lies inside `estimate +/- half_width`.
    pub fn covers(estimate: f64, half_width: f64, value: f64) -> bool {
        (estimate - value).abs() <= half_width
    }
}

#[derive(Debug, Clone, Default)]
struct Batch {
    time: f64,
    area_system: f64,
    area_queue: f64,
    time_empty: f64,
    time_full: f64,
    arrivals: u64,
    accepted: u64,
    sojourn_sum: f64,
    wait_sum: f64,
    departed: u64,
}

struct Customer {
    arrival: f64,
    batch: Option<usize>,
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

pub fn simulate_des(p: &DesParams) -> Result<DesResult> {
    p.validate()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(p.seed);
    arrival_rng.set_stream(ARRIVAL_STREAM);
    let mut service_rng = ChaCha8Rng::seed_from_u64(p.seed);
    service_rng.set_stream(SERVICE_STREAM);

    let warm = p.warmup_arrivals();
    let per_batch = (p.horizon_events - warm) / p.batches as u64;
    let batch_of = |i: u64| -> Option<usize> {
        if i < warm {
            None
        } else {
            Some((((i - warm) / per_batch) as usize).min(p.batches - 1))
        }
    };

    let mut batches = vec![Batch::default(); p.batches];
    let mut queue: VecDeque<Customer> = VecDeque::new();
    let mut now = 0.0_f64;
    let mut next_arrival = exponential(&mut arrival_rng, p.lambda);
    let mut next_departure = f64::INFINITY;
    let mut arrived = 0u64;
    let mut accepted_total = 0u64;
    let mut blocked_total = 0u64;
    let mut events = 0u64;
    let cap = p.capacity as usize;

    // Observation ends at the first arrival after the horizon, which is not
    // executed; departures before it still are.
    loop {
        let arrival_next = next_arrival <= next_departure;
        let event_time = if arrival_next { next_arrival } else { next_departure };

        if arrived > 0 {
            if let Some(b) = batch_of(arrived - 1) {
                let dt = event_time - now;
                let n = queue.len();
                let batch = &mut batches[b];
                batch.time += dt;
                batch.area_system += dt * n as f64;
                batch.area_queue += dt * n.saturating_sub(1) as f64;
                if n == 0 {
                    batch.time_empty += dt;
                }
                if n == cap {
                    batch.time_full += dt;
                }
            }
        }
        now = event_time;

        if arrival_next {
            if arrived == p.horizon_events {
                break;
            }
            events += 1;
            let batch = batch_of(arrived);
            arrived += 1;
            if let Some(b) = batch {
                batches[b].arrivals += 1;
            }
            if queue.len() < cap {
                accepted_total += 1;
                if let Some(b) = batch {
                    batches[b].accepted += 1;
                }
                if queue.is_empty() {
                    next_departure = now + exponential(&mut service_rng, p.mu);
                }
                queue.push_back(Customer { arrival: now, batch });
            } else {
                blocked_total += 1;
            }
            next_arrival = now + exponential(&mut arrival_rng, p.lambda);
        } else {
            events += 1;
            depart(&mut queue, &mut batches, now);
            next_departure = if queue.is_empty() {
                f64::INFINITY
            } else {
                now + exponential(&mut service_rng, p.mu)
            };
        }
    }

    // drain so every accepted customer contributes its waits
    while !queue.is_empty() {
        now = next_departure;
        events += 1;
        depart(&mut queue, &mut batches, now);
        next_departure = now + exponential(&mut service_rng, p.mu);
    }

    Ok(summarize(p, &batches, events, arrived, accepted_total, blocked_total))
}

/// Removes the customer in service at `now`. Waiting time of a customer is
/// the time its predecessor departs minus its own arrival.
fn depart(queue: &mut VecDeque<Customer>, batches: &mut [Batch], now: f64) {
    let done = queue.pop_front().expect("departure from an empty system");
    if let Some(b) = done.batch {
        batches[b].sojourn_sum += now - done.arrival;
        batches[b].departed += 1;
    }
    if let Some(next) = queue.front() {
        if let Some(b) = next.batch {
            batches[b].wait_sum += now - next.arrival;
        }
    }
}

fn mean_and_half_width(samples: &[f64], t_quantile: f64) -> (f64, f64) {
    let b = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / b;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, t_quantile * (var / b).sqrt())
}

fn summarize(
    p: &DesParams,
    batches: &[Batch],
    events: u64,
    arrivals: u64,
    accepted: u64,
    blocked: u64,
) -> DesResult {
    let t_quantile = StudentsT::new(0.0, 1.0, (batches.len() - 1) as f64)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.975);

    let time: f64 = batches.iter().map(|b| b.time).sum();
    let kept_arrivals: u64 = batches.iter().map(|b| b.arrivals).sum();
    let kept_accepted: u64 = batches.iter().map(|b| b.accepted).sum();
    let departed: u64 = batches.iter().map(|b| b.departed).sum();

    let ls = batches.iter().map(|b| b.area_system).sum::<f64>() / time;
    let lq = batches.iter().map(|b| b.area_queue).sum::<f64>() / time;
    let p0 = batches.iter().map(|b| b.time_empty).sum::<f64>() / time;
    let pk = batches.iter().map(|b| b.time_full).sum::<f64>() / time;
    // fraction of arrivals admitted, scaled by lambda; never exceeds lambda
    let lambda_eff = p.lambda * kept_accepted as f64 / kept_arrivals as f64;
    let (ws, wq) = if departed > 0 {
        (
            Some(batches.iter().map(|b| b.sojourn_sum).sum::<f64>() / departed as f64),
            Some(batches.iter().map(|b| b.wait_sum).sum::<f64>() / departed as f64),
        )
    } else {
        (None, None)
    };

    let per = |f: &dyn Fn(&Batch) -> f64| -> Vec<f64> { batches.iter().map(f).collect() };
    let hw = |xs: Vec<f64>| mean_and_half_width(&xs, t_quantile).1;
    let ls_hw = hw(per(&|b| b.area_system / b.time));
    let lq_hw = hw(per(&|b| b.area_queue / b.time));
    let le_hw = hw(per(&|b| p.lambda * b.accepted as f64 / b.arrivals as f64));
    let with_departures = batches.iter().all(|b| b.departed > 0);
    let (ws_hw, wq_hw) = if with_departures {
        (
            Some(hw(per(&|b| b.sojourn_sum / b.departed as f64))),
            Some(hw(per(&|b| b.wait_sum / b.departed as f64))),
        )
    } else {
        (None, None)
    };

    DesResult {
        params: *p,
        metrics: QueueMetrics { ls, lq, ws, wq, lambda_eff, p0, pk },
        half_widths: HalfWidths { ls: ls_hw, lq: lq_hw, ws: ws_hw, wq: wq_hw, lambda_eff: le_hw },
        events_processed: events,
        arrivals,
        accepted,
        blocked,
        observed_time: time,
    }
}
