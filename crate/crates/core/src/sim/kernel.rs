//! Gate-by-gate afterpulse dynamics of one SPAD.
//!
//! Each fired gate gives every later gate at lag `d <= H` an independent
//! chance `p_ap(d)` to fire. Drawing those `H` Bernoulli variables one by
//! one costs `O(H)` per avalanche; instead the successes are sampled as the
//! points of a unit-rate Poisson process on the cumulative hazard axis
//! `S(d) = sum_{k<=d} -ln(1 - p_ap(k))`. Lag `d` receives at least one point
//! with probability `1 - exp(-(S(d) - S(d-1))) = p_ap(d)`, independently
//! across lags, so the law is unchanged while the expected work per
//! avalanche drops to about `1 + C`.
//!
//! The first-order law instead fires each gate independently with
//! probability `p_n + (1 - p_n) sum_j p_j p_ap(n - j)`, where `p_j` are the
//! avalanche probabilities of the transmitted history. Because `p_ap` is a
//! sum of exponentials the history sum is carried as one decaying state per
//! trap, with no truncation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{afterpulse_orders, SpadParams, TrapModel};

/// Why a gate fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cause {
    Primary,
    Afterpulse,
}

impl Cause {
    pub fn label(self) -> &'static str {
        match self {
            Cause::Primary => "primary",
            Cause::Afterpulse => "afterpulse",
        }
    }
}

/// How earlier gates cause afterpulses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfterpulseLaw {
    /// Every fired gate independently releases an afterpulse into the gate
    /// `d` cycles later with probability `p_ap(d)`.
    #[default]
    Event,
    /// Gates fire independently with the first-order trigger probability
    /// given the avalanche probabilities of the transmitted history.
    FirstOrder,
}

/// Afterpulse statistics of one detector, prepared for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct AfterpulseKernel {
    /// Cumulative hazard of the orders `1..=H`.
    hazard: Vec<f64>,
    /// `(weight, decay)` per trap with `p_ap(d) = sum weight * decay^d`.
    traps: Vec<(f64, f64)>,
}

impl AfterpulseKernel {
    pub fn new(traps: &TrapModel, spad: &SpadParams, window: usize) -> Result<Self> {
        if traps.is_zero() {
            return Ok(Self {
                hazard: Vec::new(),
                traps: Vec::new(),
            });
        }
        let mut total = 0.0;
        let hazard = afterpulse_orders(traps, spad, window.max(1))?
            .into_iter()
            .map(|a| {
                total += -(-a).ln_1p();
                total
            })
            .collect();
        let exponentials = traps
            .components()
            .iter()
            .map(|c| {
                let tau = c.lifetime;
                let weight = traps.scale() * c.amplitude * tau * -(-spad.gate_on() / tau).exp_m1();
                (weight, (-spad.cycle() / tau).exp())
            })
            .collect();
        Ok(Self {
            hazard,
            traps: exponentials,
        })
    }

    pub fn window(&self) -> usize {
        self.hazard.len()
    }

    pub fn is_silent(&self) -> bool {
        self.hazard.last().is_none_or(|&h| h == 0.0)
    }

    /// Calls `mark(d)` for every lag that receives an afterpulse.
    fn sample_lags<R: Rng>(&self, rng: &mut R, mut mark: impl FnMut(usize)) {
        let mut t = 0.0;
        loop {
            t -= (1.0 - rng.random::<f64>()).ln();
            let i = self.hazard.partition_point(|&h| h <= t);
            if i >= self.hazard.len() {
                return;
            }
            mark(i + 1);
        }
    }
}

/// State of one gate chain: which upcoming gates already hold an
/// afterpulse.
pub(crate) struct Chain<'a> {
    kernel: &'a AfterpulseKernel,
    pending: Vec<bool>,
    now: usize,
    rearm: bool,
    law: AfterpulseLaw,
    /// Per-trap history sums for the first-order law.
    memory: Vec<f64>,
}

impl<'a> Chain<'a> {
    pub(crate) fn new(kernel: &'a AfterpulseKernel, rearm: bool, law: AfterpulseLaw) -> Self {
        let pending = match law {
            AfterpulseLaw::Event => vec![false; kernel.window() + 1],
            AfterpulseLaw::FirstOrder => Vec::new(),
        };
        Self {
            kernel,
            pending,
            now: 0,
            rearm,
            law,
            memory: vec![0.0; kernel.traps.len()],
        }
    }

    /// Advances one gate with avalanche probability `p`.
    #[inline]
    pub(crate) fn step<R: Rng>(&mut self, p: f64, rng: &mut R) -> Option<Cause> {
        match self.law {
            AfterpulseLaw::Event => self.step_event(p, rng),
            AfterpulseLaw::FirstOrder => self.step_first_order(p, rng),
        }
    }

    fn step_first_order<R: Rng>(&mut self, p: f64, rng: &mut R) -> Option<Cause> {
        let mut history = 0.0;
        for (m, &(weight, decay)) in self.memory.iter_mut().zip(&self.kernel.traps) {
            history += weight * *m;
            *m = decay * (*m + p);
        }
        self.now += 1;
        let trigger = (p + (1.0 - p) * history).min(1.0);
        let u = rng.random::<f64>();
        if u < p {
            Some(Cause::Primary)
        } else if u < trigger {
            Some(Cause::Afterpulse)
        } else {
            None
        }
    }

    #[inline]
    fn step_event<R: Rng>(&mut self, p: f64, rng: &mut R) -> Option<Cause> {
        let len = self.pending.len();
        let slot = self.now % len;
        let afterpulse = std::mem::replace(&mut self.pending[slot], false);
        let primary = rng.random::<f64>() < p;
        let outcome = if primary {
            Some(Cause::Primary)
        } else if afterpulse {
            Some(Cause::Afterpulse)
        } else {
            None
        };
        if (primary || (afterpulse && self.rearm)) && !self.kernel.is_silent() {
            let now = self.now;
            let pending = &mut self.pending;
            self.kernel
                .sample_lags(rng, |d| pending[(now + d) % len] = true);
        }
        self.now += 1;
        outcome
    }
}
