//! Recovery of avalanche and trigger probabilities from pilot counts.
//!
//! Mean pilot counts give empirical trigger probabilities `P' = X / N`.
//! Inverting the asymptotic trigger relation recovers the avalanche
//! probabilities `p`, from which the receiver rebuilds its thresholds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::trigger::asymptotic_trigger;
use crate::model::ReceiverMode;

/// Which closed forms the estimators use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionForm {
    /// Inverts the asymptotic trigger relation of the receiver mode, and
    /// removes the explicitly modeled orders from the history-enhanced
    /// tail term.
    #[default]
    Corrected,
    /// Reproduces the printed formulas: the radical
    /// `(sqrt(C^2 + 4 P'(1 - C)) - C) / (2 (1 - C))` and the full `C` in the
    /// history-enhanced tail.
    Literal,
}

const ROUNDOFF: f64 = 1e-12;

fn check_probability(value: f64, name: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} is not in [0, 1]")))
    }
}

/// Root in `[0, 1]` of `C p^2 - (1 + C) p + P' = 0`, the inverse of
/// `P' = p + C p (1 - p)`.
pub fn invert_single(p_prime: f64, c: f64) -> Result<f64> {
    check_probability(p_prime, "trigger estimate")?;
    let b = 1.0 + c;
    let disc = b * b - 4.0 * c * p_prime;
    if disc < 0.0 {
        return Err(Error::EstimationFailure(format!(
            "no real avalanche probability yields trigger {p_prime} with C = {c}"
        )));
    }
    // Rationalized smaller root, stable as C -> 0.
    let p = 2.0 * p_prime / (b + disc.sqrt());
    if p > 1.0 + ROUNDOFF {
        return Err(Error::EstimationFailure(format!(
            "trigger {p_prime} with C = {c} inverts to {p} > 1"
        )));
    }
    Ok(p.min(1.0))
}

/// The printed radical inversion, kept for comparison.
pub fn invert_literal(p_prime: f64, c: f64) -> Result<f64> {
    check_probability(p_prime, "trigger estimate")?;
    if c >= 1.0 {
        return Err(Error::EstimationFailure(format!(
            "literal inversion undefined for C = {c} >= 1"
        )));
    }
    let p = ((c * c + 4.0 * p_prime * (1.0 - c)).sqrt() - c) / (2.0 * (1.0 - c));
    Ok(p.clamp(0.0, 1.0))
}

/// Inverts the array relation `P'_m = p_m + C pbar (1 - p_m)` for all
/// symbols jointly.
///
/// With `q = C pbar`, averaging over symbols gives
/// `q^2 - (1 + C) q + C mean(P') = 0`, whose smaller root fixes `q`; each
/// `p_m` then follows from `p_m = (P'_m - q) / (1 - q)`.
pub fn invert_array(p_prime: &[f64], c: f64) -> Result<Vec<f64>> {
    if p_prime.is_empty() {
        return Err(Error::param("trigger estimates", "empty"));
    }
    for &p in p_prime {
        check_probability(p, "trigger estimate")?;
    }
    let mean = p_prime.iter().sum::<f64>() / p_prime.len() as f64;
    let b = 1.0 + c;
    let disc = b * b - 4.0 * c * mean;
    if disc < 0.0 {
        return Err(Error::EstimationFailure(format!(
            "mean trigger {mean} is inconsistent with C = {c}"
        )));
    }
    let q = 2.0 * c * mean / (b + disc.sqrt());
    if q >= 1.0 {
        return Err(Error::EstimationFailure(format!(
            "afterpulse share {q} leaves no room for avalanches"
        )));
    }
    p_prime
        .iter()
        .enumerate()
        .map(|(m, &pp)| {
            let p = (pp - q) / (1.0 - q);
            if p < -ROUNDOFF {
                Err(Error::EstimationFailure(format!(
                    "symbol {m}: trigger {pp} lies below the afterpulse floor {q}"
                )))
            } else {
                Ok(p.clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// Per-symbol avalanche probabilities from mean pilot counts.
pub fn estimate_avalanche_general(
    mean_counts: &[f64],
    gates: usize,
    c: f64,
    mode: ReceiverMode,
    form: InversionForm,
) -> Result<Vec<f64>> {
    if gates == 0 {
        return Err(Error::param("gates", "must be >= 1"));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::param("afterpulse total", format!("{c} must be >= 0")));
    }
    let n = gates as f64;
    let p_prime = mean_counts
        .iter()
        .map(|&x| {
            if (0.0..=n).contains(&x) {
                Ok(x / n)
            } else {
                Err(Error::param("mean count", format!("{x} is outside [0, {gates}]")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    match (form, mode) {
        (InversionForm::Literal, _) => p_prime.iter().map(|&pp| invert_literal(pp, c)).collect(),
        (InversionForm::Corrected, ReceiverMode::SingleSpad) => {
            p_prime.iter().map(|&pp| invert_single(pp, c)).collect()
        }
        (InversionForm::Corrected, ReceiverMode::SpadArray) => invert_array(&p_prime, c),
    }
}

/// Forward map `P = p + C p_a (1 - p)`, where `p_a` is the symbol's own
/// avalanche probability for a single SPAD and the constellation mean for
/// an array.
pub fn estimate_trigger(p_hat: &[f64], c: f64, mode: ReceiverMode) -> Result<Vec<f64>> {
    for &p in p_hat {
        check_probability(p, "avalanche estimate")?;
    }
    match mode {
        ReceiverMode::SingleSpad => p_hat
            .iter()
            .map(|&p| asymptotic_trigger(p, p, c))
            .collect(),
        ReceiverMode::SpadArray => {
            let mean = p_hat.iter().sum::<f64>() / p_hat.len().max(1) as f64;
            p_hat
                .iter()
                .map(|&p| asymptotic_trigger(p, mean, c))
                .collect()
        }
    }
}

/// Newton-Raphson controls for [`estimate_history_enhanced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

/// Result of the history-enhanced solve.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySolution {
    pub avalanche: Vec<f64>,
    pub iterations: usize,
    /// Why the solver fell back to the general-scheme estimate, if it did.
    pub fallback: Option<String>,
}

/// Right-hand side of the cyclic pilot system,
/// `p_m + (1 - p_m) [sum_{k=1}^{M-1} p_{(m-k) mod M} a_k + tail * mean(p)]`.
pub fn cyclic_trigger(p: &[f64], low_orders: &[f64], tail: f64) -> Vec<f64> {
    let big_m = p.len();
    let mean = p.iter().sum::<f64>() / big_m as f64;
    (0..big_m)
        .map(|m| {
            let s = history_sum(p, low_orders, m) + tail * mean;
            p[m] + (1.0 - p[m]) * s
        })
        .collect()
}

fn history_sum(p: &[f64], low_orders: &[f64], m: usize) -> f64 {
    let big_m = p.len();
    (1..big_m)
        .map(|k| p[(m + big_m - k) % big_m] * low_orders[k - 1])
        .sum()
}

/// Tail constant of the cyclic system for the chosen form.
pub fn cyclic_tail(c: f64, low_orders: &[f64], form: InversionForm) -> f64 {
    match form {
        InversionForm::Corrected => (c - low_orders.iter().sum::<f64>()).max(0.0),
        InversionForm::Literal => c,
    }
}

/// Solves the cyclic pilot system for the avalanche probabilities.
///
/// `p_prime[m]` is the empirical trigger probability of symbol `m` within
/// the cyclic pilot `x_1 .. x_M` and `low_orders[k - 1] = p_ap(k)` for
/// `k = 1 .. M - 1`. The iteration starts from the general array estimate.
/// When it fails to converge, or converges to a solution that is not
/// strictly increasing inside `(0, 1)`, the general estimate is returned
/// with a diagnostic.
pub fn estimate_history_enhanced(
    p_prime: &[f64],
    low_orders: &[f64],
    c: f64,
    form: InversionForm,
    settings: NewtonSettings,
) -> Result<HistorySolution> {
    let big_m = p_prime.len();
    if big_m < 2 {
        return Err(Error::param("trigger estimates", "at least two symbols are required"));
    }
    if low_orders.len() + 1 < big_m {
        return Err(Error::param(
            "afterpulse orders",
            format!("{} orders given, {} required", low_orders.len(), big_m - 1),
        ));
    }
    let low = &low_orders[..big_m - 1];
    let tail = cyclic_tail(c, low, form);
    let initial = invert_array(p_prime, c)?;

    let mut p = initial.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        iterations += 1;
        let residual = DVector::from_iterator(
            big_m,
            cyclic_trigger(&p, low, tail)
                .iter()
                .zip(p_prime)
                .map(|(f, target)| f - target),
        );
        let jacobian = cyclic_jacobian(&p, low, tail);
        let Some(step) = jacobian.lu().solve(&residual) else {
            break;
        };
        let mut scale = 1.0;
        let mut next: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x - d).collect();
        while next.iter().any(|x| !(0.0..=1.0).contains(x)) && scale > 1e-12 {
            scale *= 0.5;
            next = p.iter().zip(step.iter()).map(|(x, d)| x - scale * d).collect();
        }
        let change = step.amax() * scale;
        p = next;
        if change < settings.tolerance {
            converged = true;
            break;
        }
    }

    let ordered = p.iter().all(|&x| x > 0.0 && x < 1.0) && p.windows(2).all(|w| w[0] < w[1]);
    let fallback = if !converged {
        Some(format!(
            "Newton-Raphson did not converge in {} iterations",
            settings.max_iterations
        ))
    } else if !ordered {
        Some(format!("solution {p:?} is not strictly increasing inside (0, 1)"))
    } else {
        None
    };
    if let Some(reason) = &fallback {
        log::warn!("history-enhanced estimation fell back to the general scheme: {reason}");
        p = initial;
    }
    Ok(HistorySolution {
        avalanche: p,
        iterations,
        fallback,
    })
}

/// `J_mj = delta_mj (1 - S_m) + (1 - p_m) dS_m/dp_j`.
fn cyclic_jacobian(p: &[f64], low: &[f64], tail: f64) -> DMatrix<f64> {
    let big_m = p.len();
    let share = tail / big_m as f64;
    let mean = p.iter().sum::<f64>() / big_m as f64;
    DMatrix::from_fn(big_m, big_m, |m, j| {
        let lag = (m + big_m - j) % big_m;
        let d_s = if lag == 0 { 0.0 } else { low[lag - 1] } + share;
        let diag = if m == j {
            1.0 - (history_sum(p, low, m) + tail * mean)
        } else {
            0.0
        };
        diag + (1.0 - p[m]) * d_s
    })
}

/// Pilot-derived receiver knowledge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotEstimate {
    /// Mean count per symbol.
    pub mean_counts: Vec<f64>,
    /// Estimated trigger probability per symbol.
    pub trigger: Vec<f64>,
    /// Estimated avalanche probability per symbol.
    pub avalanche: Vec<f64>,
    /// Transmissions of each symbol.
    pub retransmissions: usize,
    /// Set when the history-enhanced solver fell back.
    pub diagnostic: Option<String>,
}
