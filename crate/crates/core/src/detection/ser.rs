//! Symbol error rates, analytical and measured.

use serde::{Deserialize, Serialize};

use super::threshold::{build_thresholds, decide, ThresholdSet};
use crate::error::Result;
use crate::model::pmf::{count_pmf, CountDistribution};
use crate::model::ReceiverMode;

/// How analytical SER is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerMode {
    /// Tail masses across each boundary between adjacent symbols.
    AdjacentPair,
    /// Mass of every count decided as another symbol, via [`decide`].
    FullRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// Threshold comparison.
    Th,
    /// Binomial likelihood maximization.
    Ml,
}

impl Detection {
    pub fn label(self) -> &'static str {
        match self {
            Detection::Th => "th",
            Detection::Ml => "ml",
        }
    }
}

/// Context echoed with a SER value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SerMetadata {
    pub receiver: Option<ReceiverMode>,
    pub gates: usize,
    pub order: usize,
    pub signal_rate: Option<f64>,
    pub background_rate: Option<f64>,
    pub first_order_ap: Option<f64>,
    pub detection: Option<Detection>,
    pub seed: Option<u64>,
}

/// Error rates per transmitted symbol and their equiprobable average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerResult {
    pub per_symbol: Vec<f64>,
    pub average: f64,
    /// Symbols simulated, for Monte Carlo results.
    pub trials: Option<u64>,
    /// Symbol errors counted, for Monte Carlo results.
    pub errors: Option<u64>,
    /// 95 % Wilson interval of the average, for Monte Carlo results.
    pub interval: Option<(f64, f64)>,
    pub metadata: SerMetadata,
}

impl SerResult {
    pub fn from_per_symbol(per_symbol: Vec<f64>, metadata: SerMetadata) -> Self {
        let average = per_symbol.iter().sum::<f64>() / per_symbol.len() as f64;
        Self {
            per_symbol,
            average: average.clamp(0.0, 1.0),
            trials: None,
            errors: None,
            interval: None,
            metadata,
        }
    }
}

/// Analytical SER of threshold detection when symbol `m` produces
/// `Binomial(N, triggers[m])` counts.
pub fn ser_analytical(triggers: &[f64], gates: usize, mode: SerMode) -> Result<SerResult> {
    let thresholds = build_thresholds(triggers, gates)?;
    let dists = triggers
        .iter()
        .map(|&p| count_pmf(p, gates))
        .collect::<Result<Vec<_>>>()?;
    let per_symbol = match mode {
        SerMode::AdjacentPair => adjacent_pair_errors(&dists, &thresholds),
        SerMode::FullRegion => full_region_errors(&dists, &thresholds),
    };
    Ok(SerResult::from_per_symbol(
        per_symbol,
        SerMetadata {
            gates,
            order: triggers.len(),
            ..Default::default()
        },
    ))
}

fn adjacent_pair_errors(dists: &[CountDistribution], thresholds: &ThresholdSet) -> Vec<f64> {
    let t = thresholds.thresholds();
    let last = dists.len() - 1;
    dists
        .iter()
        .enumerate()
        .map(|(m, d)| {
            // Counts below kth(x_{m-1}) are decided downward; counts at or
            // above kth(x_m) upward.
            let below = if m > 0 { d.below(t[m - 1]) } else { 0.0 };
            let above = if m < last { d.at_or_above(t[m]) } else { 0.0 };
            // Both tails can cover every count when N is tiny.
            (below + above).min(1.0)
        })
        .collect()
}

fn full_region_errors(dists: &[CountDistribution], thresholds: &ThresholdSet) -> Vec<f64> {
    let decisions: Vec<usize> = (0..=thresholds.gates())
        .map(|k| decide(k as f64, thresholds))
        .collect();
    dists
        .iter()
        .enumerate()
        .map(|(m, d)| {
            d.probabilities()
                .iter()
                .zip(&decisions)
                .filter(|(_, &decided)| decided != m)
                .map(|(p, _)| p)
                .sum::<f64>()
                .min(1.0)
        })
        .collect()
}

/// 95 % Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let phat = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}
