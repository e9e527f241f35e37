//! Maximum-likelihood decision thresholds on the photon-count axis.

use crate::error::{Error, Result};

/// Count at which the binomial likelihoods of two trigger probabilities
/// cross:
///
/// `N ln[(1 - P_lo) / (1 - P_hi)] / ln[P_hi (1 - P_lo) / (P_lo (1 - P_hi))]`.
///
/// The result lies strictly between `N P_lo` and `N P_hi`.
pub fn ml_threshold(p_lo: f64, p_hi: f64, gates: usize) -> Result<f64> {
    for p in [p_lo, p_hi] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BoundaryProbability(p));
        }
    }
    if p_lo == p_hi {
        return Err(Error::DegenerateThreshold(p_lo));
    }
    if p_lo > p_hi {
        return Err(Error::NonMonotoneTriggers {
            index: 0,
            lower: p_lo,
            upper: p_hi,
        });
    }
    let log_q_ratio = (-p_lo).ln_1p() - (-p_hi).ln_1p();
    let log_odds_ratio = p_hi.ln() - p_lo.ln() + log_q_ratio;
    Ok(gates as f64 * log_q_ratio / log_odds_ratio)
}

/// Increasing decision thresholds `kth(x_1) < ... < kth(x_{M-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    gates: usize,
    thresholds: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(thresholds: Vec<f64>, gates: usize) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::param("thresholds", "at least one threshold is required"));
        }
        for (i, &t) in thresholds.iter().enumerate() {
            if !(t > 0.0 && t < gates as f64) {
                return Err(Error::invariant(
                    "thresholds inside (0, N)",
                    format!("threshold {i} = {t} with N = {gates}"),
                ));
            }
        }
        if let Some(i) = thresholds.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::invariant(
                "thresholds strictly increasing",
                format!("{} then {}", thresholds[i], thresholds[i + 1]),
            ));
        }
        Ok(Self { gates, thresholds })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn gates(&self) -> usize {
        self.gates
    }

    /// Number of symbols the thresholds separate.
    pub fn order(&self) -> usize {
        self.thresholds.len() + 1
    }
}

/// Thresholds between each pair of adjacent symbols.
pub fn build_thresholds(triggers: &[f64], gates: usize) -> Result<ThresholdSet> {
    if triggers.len() < 2 {
        return Err(Error::param("triggers", "at least two symbols are required"));
    }
    if let Some(i) = triggers.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTriggers {
            index: i,
            lower: triggers[i],
            upper: triggers[i + 1],
        });
    }
    let thresholds = triggers
        .windows(2)
        .map(|w| ml_threshold(w[0], w[1], gates))
        .collect::<Result<Vec<_>>>()?;
    ThresholdSet::new(thresholds, gates)
}

/// Symbol decision by threshold comparison. Counts equal to a threshold go
/// to the upper symbol.
pub fn decide(count: f64, thresholds: &ThresholdSet) -> usize {
    let t = thresholds.thresholds();
    let last = t.len();
    if count < t[0] {
        return 0;
    }
    for m in 1..last {
        if t[m - 1] <= count && count < t[m] {
            return m;
        }
    }
    last
}

/// Decision by direct binomial likelihood comparison.
#[derive(Debug, Clone)]
pub struct MlDetector {
    gates: usize,
    ln_p: Vec<f64>,
    ln_q: Vec<f64>,
}

impl MlDetector {
    pub fn new(triggers: &[f64], gates: usize) -> Result<Self> {
        if triggers.is_empty() {
            return Err(Error::param("triggers", "empty"));
        }
        for &p in triggers {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::BoundaryProbability(p));
            }
        }
        Ok(Self {
            gates,
            ln_p: triggers.iter().map(|p| p.ln()).collect(),
            ln_q: triggers.iter().map(|p| (-p).ln_1p()).collect(),
        })
    }

    /// Symbol maximizing `k ln P + (N - k) ln(1 - P)`; the binomial
    /// coefficient is common to all symbols. Ties go to the upper symbol.
    pub fn decide(&self, count: usize) -> usize {
        let k = count as f64;
        let rest = (self.gates - count.min(self.gates)) as f64;
        let mut best = 0;
        let mut best_ll = f64::NEG_INFINITY;
        for m in 0..self.ln_p.len() {
            let ll = k * self.ln_p[m] + rest * self.ln_q[m];
            if ll >= best_ll {
                best_ll = ll;
                best = m;
            }
        }
        best
    }

    /// Decision for every count `0..=N`.
    pub fn table(&self) -> Vec<usize> {
        (0..=self.gates).map(|k| self.decide(k)).collect()
    }
}
