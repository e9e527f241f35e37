//! Multi-exponential trap model and the afterpulse probabilities it implies.
//!
//! The release density of trapped carriers is a sum of exponentials,
//! `f(t) = kappa * sum_j A_j exp(-t / tau_j)`. The n-order afterpulse
//! probability is the mass of `f` that falls inside the gate opened n
//! cycles after an avalanche, which integrates in closed form.

use serde::{Deserialize, Serialize};

use super::params::SpadParams;
use crate::error::{clamp_probability, Error, Result};

/// Largest first-order afterpulse probability for which the first-order
/// trigger approximation is considered valid.
pub const MAX_FIRST_ORDER_AP: f64 = 0.2;

/// Lifetimes (ns) of the six traps of the reference InGaAs/InP detector.
pub const REFERENCE_LIFETIMES_NS: [f64; 6] = [0.1, 1.0, 6.6, 26.5, 168.9, 1078.7];
/// Relative trap densities of the reference detector (cm^-3). Only their
/// ratios are used; the absolute scale comes from normalization.
pub const REFERENCE_DENSITIES: [f64; 6] = [4.95e10, 4.70e9, 6.72e8, 1.54e8, 2.08e7, 2.53e6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapComponent {
    /// Amplitude of the exponential, rate density per ns.
    pub amplitude: f64,
    /// Release lifetime in ns.
    pub lifetime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapModel {
    components: Vec<TrapComponent>,
    scale: f64,
}

impl TrapModel {
    pub fn new(components: Vec<TrapComponent>, scale: f64) -> Result<Self> {
        for (j, c) in components.iter().enumerate() {
            if !(c.lifetime.is_finite() && c.lifetime > 0.0) {
                return Err(Error::param(
                    "trap lifetime",
                    format!("component {j}: lifetime {} must be > 0", c.lifetime),
                ));
            }
            if !(c.amplitude.is_finite() && c.amplitude >= 0.0) {
                return Err(Error::param(
                    "trap amplitude",
                    format!("component {j}: amplitude {} must be >= 0", c.amplitude),
                ));
            }
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::param("trap scale", format!("{scale} must be >= 0")));
        }
        Ok(Self { components, scale })
    }

    pub fn from_pairs(pairs: &[(f64, f64)], scale: f64) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(amplitude, lifetime)| TrapComponent {
                    amplitude,
                    lifetime,
                })
                .collect(),
            scale,
        )
    }

    /// A detector without afterpulsing.
    pub fn zero() -> Self {
        Self {
            components: Vec::new(),
            scale: 0.0,
        }
    }

    /// Six-trap shape of the reference detector with unit scale. Normalize it
    /// with [`normalize_traps`] before use.
    pub fn reference_shape() -> Self {
        let pairs: Vec<(f64, f64)> = REFERENCE_DENSITIES
            .iter()
            .copied()
            .zip(REFERENCE_LIFETIMES_NS)
            .collect();
        Self::from_pairs(&pairs, 1.0).expect("reference traps are valid")
    }

    pub fn components(&self) -> &[TrapComponent] {
        &self.components
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.components.clone(), scale)
    }

    /// True when the model can never produce an afterpulse.
    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.components.iter().all(|c| c.amplitude == 0.0)
    }

    fn raw_order(&self, n: f64, spad: &SpadParams) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let tau = c.lifetime;
                c.amplitude * tau * (-n * spad.cycle() / tau).exp() * -(-spad.gate_on() / tau).exp_m1()
            })
            .sum::<f64>()
            * self.scale
    }

    fn raw_total(&self, spad: &SpadParams) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let tau = c.lifetime;
                // (e^{g/tau} - 1) / (e^{g/tau} (e^{c/tau} - 1)) == (1 - e^{-g/tau}) / (e^{c/tau} - 1)
                c.amplitude * tau * -(-spad.gate_on() / tau).exp_m1() / (spad.cycle() / tau).exp_m1()
            })
            .sum::<f64>()
            * self.scale
    }
}

/// Probability that carriers trapped by one avalanche trigger the gate `n`
/// cycles later.
pub fn afterpulse_prob(n: usize, traps: &TrapModel, spad: &SpadParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain {
            operation: "afterpulse_prob",
            detail: "gate order must be >= 1".into(),
        });
    }
    clamp_probability(traps.raw_order(n as f64, spad), "afterpulse_prob")
}

/// Afterpulse probabilities for orders `1..=count`.
pub fn afterpulse_orders(traps: &TrapModel, spad: &SpadParams, count: usize) -> Result<Vec<f64>> {
    (1..=count).map(|n| afterpulse_prob(n, traps, spad)).collect()
}

/// Sum of the afterpulse probabilities over all orders, the constant `C`
/// that scales the afterpulse contribution to the asymptotic trigger
/// probability.
pub fn afterpulse_total(traps: &TrapModel, spad: &SpadParams) -> Result<f64> {
    let c = traps.raw_total(spad);
    if !c.is_finite() || c < 0.0 {
        return Err(Error::Consistency {
            context: "afterpulse_total",
            value: c,
        });
    }
    Ok(c)
}

/// Rescales `traps` so that the first-order afterpulse probability equals
/// `target`. The relative amplitudes are preserved.
pub fn normalize_traps(traps: &TrapModel, spad: &SpadParams, target: f64) -> Result<TrapModel> {
    if !(0.0..MAX_FIRST_ORDER_AP).contains(&target) {
        return Err(Error::param(
            "target first-order afterpulse probability",
            format!("{target} is outside [0, {MAX_FIRST_ORDER_AP})"),
        ));
    }
    if target == 0.0 {
        return traps.with_scale(0.0);
    }
    let unit = traps.with_scale(1.0)?.raw_order(1.0, spad);
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(Error::Domain {
            operation: "normalize_traps",
            detail: format!(
                "trap model yields first-order afterpulse probability {unit} at unit scale; cannot reach {target}"
            ),
        });
    }
    traps.with_scale(target / unit)
}

/// Smallest order whose afterpulse probability drops below `threshold`,
/// capped at `cap`. Never less than 1.
pub fn history_window(traps: &TrapModel, spad: &SpadParams, threshold: f64, cap: usize) -> usize {
    if traps.is_zero() {
        return 1;
    }
    // The tail is a sum of decaying exponentials, so a bisection on the
    // monotone sequence is valid.
    let below = |n: usize| traps.raw_order(n as f64, spad) < threshold;
    if below(1) {
        return 1;
    }
    if !below(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (1usize, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spad() -> SpadParams {
        SpadParams::reference()
    }

    #[test]
    fn zero_model_has_no_afterpulses() {
        let z = TrapModel::zero();
        for n in [1, 2, 50] {
            assert_eq!(afterpulse_prob(n, &z, &spad()).unwrap(), 0.0);
        }
        assert_eq!(afterpulse_total(&z, &spad()).unwrap(), 0.0);
        assert_eq!(history_window(&z, &spad(), 1e-9, 10_000), 1);
    }

    #[test]
    fn order_zero_is_a_domain_error() {
        let t = TrapModel::reference_shape();
        assert!(matches!(
            afterpulse_prob(0, &t, &spad()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn rejects_bad_components() {
        assert!(TrapModel::from_pairs(&[(1.0, 0.0)], 1.0).is_err());
        assert!(TrapModel::from_pairs(&[(-1.0, 1.0)], 1.0).is_err());
        assert!(TrapModel::from_pairs(&[(1.0, 1.0)], -1.0).is_err());
    }

    #[test]
    fn normalization_hits_target() {
        let t = normalize_traps(&TrapModel::reference_shape(), &spad(), 0.11).unwrap();
        let p1 = afterpulse_prob(1, &t, &spad()).unwrap();
        assert!((p1 - 0.11).abs() <= 1e-12, "{p1}");
        let again = normalize_traps(&t, &spad(), 0.11).unwrap();
        assert!((again.scale() - t.scale()).abs() <= 1e-12 * t.scale());
    }

    #[test]
    fn normalization_edge_cases() {
        let shape = TrapModel::reference_shape();
        assert_eq!(normalize_traps(&shape, &spad(), 0.0).unwrap().scale(), 0.0);
        assert!(normalize_traps(&shape, &spad(), 0.2).is_err());
        assert!(normalize_traps(&TrapModel::zero(), &spad(), 0.05).is_err());
    }

    #[test]
    fn history_window_meets_guard() {
        let t = normalize_traps(&TrapModel::reference_shape(), &spad(), 0.05).unwrap();
        let h = history_window(&t, &spad(), 1e-9, 10_000);
        assert!(afterpulse_prob(h, &t, &spad()).unwrap() < 1e-9);
        assert!(afterpulse_prob(h - 1, &t, &spad()).unwrap() >= 1e-9);
    }
}
