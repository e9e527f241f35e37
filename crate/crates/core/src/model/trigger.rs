//! Avalanche and trigger probabilities of a gated SPAD.
//!
//! The avalanche probability `p` is the chance that photons or dark
//! carriers alone fire a gate. The trigger probability `P` also counts
//! afterpulses released by earlier avalanches, which makes it depend on the
//! whole firing history.

use super::params::{PamScheme, SpadParams};
use super::traps::{afterpulse_orders, afterpulse_prob, afterpulse_total, TrapModel, MAX_FIRST_ORDER_AP};
use crate::error::{clamp_probability, Error, Result};

/// Largest gate index accepted by [`trigger_exact`].
pub const MAX_EXACT_GATES: usize = 20;

/// Probability that a gate during symbol `m` avalanches without afterpulsing.
pub fn avalanche_prob(m: usize, pam: &PamScheme, spad: &SpadParams) -> f64 {
    avalanche_from_rates(pam.signal_rate(m), pam.background_rate(), spad)
}

/// `1 - exp(-[(signal + background) * pde * tau_g + dark * tau_g])`.
pub fn avalanche_from_rates(signal_rate: f64, background_rate: f64, spad: &SpadParams) -> f64 {
    let mean_carriers = (signal_rate + background_rate) * spad.pde() * spad.gate_on()
        + spad.dark_rate() * spad.gate_on();
    -(-mean_carriers).exp_m1()
}

/// Avalanche probabilities of every symbol of the constellation.
pub fn avalanche_probs(pam: &PamScheme, spad: &SpadParams) -> Vec<f64> {
    (0..pam.order()).map(|m| avalanche_prob(m, pam, spad)).collect()
}

/// Exact trigger probability of the last gate in `p_seq`.
///
/// Sums over every fired/not-fired history of the earlier gates. A gate
/// fires when its primary avalanche occurs or when at least one earlier
/// fired gate releases an afterpulse into it; each fired gate `j` does so
/// independently with probability `afterpulse_prob(i - j)`.
pub fn trigger_exact(p_seq: &[f64], traps: &TrapModel, spad: &SpadParams) -> Result<f64> {
    let n = p_seq.len();
    if n == 0 {
        return Err(Error::Domain {
            operation: "trigger_exact",
            detail: "empty avalanche sequence".into(),
        });
    }
    if n > MAX_EXACT_GATES {
        return Err(Error::EnumerationLimit {
            gate: n,
            limit: MAX_EXACT_GATES,
        });
    }
    let ap = afterpulse_orders(traps, spad, n)?;
    let total = enumerate_histories(p_seq, &ap, 0, 0, 1.0);
    clamp_probability(total, "trigger_exact")
}

/// Probability that gate `gate` fires given the set of earlier fired gates.
fn fire_probability(p_seq: &[f64], ap: &[f64], gate: usize, fired: u32) -> f64 {
    let quiet: f64 = (0..gate)
        .filter(|&j| fired & (1 << j) != 0)
        .map(|j| 1.0 - ap[gate - j - 1])
        .product();
    p_seq[gate] + (1.0 - p_seq[gate]) * (1.0 - quiet)
}

/// Depth-first walk over the outcomes of gates `gate..n-1`, returning the
/// weighted probability that the last gate fires.
fn enumerate_histories(p_seq: &[f64], ap: &[f64], gate: usize, fired: u32, weight: f64) -> f64 {
    let fire = fire_probability(p_seq, ap, gate, fired);
    if gate + 1 == p_seq.len() {
        return weight * fire;
    }
    let mut total = 0.0;
    if fire > 0.0 {
        total += enumerate_histories(p_seq, ap, gate + 1, fired | (1 << gate), weight * fire);
    }
    if fire < 1.0 {
        total += enumerate_histories(p_seq, ap, gate + 1, fired, weight * (1.0 - fire));
    }
    total
}

/// First-order approximation of the trigger probability of the last gate:
/// `P_n = p_n + (1 - p_n) * sum_{i<n} p_i * p_ap(n - i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerApprox {
    pub probability: f64,
    /// Set when p_ap(1) exceeds the range where dropping products of
    /// afterpulse probabilities is justified.
    pub beyond_validity: bool,
}

pub fn trigger_approx(p_seq: &[f64], traps: &TrapModel, spad: &SpadParams) -> Result<TriggerApprox> {
    let n = p_seq.len();
    if n == 0 {
        return Err(Error::Domain {
            operation: "trigger_approx",
            detail: "empty avalanche sequence".into(),
        });
    }
    let ap = afterpulse_orders(traps, spad, n.saturating_sub(1).max(1))?;
    let p_ap1 = ap[0];
    let last = p_seq[n - 1];
    let history: f64 = p_seq[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &p)| p * ap[n - 1 - i - 1])
        .sum();
    let probability = clamp_probability(last + (1.0 - last) * history, "trigger_approx")?;
    let beyond_validity = p_ap1 > MAX_FIRST_ORDER_AP;
    if beyond_validity {
        log::warn!("first-order afterpulse probability {p_ap1:.3} exceeds {MAX_FIRST_ORDER_AP}; trigger approximation degrades");
    }
    Ok(TriggerApprox {
        probability,
        beyond_validity,
    })
}

/// `p + C * equivalent * (1 - p)`: the shared shape of every asymptotic
/// trigger expression.
pub fn asymptotic_trigger(p: f64, equivalent: f64, afterpulse_total: f64) -> Result<f64> {
    clamp_probability(
        p + afterpulse_total * equivalent * (1.0 - p),
        "asymptotic_trigger",
    )
}

/// Asymptotic trigger probabilities of a single SPAD for avalanche
/// probabilities `p` (history made of the same symbol).
pub fn triggers_single(p: &[f64], afterpulse_total: f64) -> Result<Vec<f64>> {
    p.iter()
        .map(|&pm| asymptotic_trigger(pm, pm, afterpulse_total))
        .collect()
}

/// Asymptotic trigger probabilities of a SPAD array, where each pixel's
/// history is a uniformly random symbol sequence.
pub fn triggers_array(p: &[f64], afterpulse_total: f64) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Ok(Vec::new());
    }
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter()
        .map(|&pm| asymptotic_trigger(pm, mean, afterpulse_total))
        .collect()
}

pub fn asymptotic_trigger_single(
    m: usize,
    pam: &PamScheme,
    spad: &SpadParams,
    traps: &TrapModel,
) -> Result<f64> {
    let p = avalanche_prob(m, pam, spad);
    asymptotic_trigger(p, p, afterpulse_total(traps, spad)?)
}

pub fn asymptotic_trigger_array(
    m: usize,
    pam: &PamScheme,
    spad: &SpadParams,
    traps: &TrapModel,
) -> Result<f64> {
    let p = avalanche_probs(pam, spad);
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    asymptotic_trigger(p[m], mean, afterpulse_total(traps, spad)?)
}

/// Interval that brackets the limiting trigger probability of a gate with
/// avalanche probability `p_last` whose history has avalanche
/// probabilities within `[min, max]`.
pub fn trigger_bounds(p_last: f64, history_min: f64, history_max: f64, afterpulse_total: f64) -> (f64, f64) {
    (
        p_last + history_min * (1.0 - p_last) * afterpulse_total,
        p_last + history_max * (1.0 - p_last) * afterpulse_total,
    )
}

/// `p_ap(1)` of a trap model on a detector, for validity checks.
pub fn first_order_ap(traps: &TrapModel, spad: &SpadParams) -> Result<f64> {
    afterpulse_prob(1, traps, spad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::traps::normalize_traps;

    fn spad() -> SpadParams {
        SpadParams::reference()
    }

    fn single_trap_at(p_ap1: f64) -> TrapModel {
        let shape = TrapModel::from_pairs(&[(0.1, 40.0)], 1.0).unwrap();
        normalize_traps(&shape, &spad(), p_ap1).unwrap()
    }

    #[test]
    fn avalanche_reference_value() {
        let pam = PamScheme::new(vec![0.0, 1.0], 8.0, 0.1).unwrap();
        let p = avalanche_prob(1, &pam, &spad());
        assert!((p - (1.0 - (-1.620088f64).exp())).abs() < 1e-15);
        assert!((p - 0.802_118_715_235_663).abs() < 1e-14);
        let dark = PamScheme::new(vec![0.0, 1.0], 0.0, 0.0).unwrap();
        let no_dark = SpadParams::new(0.1, 2.0, 38.0, 0.0).unwrap();
        assert_eq!(avalanche_prob(0, &dark, &no_dark), 0.0);
    }

    #[test]
    fn exact_first_two_gates() {
        let traps = single_trap_at(0.05);
        let p1 = trigger_exact(&[0.3], &traps, &spad()).unwrap();
        assert_eq!(p1, 0.3);
        let p2 = trigger_exact(&[0.3, 0.3], &traps, &spad()).unwrap();
        assert!((p2 - 0.3105).abs() < 1e-12, "{p2}");
    }

    #[test]
    fn exact_refuses_long_sequences() {
        let seq = vec![0.2; MAX_EXACT_GATES + 1];
        assert!(matches!(
            trigger_exact(&seq, &TrapModel::zero(), &spad()),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn zero_traps_reduce_to_avalanche() {
        let seq = [0.1, 0.7, 0.4, 0.25];
        let z = TrapModel::zero();
        assert!((trigger_exact(&seq, &z, &spad()).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(trigger_approx(&seq, &z, &spad()).unwrap().probability, 0.25);
    }

    #[test]
    fn approximation_is_exact_at_second_gate() {
        let traps = single_trap_at(0.15);
        for &(a, b) in &[(0.1, 0.9), (0.5, 0.5), (0.99, 0.01)] {
            let e = trigger_exact(&[a, b], &traps, &spad()).unwrap();
            let f = trigger_approx(&[a, b], &traps, &spad()).unwrap().probability;
            assert!((e - f).abs() < 1e-15);
        }
    }

    #[test]
    fn validity_flag() {
        let strong = TrapModel::from_pairs(&[(1.0, 40.0)], 1.0).unwrap();
        let p_ap1 = first_order_ap(&strong, &spad()).unwrap();
        assert!(p_ap1 > MAX_FIRST_ORDER_AP);
        assert!(trigger_approx(&[0.2, 0.2], &strong, &spad()).unwrap().beyond_validity);
        assert!(!trigger_approx(&[0.2, 0.2], &single_trap_at(0.1), &spad()).unwrap().beyond_validity);
    }

    #[test]
    fn asymptotic_edges() {
        assert_eq!(asymptotic_trigger(0.4, 0.4, 0.0).unwrap(), 0.4);
        assert_eq!(asymptotic_trigger(1.0, 1.0, 0.7).unwrap(), 1.0);
        // One-symbol constellation: the array mean equals the symbol itself.
        let single = triggers_single(&[0.37], 0.2).unwrap();
        let array = triggers_array(&[0.37], 0.2).unwrap();
        assert_eq!(single, array);
    }
}
