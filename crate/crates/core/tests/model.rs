//! Analytical model against independent numerical oracles.

use approx::assert_relative_eq;
use proptest::prelude::*;
use spadlink::model::pmf::ln_binomial_pmf;
use spadlink::model::traps::{REFERENCE_DENSITIES, REFERENCE_LIFETIMES_NS};
use spadlink::model::*;
use statrs::distribution::{Binomial, Discrete};

fn traps(spad: &SpadParams, ap: f64) -> TrapModel {
    normalize_traps(&TrapModel::reference_shape(), spad, ap).unwrap()
}

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Release density integrated over the gate that opens `n` cycles later.
fn afterpulse_by_quadrature(n: usize, t: &TrapModel, spad: &SpadParams) -> f64 {
    let start = n as f64 * spad.cycle();
    let density = |x: f64| {
        t.components()
            .iter()
            .map(|c| c.amplitude * (-x / c.lifetime).exp())
            .sum::<f64>()
    };
    t.scale() * simpson(density, start, start + spad.gate_on(), 2000)
}

#[test]
fn afterpulse_orders_match_quadrature() {
    for (gate, dead) in [(1.0, 39.0), (2.0, 38.0), (10.0, 90.0)] {
        let spad = SpadParams::new(0.1, gate, dead, 4.4e-5).unwrap();
        let t = traps(&spad, 0.05);
        for n in [1, 2, 5, 20, 100] {
            let model = afterpulse_prob(n, &t, &spad).unwrap();
            let oracle = afterpulse_by_quadrature(n, &t, &spad);
            assert_relative_eq!(model, oracle, max_relative = 1e-9);
        }
    }
}

#[test]
fn afterpulse_total_matches_partial_sum() {
    for gate in [1.0, 2.0, 10.0] {
        for cycle in [40.0, 50.0, 100.0] {
            let spad = SpadParams::new(0.1, gate, cycle - gate, 4.4e-5).unwrap();
            let t = traps(&spad, 0.05);
            let partial: f64 = (1..=5000).map(|n| afterpulse_prob(n, &t, &spad).unwrap()).sum();
            let total = afterpulse_total(&t, &spad).unwrap();
            assert!((total - partial).abs() <= 1e-10, "{gate} {cycle}: {total} vs {partial}");
        }
    }
}

#[test]
fn reference_detector_constants() {
    assert_eq!(REFERENCE_LIFETIMES_NS, [0.1, 1.0, 6.6, 26.5, 168.9, 1078.7]);
    assert_eq!(REFERENCE_DENSITIES.len(), 6);
    let spad = SpadParams::reference();
    assert_eq!((spad.pde(), spad.gate_on(), spad.cycle()), (0.1, 2.0, 40.0));
    assert_eq!(spad.dark_rate(), 4.4e-5);
    let c = afterpulse_total(&traps(&spad, 0.05), &spad).unwrap();
    assert!(c > 0.05 && c < 0.5, "{c}");
}

/// Direct sum over every fired/idle pattern of the earlier gates.
fn trigger_by_patterns(p: &[f64], ap: &[f64]) -> f64 {
    let n = p.len();
    let earlier = n - 1;
    let mut total = 0.0;
    for mask in 0u32..(1 << earlier) {
        let fired = |j: usize| mask >> j & 1 == 1;
        let mut weight = 1.0;
        for i in 0..earlier {
            let mut idle = 1.0 - p[i];
            for j in 0..i {
                if fired(j) {
                    idle *= 1.0 - ap[i - j - 1];
                }
            }
            weight *= if fired(i) { 1.0 - idle } else { idle };
        }
        let mut idle = 1.0 - p[earlier];
        for j in 0..earlier {
            if fired(j) {
                idle *= 1.0 - ap[earlier - j - 1];
            }
        }
        total += weight * (1.0 - idle);
    }
    total
}

#[test]
fn exact_trigger_matches_pattern_sum() {
    let spad = SpadParams::reference();
    let t = traps(&spad, 0.11);
    let ap = afterpulse_orders(&t, &spad, 12).unwrap();
    let seqs: [&[f64]; 3] = [
        &[0.2, 0.7, 0.1, 0.5, 0.9, 0.3],
        &[0.8; 10],
        &[0.05, 0.6, 0.05, 0.6, 0.05, 0.6, 0.05, 0.6, 0.05, 0.6, 0.05],
    ];
    for p in seqs {
        let exact = trigger_exact(p, &t, &spad).unwrap();
        assert_relative_eq!(exact, trigger_by_patterns(p, &ap), max_relative = 1e-12);
    }
}

#[test]
fn pmf_matches_statrs_binomial() {
    for (p, n) in [(0.03, 256), (0.5, 100), (0.97, 1024), (1e-6, 50)] {
        let dist = count_pmf(p, n).unwrap();
        let oracle = Binomial::new(p, n as u64).unwrap();
        for k in 0..=n {
            let a = dist.pmf(k);
            let b = oracle.pmf(k as u64);
            assert!((a - b).abs() <= 1e-10 * b + 1e-300,
                "p={p} n={n} k={k}: {a} vs {b}");
            let lb = oracle.ln_pmf(k as u64);
            if lb > -700.0 {
                assert!((ln_binomial_pmf(k, n, p) - lb).abs() < 1e-9 * lb.abs().max(1.0));
            }
        }
    }
}

fn trap_scale() -> impl Strategy<Value = f64> {
    0.0..0.19f64
}

proptest! {
    #[test]
    fn afterpulse_orders_decrease(ap in trap_scale(), gate in 0.5..10.0f64, dead in 5.0..100.0f64) {
        let spad = SpadParams::new(0.1, gate, dead, 4.4e-5).unwrap();
        let t = traps(&spad, ap);
        let orders = afterpulse_orders(&t, &spad, 50).unwrap();
        prop_assert!(orders.windows(2).all(|w| w[1] <= w[0]));
        let c = afterpulse_total(&t, &spad).unwrap();
        prop_assert!(c + 1e-15 >= orders.iter().sum::<f64>());
    }

    #[test]
    fn normalization_hits_target(ap in trap_scale(), gate in 0.5..10.0f64, dead in 10.0..100.0f64) {
        let spad = SpadParams::new(0.1, gate, dead, 4.4e-5).unwrap();
        let t = traps(&spad, ap);
        prop_assert!((afterpulse_prob(1, &t, &spad).unwrap() - ap).abs() < 1e-12);
    }

    #[test]
    fn pmf_is_a_distribution(p in 1e-6..0.999999f64, n in 1usize..600) {
        let d = count_pmf(p, n).unwrap();
        let sum: f64 = d.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
        prop_assert!((d.mean() - n as f64 * p).abs() < 1e-8 * n as f64);
    }

    #[test]
    fn asymptotic_triggers_are_ordered(ap in trap_scale(), ls in 0.5..16.0f64, lb in 0.0..2.0f64) {
        let spad = SpadParams::reference();
        let t = traps(&spad, ap);
        let pam = PamScheme::square_root(4, ls, lb).unwrap();
        let p = avalanche_probs(&pam, &spad);
        for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
            let trig = symbol_triggers(mode, &pam, &spad, &t).unwrap();
            for (pt, pp) in trig.iter().zip(&p) {
                prop_assert!(*pt >= *pp && *pt <= 1.0);
            }
            prop_assert!(trig.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn approximation_never_undershoots_avalanche(ap in trap_scale(), p in proptest::collection::vec(0.0..1.0f64, 1..12)) {
        let spad = SpadParams::reference();
        let t = traps(&spad, ap);
        let a = trigger_approx(&p, &t, &spad).unwrap().probability;
        prop_assert!(a >= p[p.len() - 1] - 1e-15 && a <= 1.0);
    }
}
