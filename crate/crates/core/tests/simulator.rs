//! Monte Carlo simulator against exact laws and statistical tests.

use spadlink::model::*;
use spadlink::sim::stats::{chi_square_gof, ks_two_sample};
use spadlink::sim::*;

fn config(mode: ReceiverMode, gates: usize, ap: f64, signal: f64) -> SimConfig {
    let spad = SpadParams::reference();
    let receiver = ReceiverConfig::new(mode, gates, &spad).unwrap();
    let pam = PamScheme::square_root(4, signal, 0.1).unwrap();
    let traps = normalize_traps(&TrapModel::reference_shape(), &spad, ap).unwrap();
    SimConfig::new(receiver, pam, spad, traps)
}

#[test]
fn runs_are_reproducible() {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let mut c = config(mode, 32, 0.11, 8.0);
        c.symbol_count = 2000;
        let stream = data_stream(&c);
        let a = simulate_counts(&c, &stream).unwrap();
        assert_eq!(a, simulate_counts(&c, &stream).unwrap());
        c.seed += 1;
        assert_ne!(a, simulate_counts(&c, &stream).unwrap());
    }
}

#[test]
fn mc_ser_is_reproducible() {
    let mut c = config(ReceiverMode::SingleSpad, 64, 0.05, 4.0);
    c.symbol_count = 4000;
    c.pilot.retransmissions = 200;
    let a = mc_ser_both(&c).unwrap();
    let b = mc_ser_both(&c).unwrap();
    assert_eq!(a.th, b.th);
    assert_eq!(a.ml, b.ml);
    let r = &a.th;
    assert_eq!(r.trials, Some(4000));
    let (lo, hi) = r.interval.unwrap();
    assert!(lo <= r.average && r.average <= hi);
    assert_eq!(r.metadata.seed, Some(c.seed));
}

#[test]
fn without_afterpulsing_counts_are_binomial() {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let mut c = config(mode, 64, 0.0, 8.0);
        c.symbol_count = 100_000;
        let stream = data_stream(&c);
        let counts = simulate_counts(&c, &stream).unwrap();
        let p = avalanche_probs(&c.pam, &c.spad);
        for (m, &pm) in p.iter().enumerate() {
            let mine: Vec<u32> = counts.iter().zip(&stream).filter(|(_, &s)| s == m).map(|(&k, _)| k).collect();
            let expected = count_pmf(pm, 64).unwrap();
            let gof = chi_square_gof(&mine, expected.probabilities());
            assert!(gof.p_value > 0.01, "{mode:?} symbol {m}: p = {}", gof.p_value);
        }
    }
}

#[test]
fn trigger_rate_matches_product_law_without_rearming() {
    // Only primary avalanches trap carriers, so with a constant symbol the
    // gate stays idle iff no primary avalanche and no afterpulse from any
    // earlier primary: 1 - (1 - p) prod_k (1 - a_k p).
    let mut c = config(ReceiverMode::SingleSpad, 16, 0.11, 8.0);
    c.rearm = false;
    c.symbol_count = 20_000;
    let a = afterpulse_orders(&c.traps, &c.spad, c.window()).unwrap();
    let p = avalanche_probs(&c.pam, &c.spad);
    for m in [0, 3] {
        let stream = vec![m; c.symbol_count];
        let rate = measure_trigger_rate(&c, &stream).unwrap();
        let exact = 1.0 - (1.0 - p[m]) * a.iter().map(|ak| 1.0 - ak * p[m]).product::<f64>();
        let z = (rate.rate[m] - exact) / rate.std_error[m];
        assert!(z.abs() < 4.0, "symbol {m}: {} vs {exact} (z = {z})", rate.rate[m]);
    }
}

#[test]
fn array_trigger_rate_matches_product_law_without_rearming() {
    let mut c = config(ReceiverMode::SpadArray, 64, 0.11, 8.0);
    c.rearm = false;
    let stream = random_stream(4, 20_000, 3);
    let a = afterpulse_orders(&c.traps, &c.spad, c.window()).unwrap();
    let p = avalanche_probs(&c.pam, &c.spad);
    let mean = p.iter().sum::<f64>() / 4.0;
    let rate = measure_trigger_rate(&c, &stream).unwrap();
    let idle: f64 = a.iter().map(|ak| 1.0 - ak * mean).product();
    for m in 0..4 {
        let exact = 1.0 - (1.0 - p[m]) * idle;
        let z = (rate.rate[m] - exact) / rate.std_error[m];
        assert!(z.abs() < 4.0, "symbol {m}: {} vs {exact} (z = {z})", rate.rate[m]);
    }
}

#[test]
fn rearming_adds_afterpulses_of_afterpulses() {
    let mut c = config(ReceiverMode::SingleSpad, 16, 0.11, 8.0);
    let stream = vec![3; 20_000];
    let with = measure_trigger_rate(&c, &stream).unwrap();
    c.rearm = false;
    let without = measure_trigger_rate(&c, &stream).unwrap();
    assert!(with.rate[3] > without.rate[3] + 3.0 * with.std_error[3]);
}

#[test]
fn trigger_rate_grows_with_afterpulsing() {
    let stream = random_stream(4, 10_000, 5);
    let rates: Vec<f64> = [0.0, 0.05, 0.11]
        .iter()
        .map(|&ap| {
            let c = config(ReceiverMode::SingleSpad, 32, ap, 8.0);
            measure_trigger_rate(&c, &stream).unwrap().rate[1]
        })
        .collect();
    assert!(rates[0] < rates[1] && rates[1] < rates[2], "{rates:?}");
}

#[test]
fn halving_the_history_window_loses_only_the_tail() {
    let mut c = config(ReceiverMode::SingleSpad, 32, 0.11, 8.0);
    let h = c.window();
    let stream = vec![2; 20_000];
    let full = measure_trigger_rate(&c, &stream).unwrap();
    c.history_window = Some(h / 2);
    let half = measure_trigger_rate(&c, &stream).unwrap();
    let a = afterpulse_orders(&c.traps, &c.spad, h).unwrap();
    let tail: f64 = a[h / 2..].iter().sum();
    let se = (full.std_error[2].powi(2) + half.std_error[2].powi(2)).sqrt();
    let gap = full.rate[2] - half.rate[2];
    assert!(gap.abs() <= 2.0 * tail + 4.0 * se, "gap {gap}, tail {tail}, se {se}");
}

#[test]
fn sub_runs_do_not_change_the_count_distribution() {
    let mut c = config(ReceiverMode::SingleSpad, 64, 0.05, 8.0);
    c.symbol_count = 20_000;
    let stream = vec![2; c.symbol_count];
    c.sub_runs = 1;
    let one = simulate_counts(&c, &stream).unwrap();
    c.sub_runs = 8;
    c.seed += 100;
    let eight = simulate_counts(&c, &stream).unwrap();
    let ks = ks_two_sample(&one, &eight);
    assert!(!ks.rejects(), "D = {} > {}", ks.statistic, ks.critical);
}

#[test]
fn single_and_array_histories_differ() {
    // A dim symbol sees its own dim history on a single SPAD but the
    // constellation average on an array.
    let stream = random_stream(4, 20_000, 8);
    let single = measure_trigger_rate(&config(ReceiverMode::SingleSpad, 64, 0.11, 8.0), &stream).unwrap();
    let array = measure_trigger_rate(&config(ReceiverMode::SpadArray, 64, 0.11, 8.0), &stream).unwrap();
    let se = (single.std_error[0].powi(2) + array.std_error[0].powi(2)).sqrt();
    assert!(array.rate[0] - single.rate[0] > 5.0 * se);
}

#[test]
fn gate_trace_csv_layout() {
    let mut c = config(ReceiverMode::SpadArray, 4, 0.05, 8.0);
    c.symbol_count = 3;
    let trace = simulate_gates(&c, &[0, 3, 1]).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gate_index,symbol_index,symbol_value,fired,cause"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn general_pilot_recovers_avalanche_probabilities_without_afterpulsing() {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let mut c = config(mode, 128, 0.0, 8.0);
        c.pilot.retransmissions = 2000;
        let est = run_pilot(&c).unwrap();
        let p = avalanche_probs(&c.pam, &c.spad);
        for (e, t) in est.avalanche.iter().zip(&p) {
            let se = (t * (1.0 - t) / (128.0 * 2000.0)).sqrt();
            assert!((e - t).abs() < 4.0 * se + 1e-12, "{mode:?}: {e} vs {t}");
        }
        assert_eq!(est.trigger, est.avalanche);
    }
}

#[test]
fn history_enhanced_pilot() {
    let mut c = config(ReceiverMode::SpadArray, 128, 0.05, 8.0);
    c.pilot.scheme = PilotScheme::HistoryEnhanced;
    c.pilot.retransmissions = 4000;
    let est = run_pilot(&c).unwrap();
    assert_eq!(est.retransmissions, 1000);
    assert!(est.diagnostic.is_none());
    let p = avalanche_probs(&c.pam, &c.spad);
    for (e, t) in est.avalanche.iter().zip(&p) {
        assert!((e - t).abs() < 0.02, "{e} vs {t}");
    }
    let mut single = config(ReceiverMode::SingleSpad, 16, 0.05, 8.0);
    single.pilot.scheme = PilotScheme::HistoryEnhanced;
    assert!(matches!(run_pilot(&single), Err(spadlink::Error::Config(_))));
    c.pilot.retransmissions = 0;
    assert!(run_pilot(&c).is_err());
}

#[test]
fn threshold_and_likelihood_agree_in_simulation() {
    let mut c = config(ReceiverMode::SpadArray, 256, 0.11, 8.0);
    c.symbol_count = 50_000;
    let r = mc_ser_both(&c).unwrap();
    assert_eq!(r.th.errors, r.ml.errors);
    assert_eq!(r.th.per_symbol, r.ml.per_symbol);
}
