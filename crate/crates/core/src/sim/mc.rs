//! Monte Carlo symbol error rate.

use super::config::SimConfig;
use super::engine::{data_stream, simulate_counts};
use super::pilot::run_pilot;
use crate::detection::{
    build_thresholds, decide, wilson_interval, Detection, MlDetector, PilotEstimate, SerMetadata,
    SerResult,
};
use crate::error::Result;
use crate::model::trigger::first_order_ap;

/// Errors needed before a measured SER is considered reliable.
pub const MIN_RELIABLE_ERRORS: u64 = 100;

/// Threshold and likelihood decisions on the same received counts.
#[derive(Debug, Clone, PartialEq)]
pub struct McSer {
    pub th: SerResult,
    pub ml: SerResult,
    pub pilot: PilotEstimate,
}

impl McSer {
    pub fn get(&self, detection: Detection) -> &SerResult {
        match detection {
            Detection::Th => &self.th,
            Detection::Ml => &self.ml,
        }
    }
}

/// True when a measured SER rests on at least [`MIN_RELIABLE_ERRORS`]
/// errors.
pub fn is_reliable(result: &SerResult) -> bool {
    result.errors.is_some_and(|e| e >= MIN_RELIABLE_ERRORS)
}

/// SER of the configured detector.
pub fn mc_ser(config: &SimConfig) -> Result<SerResult> {
    Ok(mc_ser_both(config)?.get(config.detection).clone())
}

/// Runs the pilot, builds both receivers from its estimates, then sends a
/// shuffled data stream with every symbol equally often and decides each
/// received count with both.
pub fn mc_ser_both(config: &SimConfig) -> Result<McSer> {
    let pilot = run_pilot(config)?;
    let gates = config.gates_per_symbol();
    let thresholds = build_thresholds(&pilot.trigger, gates)?;
    let ml = MlDetector::new(&pilot.trigger, gates)?;
    let stream = data_stream(config);
    let counts = simulate_counts(config, &stream)?;

    let order = config.pam.order();
    let mut errors = [vec![0u64; order], vec![0u64; order]];
    let mut sent = vec![0u64; order];
    for (&k, &m) in counts.iter().zip(&stream) {
        sent[m] += 1;
        errors[0][m] += u64::from(decide(f64::from(k), &thresholds) != m);
        errors[1][m] += u64::from(ml.decide(k as usize) != m);
    }
    let p_ap1 = first_order_ap(&config.traps, &config.spad)?;
    let build = |errs: &[u64], detection: Detection| {
        let per_symbol = errs
            .iter()
            .zip(&sent)
            .map(|(&e, &s)| e as f64 / s as f64)
            .collect();
        let total: u64 = errs.iter().sum();
        let trials = stream.len() as u64;
        let mut r = SerResult::from_per_symbol(
            per_symbol,
            SerMetadata {
                receiver: Some(config.mode()),
                gates,
                order,
                signal_rate: Some(config.pam.peak_signal_rate()),
                background_rate: Some(config.pam.background_rate()),
                first_order_ap: Some(p_ap1),
                detection: Some(detection),
                seed: Some(config.seed),
            },
        );
        r.trials = Some(trials);
        r.errors = Some(total);
        r.interval = Some(wilson_interval(total, trials));
        r
    };
    Ok(McSer {
        th: build(&errors[0], Detection::Th),
        ml: build(&errors[1], Detection::Ml),
        pilot,
    })
}
