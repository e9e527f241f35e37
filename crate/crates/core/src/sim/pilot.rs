//! Pilot transmission and receiver-side estimation.

use rayon::prelude::*;

use super::config::{PilotScheme, SimConfig};
use super::engine::{balanced_stream, counts_with};
use super::rng::Purpose;
use crate::detection::{
    estimate_avalanche_general, estimate_history_enhanced, estimate_trigger, NewtonSettings,
    PilotEstimate,
};
use crate::error::{Error, Result};
use crate::model::{afterpulse_orders, afterpulse_total, ReceiverMode};

/// Sends the configured pilot and estimates the avalanche and trigger
/// probability of every symbol from the received counts.
///
/// General scheme: a single SPAD receives each symbol as its own block of
/// `L` symbols; an array receives a shuffled sequence holding each symbol
/// `L` times, so every pixel sees a mixed history as it does during data.
/// History-enhanced scheme (arrays only): the cycle `x_1 .. x_M` is sent
/// `L / M` times and the counts of every period are averaged.
pub fn run_pilot(config: &SimConfig) -> Result<PilotEstimate> {
    let l = config.pilot.retransmissions;
    if l == 0 {
        return Err(Error::param("pilot retransmissions", "must be >= 1"));
    }
    let order = config.pam.order();
    let n = config.gates_per_symbol() as f64;
    let c = afterpulse_total(&config.traps, &config.spad)?;
    let mode = config.mode();

    match config.pilot.scheme {
        PilotScheme::General => {
            let means = match mode {
                ReceiverMode::SingleSpad => (0..order)
                    .into_par_iter()
                    .map(|m| {
                        let block = vec![m; l];
                        let mut single = config.clone();
                        single.sub_runs = 1;
                        let counts = counts_with(&single, &block, Purpose::PilotChain, m as u64, config.warmup())?;
                        Ok(mean(&counts))
                    })
                    .collect::<Result<Vec<f64>>>()?,
                ReceiverMode::SpadArray => {
                    let stream = balanced_stream(order, l, config.seed, Purpose::PilotOrder);
                    let counts = counts_with(config, &stream, Purpose::PilotChain, 0, config.warmup())?;
                    per_symbol_means(&counts, &stream, order)
                }
            };
            let avalanche = estimate_avalanche_general(&means, n as usize, c, mode, config.pilot.form)?;
            let trigger = estimate_trigger(&avalanche, c, mode)?;
            Ok(PilotEstimate {
                mean_counts: means,
                trigger,
                avalanche,
                retransmissions: l,
                diagnostic: None,
            })
        }
        PilotScheme::HistoryEnhanced => {
            if mode != ReceiverMode::SpadArray {
                return Err(Error::Config(
                    "the history-enhanced pilot requires an array receiver".into(),
                ));
            }
            let periods = l / order;
            if periods == 0 {
                return Err(Error::param(
                    "pilot retransmissions",
                    format!("{l} is shorter than one {order}-symbol cycle"),
                ));
            }
            let stream: Vec<usize> = (0..periods).flat_map(|_| 0..order).collect();
            // Keep the warm-up a whole number of cycles so the history
            // pattern is unbroken.
            let warmup = config.warmup().div_ceil(order) * order;
            let counts = counts_with(config, &stream, Purpose::PilotChain, 0, warmup)?;
            let means = per_symbol_means(&counts, &stream, order);
            let p_prime: Vec<f64> = means.iter().map(|x| x / n).collect();
            let low = afterpulse_orders(&config.traps, &config.spad, order - 1)?;
            let solution = estimate_history_enhanced(
                &p_prime,
                &low,
                c,
                config.pilot.form,
                NewtonSettings::default(),
            )?;
            let trigger = estimate_trigger(&solution.avalanche, c, mode)?;
            Ok(PilotEstimate {
                mean_counts: means,
                trigger,
                avalanche: solution.avalanche,
                retransmissions: periods,
                diagnostic: solution.fallback,
            })
        }
    }
}

fn mean(counts: &[u32]) -> f64 {
    counts.iter().map(|&c| f64::from(c)).sum::<f64>() / counts.len() as f64
}

fn per_symbol_means(counts: &[u32], stream: &[usize], order: usize) -> Vec<f64> {
    let mut sum = vec![0.0; order];
    let mut seen = vec![0usize; order];
    for (&c, &m) in counts.iter().zip(stream) {
        sum[m] += f64::from(c);
        seen[m] += 1;
    }
    sum.iter().zip(&seen).map(|(s, &k)| s / k as f64).collect()
}
