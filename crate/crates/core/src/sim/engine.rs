//! Gate chains for single-SPAD and array receivers.
//!
//! A single SPAD is one temporal chain: the `N` gates of consecutive
//! symbols follow each other and afterpulses cross symbol boundaries. The
//! stream may be split into `sub_runs` contiguous parts simulated as
//! independent chains. An array is `N_A` independent pixel chains with one
//! gate per symbol; the symbol count is the sum over pixels.
//!
//! Every chain first replays the opening symbols of its own part for
//! `warmup` symbols and discards them, so recorded gates never see a cold
//! detector.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::config::SimConfig;
use super::kernel::{AfterpulseKernel, Cause, Chain};
use super::rng::{stream_rng, Purpose};
use super::trace::{GateRecord, GateTrace};
use crate::error::{Error, Result};
use crate::model::{avalanche_probs, ReceiverMode};

/// Runs one chain over `stream` and reports every recorded gate to `sink`
/// as `(symbol position, gate within symbol, outcome)`.
fn run_chain(
    kernel: &AfterpulseKernel,
    config: &SimConfig,
    p: &[f64],
    stream: &[usize],
    warmup: usize,
    rng: &mut impl Rng,
    mut sink: impl FnMut(usize, usize, Option<Cause>),
) {
    let gates = config.chain_gates_per_symbol();
    let mut chain = Chain::new(kernel, config.rearm, config.law);
    for j in 0..warmup {
        let pm = p[stream[j % stream.len()]];
        for _ in 0..gates {
            chain.step(pm, rng);
        }
    }
    for (s, &m) in stream.iter().enumerate() {
        let pm = p[m];
        for g in 0..gates {
            sink(s, g, chain.step(pm, rng));
        }
    }
}

fn check_stream(config: &SimConfig, stream: &[usize]) -> Result<()> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::param("symbol stream", "empty"));
    }
    if let Some(&bad) = stream.iter().find(|&&m| m >= config.pam.order()) {
        return Err(Error::param(
            "symbol stream",
            format!("symbol {bad} outside a {}-level constellation", config.pam.order()),
        ));
    }
    Ok(())
}

fn chunk_bounds(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let parts = parts.clamp(1, len);
    (0..parts)
        .map(|k| (k * len / parts, (k + 1) * len / parts))
        .collect()
}

/// Per-symbol counts; chain `k` draws from stream `(purpose, first_chain + k)`.
pub(crate) fn counts_with(
    config: &SimConfig,
    stream: &[usize],
    purpose: Purpose,
    first_chain: u64,
    warmup: usize,
) -> Result<Vec<u32>> {
    check_stream(config, stream)?;
    let kernel = AfterpulseKernel::new(&config.traps, &config.spad, config.window())?;
    let p = avalanche_probs(&config.pam, &config.spad);
    match config.mode() {
        ReceiverMode::SingleSpad => {
            let parts: Vec<Vec<u32>> = chunk_bounds(stream.len(), config.sub_runs)
                .into_par_iter()
                .enumerate()
                .map(|(k, (lo, hi))| {
                    let part = &stream[lo..hi];
                    let mut counts = vec![0u32; part.len()];
                    let mut rng = stream_rng(config.seed, purpose, first_chain + k as u64);
                    run_chain(&kernel, config, &p, part, warmup, &mut rng, |s, _, out| {
                        counts[s] += u32::from(out.is_some());
                    });
                    counts
                })
                .collect();
            Ok(parts.concat())
        }
        ReceiverMode::SpadArray => Ok((0..config.gates_per_symbol())
            .into_par_iter()
            .fold(
                || vec![0u32; stream.len()],
                |mut counts, pixel| {
                    let mut rng = stream_rng(config.seed, purpose, first_chain + pixel as u64);
                    run_chain(&kernel, config, &p, stream, warmup, &mut rng, |s, _, out| {
                        counts[s] += u32::from(out.is_some());
                    });
                    counts
                },
            )
            .reduce(
                || vec![0u32; stream.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )),
    }
}

/// Fired-gate count of every symbol in `stream`.
pub fn simulate_counts(config: &SimConfig, stream: &[usize]) -> Result<Vec<u32>> {
    counts_with(config, stream, Purpose::DataChain, 0, config.warmup())
}

/// Full per-gate trace of `stream`. Uses the same chains and random streams
/// as [`simulate_counts`], so counts agree exactly.
pub fn simulate_gates(config: &SimConfig, stream: &[usize]) -> Result<GateTrace> {
    check_stream(config, stream)?;
    let kernel = AfterpulseKernel::new(&config.traps, &config.spad, config.window())?;
    let p = avalanche_probs(&config.pam, &config.spad);
    let n = config.gates_per_symbol();
    let warmup = config.warmup();
    let mut outcomes: Vec<Option<Cause>> = vec![None; stream.len() * n];
    match config.mode() {
        ReceiverMode::SingleSpad => {
            for (k, (lo, hi)) in chunk_bounds(stream.len(), config.sub_runs).into_iter().enumerate() {
                let mut rng = stream_rng(config.seed, Purpose::DataChain, k as u64);
                run_chain(&kernel, config, &p, &stream[lo..hi], warmup, &mut rng, |s, g, out| {
                    outcomes[(lo + s) * n + g] = out;
                });
            }
        }
        ReceiverMode::SpadArray => {
            for pixel in 0..n {
                let mut rng = stream_rng(config.seed, Purpose::DataChain, pixel as u64);
                run_chain(&kernel, config, &p, stream, warmup, &mut rng, |s, _, out| {
                    outcomes[s * n + pixel] = out;
                });
            }
        }
    }
    let records: Vec<GateRecord> = outcomes
        .iter()
        .enumerate()
        .map(|(i, &cause)| GateRecord {
            gate_index: i as u64,
            symbol_index: (i / n) as u64,
            symbol_value: stream[i / n],
            cause,
        })
        .collect();
    let counts = outcomes
        .chunks(n)
        .map(|c| c.iter().filter(|o| o.is_some()).count() as u32)
        .collect();
    Ok(GateTrace {
        gates_per_symbol: n,
        records,
        counts,
    })
}

/// Uniformly shuffled stream holding every symbol exactly `repeats` times.
pub fn balanced_stream(order: usize, repeats: usize, seed: u64, purpose: Purpose) -> Vec<usize> {
    let mut stream: Vec<usize> = (0..order).flat_map(|m| std::iter::repeat_n(m, repeats)).collect();
    stream.shuffle(&mut stream_rng(seed, purpose, 0));
    stream
}

/// Independent uniform symbols.
pub fn random_stream(order: usize, length: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, Purpose::Symbols, 1);
    (0..length).map(|_| rng.random_range(0..order)).collect()
}

/// Data stream of a run: every symbol equally often, `symbol_count`
/// rounded up to a multiple of `M`.
pub fn data_stream(config: &SimConfig) -> Vec<usize> {
    let m = config.pam.order();
    balanced_stream(m, config.symbol_count.div_ceil(m), config.seed, Purpose::Symbols)
}

/// Empirical trigger probability of each symbol value.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerRates {
    pub rate: Vec<f64>,
    /// Binomial standard error `sqrt(P (1 - P) / gates)`.
    pub std_error: Vec<f64>,
    /// Gates observed per symbol value.
    pub gates: Vec<u64>,
}

pub fn measure_trigger_rate(config: &SimConfig, stream: &[usize]) -> Result<TriggerRates> {
    let counts = simulate_counts(config, stream)?;
    Ok(trigger_rates(&counts, stream, config.pam.order(), config.gates_per_symbol()))
}

pub(crate) fn trigger_rates(counts: &[u32], stream: &[usize], order: usize, gates: usize) -> TriggerRates {
    let mut fired = vec![0u64; order];
    let mut seen = vec![0u64; order];
    for (&c, &m) in counts.iter().zip(stream) {
        fired[m] += u64::from(c);
        seen[m] += gates as u64;
    }
    let rate: Vec<f64> = fired
        .iter()
        .zip(&seen)
        .map(|(&f, &s)| if s == 0 { f64::NAN } else { f as f64 / s as f64 })
        .collect();
    let std_error = rate
        .iter()
        .zip(&seen)
        .map(|(&r, &s)| (r * (1.0 - r) / s as f64).sqrt())
        .collect();
    TriggerRates {
        rate,
        std_error,
        gates: seen,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PamScheme, ReceiverConfig, SpadParams, TrapModel};

    fn config(mode: ReceiverMode) -> SimConfig {
        let spad = SpadParams::reference();
        let receiver = ReceiverConfig::new(mode, 16, &spad).unwrap();
        let pam = PamScheme::square_root(4, 8.0, 0.1).unwrap();
        let traps = crate::model::normalize_traps(&TrapModel::reference_shape(), &spad, 0.05).unwrap();
        let mut c = SimConfig::new(receiver, pam, spad, traps);
        c.sub_runs = 3;
        c
    }

    #[test]
    fn trace_and_counts_agree() {
        for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
            let c = config(mode);
            let stream = random_stream(4, 200, 9);
            let trace = simulate_gates(&c, &stream).unwrap();
            let counts = simulate_counts(&c, &stream).unwrap();
            assert_eq!(trace.counts(), counts.as_slice());
            assert_eq!(trace.records.len(), 200 * 16);
            assert!(counts.iter().all(|&k| k <= 16));
        }
    }

    #[test]
    fn rejects_bad_streams() {
        let c = config(ReceiverMode::SingleSpad);
        assert!(simulate_counts(&c, &[]).is_err());
        assert!(simulate_counts(&c, &[0, 4]).is_err());
    }

    #[test]
    fn balanced_stream_is_balanced() {
        let s = balanced_stream(4, 25, 1, Purpose::Symbols);
        for m in 0..4 {
            assert_eq!(s.iter().filter(|&&x| x == m).count(), 25);
        }
    }

    #[test]
    fn chunks_cover_stream() {
        assert_eq!(chunk_bounds(10, 3), vec![(0, 3), (3, 6), (6, 10)]);
        assert_eq!(chunk_bounds(2, 5), vec![(0, 1), (1, 2)]);
    }
}
