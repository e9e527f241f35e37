//! Binomial distribution of the photon count in one symbol.
//!
//! Log-probabilities use Loader's saddle-point expansion (Stirling error
//! plus deviance), which keeps full relative precision in the tails and
//! does not overflow for large gate counts.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Stirling error at n = 0..=15. Entry 0 is unused.
const STIRLING_ERROR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Stirling-series remainder `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return STIRLING_ERROR_TABLE[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation
/// when `x` is close to `np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln[C(n, k) p^k (1 - p)^(n - k)]`.
pub fn ln_binomial_pmf(k: usize, n: usize, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (x, nf) = (k as f64, n as f64);
    if k == 0 {
        return if p < 0.1 {
            -deviance(nf, nf * q) - nf * p
        } else {
            nf * (-p).ln_1p()
        };
    }
    if k == n {
        return if q < 0.1 {
            -deviance(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let lc = stirling_error(nf) - stirling_error(x) - stirling_error(nf - x)
        - deviance(x, nf * p)
        - deviance(nf - x, nf * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

/// Count distribution of a symbol observed through `gates` gates, each
/// firing with probability `trigger`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    gates: usize,
    trigger: f64,
    pmf: Vec<f64>,
}

impl CountDistribution {
    pub fn gates(&self) -> usize {
        self.gates
    }

    pub fn trigger(&self) -> f64 {
        self.trigger
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p)
            .sum()
    }

    /// `P(lo <= count <= hi)`, summed term by term so small tails keep
    /// their relative precision.
    pub fn mass(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi || lo > self.gates {
            return 0.0;
        }
        self.pmf[lo..=hi.min(self.gates)].iter().sum()
    }

    /// `P(count < threshold)` for a real threshold.
    pub fn below(&self, threshold: f64) -> f64 {
        if threshold <= 0.0 {
            return 0.0;
        }
        let first_not_below = threshold.ceil() as usize;
        if first_not_below == 0 {
            return 0.0;
        }
        self.mass(0, first_not_below - 1)
    }

    /// `P(count >= threshold)` for a real threshold.
    pub fn at_or_above(&self, threshold: f64) -> f64 {
        let lo = threshold.max(0.0).ceil() as usize;
        self.mass(lo, self.gates)
    }
}

/// Binomial count PMF `C(N, k) P^k (1 - P)^(N - k)`.
pub fn count_pmf(trigger: f64, gates: usize) -> Result<CountDistribution> {
    if !(0.0..=1.0).contains(&trigger) {
        return Err(Error::param(
            "trigger probability",
            format!("{trigger} is not in [0, 1]"),
        ));
    }
    if gates == 0 {
        return Err(Error::param("gates", "must be >= 1"));
    }
    let pmf = (0..=gates)
        .map(|k| ln_binomial_pmf(k, gates, trigger).exp())
        .collect();
    Ok(CountDistribution {
        gates,
        trigger,
        pmf,
    })
}
