//! Goodness-of-fit helpers for comparing simulated counts with analytical
//! laws.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Relative frequency of each count `0..=gates`.
pub fn empirical_pmf(counts: &[u32], gates: usize) -> Vec<f64> {
    let mut hist = vec![0.0; gates + 1];
    for &c in counts {
        hist[c as usize] += 1.0;
    }
    let n = counts.len().max(1) as f64;
    hist.iter_mut().for_each(|h| *h /= n);
    hist
}

/// `1/2 sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    0.5 * (0..len)
        .map(|i| (p.get(i).unwrap_or(&0.0) - q.get(i).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts `0..=N` against `expected`
/// probabilities. Adjacent bins are pooled until each pooled bin expects at
/// least five observations.
pub fn chi_square_gof(counts: &[u32], expected: &[f64]) -> ChiSquareTest {
    let total = counts.len() as f64;
    let mut observed = vec![0.0; expected.len()];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (ob, ex) in observed.iter().zip(expected) {
        o += ob;
        e += ex * total;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += o;
            last.1 += e;
        }
        None => bins.push((o, e)),
    }
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let degrees_of_freedom = bins.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(degrees_of_freedom as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquareTest {
        statistic,
        degrees_of_freedom,
        p_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    /// Critical value of the statistic at significance 0.01.
    pub critical: f64,
}

impl KsTest {
    pub fn rejects(&self) -> bool {
        self.statistic > self.critical
    }
}

/// Two-sample Kolmogorov-Smirnov test at significance 0.01.
pub fn ks_two_sample(a: &[u32], b: &[u32]) -> KsTest {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    const C_001: f64 = 1.627_765_157_464_244;
    KsTest {
        statistic: d,
        critical: C_001 * ((n + m) / (n * m)).sqrt(),
    }
}
