//! Detector timing, modulation and receiver-layout parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon detection efficiency used by the reference InGaAs/InP detector.
pub const DEFAULT_PDE: f64 = 0.10;
/// Dark carrier rate of the reference detector, counts/ns.
pub const DEFAULT_DARK_RATE: f64 = 4.4e-5;
/// Pixel count of the reference SPAD array.
pub const DEFAULT_ARRAY_SCALE: usize = 256;

/// Level sets of the modified square-root PAM constellations.
pub const SQRT_PAM2: [f64; 2] = [0.0, 1.0];
pub const SQRT_PAM4: [f64; 4] = [0.0, 0.25, 0.56, 1.0];
pub const SQRT_PAM8: [f64; 8] = [0.0, 0.02, 0.08, 0.18, 0.33, 0.51, 0.73, 1.0];

/// Timing and efficiency of a time-gated SPAD.
///
/// All times are in nanoseconds and rates in counts per nanosecond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpadParams {
    pde: f64,
    gate_on: f64,
    dead_time: f64,
    cycle: f64,
    dark_rate: f64,
}

impl SpadParams {
    pub fn new(pde: f64, gate_on_ns: f64, dead_time_ns: f64, dark_rate: f64) -> Result<Self> {
        Self::with_cycle(
            pde,
            gate_on_ns,
            dead_time_ns,
            gate_on_ns + dead_time_ns,
            dark_rate,
        )
    }

    /// Builds parameters from an explicit detection cycle, rejecting triples
    /// where the cycle is not the sum of gate-ON interval and dead time.
    pub fn with_cycle(
        pde: f64,
        gate_on_ns: f64,
        dead_time_ns: f64,
        cycle_ns: f64,
        dark_rate: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&pde) {
            return Err(Error::param("pde", format!("{pde} is not in [0, 1]")));
        }
        if !(gate_on_ns.is_finite() && gate_on_ns > 0.0) {
            return Err(Error::param("tau_g_ns", format!("{gate_on_ns} must be > 0")));
        }
        if !(dead_time_ns.is_finite() && dead_time_ns >= 0.0) {
            return Err(Error::param(
                "tau_d_ns",
                format!("{dead_time_ns} must be >= 0"),
            ));
        }
        if !(dark_rate.is_finite() && dark_rate >= 0.0) {
            return Err(Error::param(
                "dark_rate_per_ns",
                format!("{dark_rate} must be >= 0"),
            ));
        }
        let sum = gate_on_ns + dead_time_ns;
        if !cycle_ns.is_finite() || (cycle_ns - sum).abs() > 1e-9 * sum.max(1.0) {
            return Err(Error::invariant(
                "tau_cyc == tau_g + tau_d",
                format!("tau_cyc = {cycle_ns} ns but tau_g + tau_d = {sum} ns"),
            ));
        }
        Ok(Self {
            pde,
            gate_on: gate_on_ns,
            dead_time: dead_time_ns,
            cycle: sum,
            dark_rate,
        })
    }

    /// Reference detector: PDE 10 %, 2 ns gate, 40 ns cycle.
    pub fn reference() -> Self {
        Self::new(DEFAULT_PDE, 2.0, 38.0, DEFAULT_DARK_RATE).expect("reference parameters")
    }

    pub fn pde(&self) -> f64 {
        self.pde
    }

    pub fn gate_on(&self) -> f64 {
        self.gate_on
    }

    pub fn dead_time(&self) -> f64 {
        self.dead_time
    }

    pub fn cycle(&self) -> f64 {
        self.cycle
    }

    pub fn dark_rate(&self) -> f64 {
        self.dark_rate
    }

    /// Same detector with a different dead time (and hence cycle).
    pub fn with_dead_time(&self, dead_time_ns: f64) -> Result<Self> {
        Self::new(self.pde, self.gate_on, dead_time_ns, self.dark_rate)
    }
}

/// M-PAM intensity constellation with its photon rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PamScheme {
    levels: Vec<f64>,
    peak_signal_rate: f64,
    background_rate: f64,
}

impl PamScheme {
    pub fn new(levels: Vec<f64>, peak_signal_rate: f64, background_rate: f64) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::param(
                "order",
                format!("M = {} but at least 2 levels are required", levels.len()),
            ));
        }
        if levels[0] != 0.0 || *levels.last().unwrap() != 1.0 {
            return Err(Error::invariant(
                "levels span [0, 1]",
                format!("first = {}, last = {}", levels[0], levels.last().unwrap()),
            ));
        }
        if let Some(w) = levels.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invariant(
                "levels strictly increasing",
                format!("{} is followed by {}", w[0], w[1]),
            ));
        }
        if !(peak_signal_rate.is_finite() && peak_signal_rate >= 0.0) {
            return Err(Error::param(
                "signal_rate_per_ns",
                format!("{peak_signal_rate} must be >= 0"),
            ));
        }
        if !(background_rate.is_finite() && background_rate >= 0.0) {
            return Err(Error::param(
                "background_rate_per_ns",
                format!("{background_rate} must be >= 0"),
            ));
        }
        Ok(Self {
            levels,
            peak_signal_rate,
            background_rate,
        })
    }

    /// Modified square-root constellation for M in {2, 4, 8}.
    pub fn square_root(order: usize, peak_signal_rate: f64, background_rate: f64) -> Result<Self> {
        let levels = match order {
            2 => SQRT_PAM2.to_vec(),
            4 => SQRT_PAM4.to_vec(),
            8 => SQRT_PAM8.to_vec(),
            _ => {
                return Err(Error::param(
                    "order",
                    format!("no square-root constellation for M = {order} (use 2, 4 or 8)"),
                ))
            }
        };
        Self::new(levels, peak_signal_rate, background_rate)
    }

    pub fn order(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn peak_signal_rate(&self) -> f64 {
        self.peak_signal_rate
    }

    pub fn background_rate(&self) -> f64 {
        self.background_rate
    }

    /// Signal photon rate while symbol `m` (0-based) is on the air.
    pub fn signal_rate(&self, m: usize) -> f64 {
        self.levels[m] * self.peak_signal_rate
    }

    pub fn with_peak_signal_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.levels.clone(), rate, self.background_rate)
    }

    pub fn with_background_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.levels.clone(), self.peak_signal_rate, rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverMode {
    /// One SPAD opening N consecutive gates per symbol.
    SingleSpad,
    /// N_A pixels, each opening one gate per symbol.
    SpadArray,
}

impl ReceiverMode {
    pub fn label(self) -> &'static str {
        match self {
            ReceiverMode::SingleSpad => "single",
            ReceiverMode::SpadArray => "array",
        }
    }
}

impl std::fmt::Display for ReceiverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How many gates contribute to one symbol's photon count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverConfig {
    mode: ReceiverMode,
    gates: usize,
    symbol_duration: Option<f64>,
}

impl ReceiverConfig {
    /// Single SPAD: N = T_s / tau_cyc gates per symbol.
    pub fn single_spad(symbol_duration_ns: f64, spad: &SpadParams) -> Result<Self> {
        if !(symbol_duration_ns.is_finite() && symbol_duration_ns >= spad.cycle()) {
            return Err(Error::param(
                "symbol_duration_ns",
                format!(
                    "{symbol_duration_ns} ns is shorter than one detection cycle ({} ns)",
                    spad.cycle()
                ),
            ));
        }
        let gates = (symbol_duration_ns / spad.cycle()).round() as usize;
        if (gates as f64 * spad.cycle() - symbol_duration_ns).abs() >= spad.cycle() {
            return Err(Error::invariant(
                "N * tau_cyc == T_s",
                format!("{gates} gates do not fill {symbol_duration_ns} ns"),
            ));
        }
        Ok(Self {
            mode: ReceiverMode::SingleSpad,
            gates,
            symbol_duration: Some(symbol_duration_ns),
        })
    }

    /// Single SPAD described directly by its gate count.
    pub fn single_spad_gates(gates: usize, spad: &SpadParams) -> Result<Self> {
        if gates == 0 {
            return Err(Error::param("gates_per_symbol", "must be >= 1"));
        }
        Ok(Self {
            mode: ReceiverMode::SingleSpad,
            gates,
            symbol_duration: Some(gates as f64 * spad.cycle()),
        })
    }

    pub fn spad_array(array_scale: usize) -> Result<Self> {
        if array_scale == 0 {
            return Err(Error::param("array_scale", "must be >= 1"));
        }
        Ok(Self {
            mode: ReceiverMode::SpadArray,
            gates: array_scale,
            symbol_duration: None,
        })
    }

    pub fn new(mode: ReceiverMode, gates: usize, spad: &SpadParams) -> Result<Self> {
        match mode {
            ReceiverMode::SingleSpad => Self::single_spad_gates(gates, spad),
            ReceiverMode::SpadArray => Self::spad_array(gates),
        }
    }

    pub fn mode(&self) -> ReceiverMode {
        self.mode
    }

    pub fn gates_per_symbol(&self) -> usize {
        self.gates
    }

    pub fn symbol_duration(&self) -> Option<f64> {
        self.symbol_duration
    }
}
