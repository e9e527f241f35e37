//! Monte Carlo run configuration.

use serde::{Deserialize, Serialize};

use super::kernel::AfterpulseLaw;
use crate::detection::{Detection, InversionForm};
use crate::error::{Error, Result};
use crate::model::{history_window, PamScheme, ReceiverConfig, ReceiverMode, SpadParams, TrapModel};

/// Afterpulse probability below which older history is ignored.
pub const HISTORY_GUARD: f64 = 1e-9;
/// Upper bound on the history window, in gates.
pub const MAX_HISTORY_WINDOW: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotScheme {
    /// Each symbol repeated `L` times.
    General,
    /// The cycle `x_1 .. x_M` repeated `L / M` times (arrays only).
    HistoryEnhanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub retransmissions: usize,
    pub scheme: PilotScheme,
    pub form: InversionForm,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            retransmissions: 1000,
            scheme: PilotScheme::General,
            form: InversionForm::Corrected,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub receiver: ReceiverConfig,
    pub pam: PamScheme,
    pub spad: SpadParams,
    pub traps: TrapModel,
    pub symbol_count: usize,
    pub seed: u64,
    /// History window in gates; `None` picks the smallest order whose
    /// afterpulse probability is below [`HISTORY_GUARD`].
    pub history_window: Option<usize>,
    pub pilot: PilotConfig,
    pub detection: Detection,
    pub law: AfterpulseLaw,
    /// Whether afterpulse-fired gates trap carriers and cause afterpulses
    /// themselves.
    pub rearm: bool,
    /// Independent chains a single-SPAD stream is split into.
    pub sub_runs: usize,
    /// Symbols simulated and discarded before each chain starts recording;
    /// `None` covers one history window.
    pub warmup_symbols: Option<usize>,
}

impl SimConfig {
    pub fn new(receiver: ReceiverConfig, pam: PamScheme, spad: SpadParams, traps: TrapModel) -> Self {
        Self {
            receiver,
            pam,
            spad,
            traps,
            symbol_count: 100_000,
            seed: 0x5EED,
            history_window: None,
            pilot: PilotConfig::default(),
            detection: Detection::Th,
            law: AfterpulseLaw::Event,
            rearm: true,
            sub_runs: 8,
            warmup_symbols: None,
        }
    }

    pub fn mode(&self) -> ReceiverMode {
        self.receiver.mode()
    }

    pub fn gates_per_symbol(&self) -> usize {
        self.receiver.gates_per_symbol()
    }

    pub fn window(&self) -> usize {
        self.history_window
            .unwrap_or_else(|| history_window(&self.traps, &self.spad, HISTORY_GUARD, MAX_HISTORY_WINDOW))
    }

    /// Gates simulated in one chain per symbol: `N` for a single SPAD, one
    /// per pixel for an array.
    pub(crate) fn chain_gates_per_symbol(&self) -> usize {
        match self.mode() {
            ReceiverMode::SingleSpad => self.gates_per_symbol(),
            ReceiverMode::SpadArray => 1,
        }
    }

    pub fn warmup(&self) -> usize {
        self.warmup_symbols.unwrap_or_else(|| {
            let per_chain = self.chain_gates_per_symbol();
            self.window().div_ceil(per_chain).max(1)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.symbol_count == 0 {
            return Err(Error::param("symbol_count", "must be >= 1"));
        }
        if self.sub_runs == 0 {
            return Err(Error::param("sub_runs", "must be >= 1"));
        }
        if self.history_window == Some(0) {
            return Err(Error::param("history_window", "must be >= 1"));
        }
        if let Some(h) = self.history_window {
            let guard = crate::model::afterpulse_prob(h, &self.traps, &self.spad)?;
            if guard >= HISTORY_GUARD {
                log::warn!("history window {h} truncates afterpulse probability {guard:.3e}");
            }
        }
        Ok(())
    }
}
