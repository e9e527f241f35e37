//! Per-gate simulation records.

use std::io::Write;

use super::kernel::Cause;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateRecord {
    /// Position of the gate in the run. For an array, gates of one symbol
    /// are ordered by pixel.
    pub gate_index: u64,
    pub symbol_index: u64,
    pub symbol_value: usize,
    pub cause: Option<Cause>,
}

impl GateRecord {
    pub fn fired(&self) -> bool {
        self.cause.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateTrace {
    pub gates_per_symbol: usize,
    pub records: Vec<GateRecord>,
    pub counts: Vec<u32>,
}

impl GateTrace {
    /// Fired-gate count of each symbol.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn fired_gates(&self) -> usize {
        self.records.iter().filter(|r| r.fired()).count()
    }

    /// Writes one CSV row per gate:
    /// `gate_index,symbol_index,symbol_value,fired,cause`, where `fired` is
    /// 0 or 1 and `cause` is `primary`, `afterpulse` or empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(format!("writing gate trace: {e}"));
        w.write_record(["gate_index", "symbol_index", "symbol_value", "fired", "cause"])
            .map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.gate_index.to_string(),
                r.symbol_index.to_string(),
                r.symbol_value.to_string(),
                u8::from(r.fired()).to_string(),
                r.cause.map(Cause::label).unwrap_or("").to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(format!("writing gate trace: {e}")))
    }
}
