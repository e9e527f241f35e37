//! TOML run configuration with a strict schema.
//!
//! Key names carry their units: times in ns, rates in counts per ns.
//! Every section and key is optional; missing values take the reference
//! detector defaults. Unknown keys are rejected.
//!
//! ```toml
//! [detector]
//! pde = 0.1
//! gate_on_ns = 2.0
//! dead_time_ns = 38.0
//! cycle_ns = 40.0                  # optional, checked against the sum
//! dark_rate_per_ns = 4.4e-5
//!
//! [traps]
//! first_order_ap = 0.05
//! lifetimes_ns = [0.1, 1.0, 6.6, 26.5, 168.9, 1078.7]
//! densities = [4.95e10, 4.70e9, 6.72e8, 1.54e8, 2.08e7, 2.53e6]
//! reference_dead_time_ns = 38.0    # optional
//!
//! [modulation]
//! order = 4
//! levels = [0.0, 0.25, 0.56, 1.0] # optional
//! signal_rate_per_ns = 8.0
//! background_rate_per_ns = 0.1
//!
//! [receiver]
//! mode = "single"                  # or "array"
//! gates = 256                      # gates per symbol, or pixels
//! symbol_duration_ns = 10240.0     # single SPAD alternative to gates
//!
//! [simulation]
//! symbols = 100000
//! seed = 20240917
//! rearm = true
//! law = "event"                    # or "first_order"
//! sub_runs = 8
//! history_window = 2000            # optional
//! warmup_symbols = 10              # optional
//! pilot_retransmissions = 1000
//! pilot_scheme = "general"         # or "history_enhanced"
//! inversion = "corrected"          # or "literal"
//! detection = "th"                 # or "ml"
//!
//! [sweep]
//! parameter = "signal_rate_per_ns"
//! values = [2.0, 4.0, 8.0]         # or range / logspace
//! range = { start = 0.5, stop = 16.0, step = 0.5 }
//! logspace = { start = 1e-5, stop = 10.0, points = 25 }
//! outputs = ["analytical", "mc_th", "mc_ml"]
//! ser_mode = "adjacent_pair"       # or "full_region"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::{Scenario, SweepParameter};
use crate::detection::{Detection, InversionForm, SerMode};
use crate::error::{Error, Result};
use crate::model::{ReceiverConfig, SpadParams, TrapModel};
use crate::sim::{AfterpulseLaw, PilotScheme};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub traps: TrapSection,
    #[serde(default)]
    pub modulation: ModulationSection,
    #[serde(default)]
    pub receiver: ReceiverSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub pde: Option<f64>,
    pub gate_on_ns: Option<f64>,
    pub dead_time_ns: Option<f64>,
    pub cycle_ns: Option<f64>,
    pub dark_rate_per_ns: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub first_order_ap: Option<f64>,
    pub lifetimes_ns: Option<Vec<f64>>,
    pub densities: Option<Vec<f64>>,
    pub reference_dead_time_ns: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub order: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub signal_rate_per_ns: Option<f64>,
    pub background_rate_per_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKey {
    Single,
    Array,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    pub mode: Option<ModeKey>,
    pub gates: Option<usize>,
    pub symbol_duration_ns: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub symbols: Option<usize>,
    pub seed: Option<u64>,
    pub rearm: Option<bool>,
    pub law: Option<AfterpulseLaw>,
    pub sub_runs: Option<usize>,
    pub history_window: Option<usize>,
    pub warmup_symbols: Option<usize>,
    pub pilot_retransmissions: Option<usize>,
    pub pilot_scheme: Option<PilotScheme>,
    pub inversion: Option<InversionForm>,
    pub detection: Option<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogspaceSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub range: Option<RangeSpec>,
    pub logspace: Option<LogspaceSpec>,
    pub outputs: Option<Vec<Output>>,
    pub ser_mode: Option<SerMode>,
}

/// Quantities a sweep evaluates at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Analytical,
    McTh,
    McMl,
}

impl Output {
    pub fn is_mc(self) -> bool {
        !matches!(self, Output::Analytical)
    }
}

/// A validated one-parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub base: Scenario,
    pub outputs: Vec<Output>,
    pub ser_mode: SerMode,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        grid: Vec<f64>,
        base: Scenario,
        outputs: Vec<Output>,
        ser_mode: SerMode,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invariant("sweep grid non-empty", "no grid values"));
        }
        if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invariant(
                "sweep grid strictly increasing",
                format!("{} then {}", w[0], w[1]),
            ));
        }
        if outputs.is_empty() {
            return Err(Error::Config("sweep.outputs: at least one output is required".into()));
        }
        base.validate()?;
        Ok(Self {
            parameter,
            grid,
            base,
            outputs,
            ser_mode,
        })
    }
}

/// Inclusive arithmetic grid; the stop value is kept when it lies on the
/// grid up to rounding.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop >= start) {
        return Err(Error::Config(format!(
            "sweep.range: need start <= stop and step > 0, got {start}..{stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// `points` values evenly spaced in log10 between `start` and `stop`.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && points >= 2) {
        return Err(Error::Config(format!(
            "sweep.logspace: need 0 < start < stop and points >= 2, got {start}..{stop} with {points}"
        )));
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
        .collect())
}

/// Parsed configuration: the base scenario and an optional sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub scenario: Scenario,
    pub sweep: Option<SweepSpec>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.resolve()
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<LoadedConfig> {
        let mut s = Scenario::default();
        let d = &self.detector;
        let pde = d.pde.unwrap_or(s.spad.pde());
        let gate_on = d.gate_on_ns.unwrap_or(s.spad.gate_on());
        let dark = d.dark_rate_per_ns.unwrap_or(s.spad.dark_rate());
        let dead = match (d.dead_time_ns, d.cycle_ns) {
            (Some(dead), _) => dead,
            (None, Some(cycle)) => cycle - gate_on,
            (None, None) => s.spad.dead_time(),
        };
        let cycle = d.cycle_ns.unwrap_or(gate_on + dead);
        s.spad = SpadParams::with_cycle(pde, gate_on, dead, cycle, dark)?;

        let t = &self.traps;
        if let Some(ap) = t.first_order_ap {
            s.first_order_ap = ap;
        }
        match (&t.lifetimes_ns, &t.densities) {
            (Some(l), Some(a)) => {
                if l.len() != a.len() {
                    return Err(Error::Config(format!(
                        "traps: {} lifetimes_ns but {} densities",
                        l.len(),
                        a.len()
                    )));
                }
                let pairs: Vec<(f64, f64)> = a.iter().copied().zip(l.iter().copied()).collect();
                s.trap_shape = TrapModel::from_pairs(&pairs, 1.0)?;
            }
            (None, None) => {}
            _ => {
                return Err(Error::Config(
                    "traps: lifetimes_ns and densities must be given together".into(),
                ))
            }
        }
        s.ap_reference_dead_time = t.reference_dead_time_ns;

        let m = &self.modulation;
        if let Some(order) = m.order {
            s.order = order;
        }
        if let Some(levels) = &m.levels {
            if m.order.is_none() {
                s.order = levels.len();
            }
            s.levels = Some(levels.clone());
        }
        if let Some(v) = m.signal_rate_per_ns {
            s.signal_rate = v;
        }
        if let Some(v) = m.background_rate_per_ns {
            s.background_rate = v;
        }

        let r = &self.receiver;
        if let Some(mode) = r.mode {
            s.mode = mode.into();
        }
        match (r.gates, r.symbol_duration_ns) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "receiver: give either gates or symbol_duration_ns, not both".into(),
                ))
            }
            (Some(g), None) => s.gates = g,
            (None, Some(ts)) => {
                if s.mode != crate::model::ReceiverMode::SingleSpad {
                    return Err(Error::Config(
                        "receiver.symbol_duration_ns applies to the single SPAD only".into(),
                    ));
                }
                s.gates = ReceiverConfig::single_spad(ts, &s.spad)?.gates_per_symbol();
            }
            (None, None) => {}
        }

        let sim = &self.simulation;
        let out = &mut s.sim;
        if let Some(v) = sim.symbols {
            out.symbols = v;
        }
        if let Some(v) = sim.seed {
            out.seed = v;
        }
        if let Some(v) = sim.rearm {
            out.rearm = v;
        }
        if let Some(v) = sim.law {
            out.law = v;
        }
        if let Some(v) = sim.sub_runs {
            out.sub_runs = v;
        }
        out.history_window = sim.history_window.or(out.history_window);
        out.warmup_symbols = sim.warmup_symbols.or(out.warmup_symbols);
        if let Some(v) = sim.pilot_retransmissions {
            out.pilot.retransmissions = v;
        }
        if let Some(v) = sim.pilot_scheme {
            out.pilot.scheme = v;
        }
        if let Some(v) = sim.inversion {
            out.pilot.form = v;
        }
        if let Some(v) = sim.detection {
            out.detection = v;
        }

        s.validate()?;
        s.sim_config()?;

        let sweep = match &self.sweep {
            None => None,
            Some(sw) => Some(sw.resolve(&s)?),
        };
        Ok(LoadedConfig { scenario: s, sweep })
    }
}

impl SweepSection {
    fn resolve(&self, base: &Scenario) -> Result<SweepSpec> {
        let parameter = SweepParameter::parse(&self.parameter)?;
        let grid = match (&self.values, &self.range, &self.logspace) {
            (Some(v), None, None) => v.clone(),
            (None, Some(r), None) => linear_grid(r.start, r.stop, r.step)?,
            (None, None, Some(l)) => log_grid(l.start, l.stop, l.points)?,
            _ => {
                return Err(Error::Config(
                    "sweep: give exactly one of values, range or logspace".into(),
                ))
            }
        };
        let outputs = self.outputs.clone().unwrap_or_else(|| vec![Output::Analytical]);
        for &v in &grid {
            base.with(parameter, v)?;
        }
        SweepSpec::new(
            parameter,
            grid,
            base.clone(),
            outputs,
            self.ser_mode.unwrap_or(SerMode::AdjacentPair),
        )
    }
}

impl From<ModeKey> for crate::model::ReceiverMode {
    fn from(m: ModeKey) -> Self {
        match m {
            ModeKey::Single => crate::model::ReceiverMode::SingleSpad,
            ModeKey::Array => crate::model::ReceiverMode::SpadArray,
        }
    }
}
