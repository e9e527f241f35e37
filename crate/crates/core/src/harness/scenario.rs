//! Fully resolved link parameters, the unit every harness operation works
//! on.

use serde::{Deserialize, Serialize};

use crate::detection::{ser_analytical, SerMode, SerResult};
use crate::error::{Error, Result};
use crate::model::params::{DEFAULT_ARRAY_SCALE, DEFAULT_DARK_RATE, DEFAULT_PDE};
use crate::model::trigger::first_order_ap;
use crate::model::{
    normalize_traps, symbol_triggers, PamScheme, ReceiverConfig, ReceiverMode, SpadParams,
    TrapModel,
};
use crate::sim::{AfterpulseLaw, PilotConfig, SimConfig};
use crate::detection::Detection;

/// Monte Carlo settings carried alongside the link parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub symbols: usize,
    pub seed: u64,
    pub rearm: bool,
    pub law: AfterpulseLaw,
    pub sub_runs: usize,
    pub history_window: Option<usize>,
    pub warmup_symbols: Option<usize>,
    pub pilot: PilotConfig,
    pub detection: Detection,
}

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            symbols: 100_000,
            seed: DEFAULT_SEED,
            rearm: true,
            law: AfterpulseLaw::Event,
            sub_runs: 8,
            history_window: None,
            warmup_symbols: None,
            pilot: PilotConfig::default(),
            detection: Detection::Th,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub spad: SpadParams,
    /// Trap shape; its scale is replaced by normalization.
    pub trap_shape: TrapModel,
    /// Target first-order afterpulse probability.
    pub first_order_ap: f64,
    /// Dead time (ns) at which `first_order_ap` is imposed. `None` uses the
    /// detector's own dead time; a fixed value keeps the trap density
    /// constant while the dead time changes.
    pub ap_reference_dead_time: Option<f64>,
    pub order: usize,
    /// Custom constellation; `None` uses the square-root levels of `order`.
    pub levels: Option<Vec<f64>>,
    pub signal_rate: f64,
    pub background_rate: f64,
    pub mode: ReceiverMode,
    /// Gates per symbol (single SPAD) or pixels (array).
    pub gates: usize,
    pub sim: SimSettings,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            spad: SpadParams::new(DEFAULT_PDE, 2.0, 38.0, DEFAULT_DARK_RATE).expect("defaults"),
            trap_shape: TrapModel::reference_shape(),
            first_order_ap: 0.05,
            ap_reference_dead_time: None,
            order: 4,
            levels: None,
            signal_rate: 8.0,
            background_rate: 0.1,
            mode: ReceiverMode::SingleSpad,
            gates: DEFAULT_ARRAY_SCALE,
            sim: SimSettings::default(),
        }
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    SignalRatePerNs,
    BackgroundRatePerNs,
    Gates,
    FirstOrderAp,
    Order,
}

impl SweepParameter {
    pub fn key(self) -> &'static str {
        match self {
            SweepParameter::SignalRatePerNs => "signal_rate_per_ns",
            SweepParameter::BackgroundRatePerNs => "background_rate_per_ns",
            SweepParameter::Gates => "gates",
            SweepParameter::FirstOrderAp => "first_order_ap",
            SweepParameter::Order => "order",
        }
    }

    pub fn parse(key: &str) -> Result<Self> {
        [
            SweepParameter::SignalRatePerNs,
            SweepParameter::BackgroundRatePerNs,
            SweepParameter::Gates,
            SweepParameter::FirstOrderAp,
            SweepParameter::Order,
        ]
        .into_iter()
        .find(|p| p.key() == key)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown sweep parameter `{key}`; expected one of signal_rate_per_ns, background_rate_per_ns, gates, first_order_ap, order"
            ))
        })
    }
}

fn as_count(value: f64, name: &'static str) -> Result<usize> {
    if value.fract() != 0.0 || value < 1.0 {
        return Err(Error::param(name, format!("{value} is not a positive integer")));
    }
    Ok(value as usize)
}

impl Scenario {
    pub fn pam(&self) -> Result<PamScheme> {
        match &self.levels {
            Some(levels) => {
                if levels.len() != self.order {
                    return Err(Error::invariant(
                        "levels match order",
                        format!("{} levels for order {}", levels.len(), self.order),
                    ));
                }
                PamScheme::new(levels.clone(), self.signal_rate, self.background_rate)
            }
            None => PamScheme::square_root(self.order, self.signal_rate, self.background_rate),
        }
    }

    pub fn traps(&self) -> Result<TrapModel> {
        let reference = match self.ap_reference_dead_time {
            Some(dead) => self.spad.with_dead_time(dead)?,
            None => self.spad,
        };
        normalize_traps(&self.trap_shape, &reference, self.first_order_ap)
    }

    pub fn receiver(&self) -> Result<ReceiverConfig> {
        ReceiverConfig::new(self.mode, self.gates, &self.spad)
    }

    /// First-order afterpulse probability at the detector's own cycle.
    pub fn effective_first_order_ap(&self) -> Result<f64> {
        first_order_ap(&self.traps()?, &self.spad)
    }

    pub fn triggers(&self) -> Result<Vec<f64>> {
        symbol_triggers(self.mode, &self.pam()?, &self.spad, &self.traps()?)
    }

    pub fn analytical_ser(&self, ser_mode: SerMode) -> Result<SerResult> {
        let mut result = ser_analytical(&self.triggers()?, self.gates, ser_mode)?;
        result.metadata.receiver = Some(self.mode);
        result.metadata.signal_rate = Some(self.signal_rate);
        result.metadata.background_rate = Some(self.background_rate);
        result.metadata.first_order_ap = Some(self.effective_first_order_ap()?);
        Ok(result)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let mut c = SimConfig::new(self.receiver()?, self.pam()?, self.spad, self.traps()?);
        c.symbol_count = s.symbols;
        c.seed = s.seed;
        c.rearm = s.rearm;
        c.law = s.law;
        c.sub_runs = s.sub_runs;
        c.history_window = s.history_window;
        c.warmup_symbols = s.warmup_symbols;
        c.pilot = s.pilot;
        c.detection = s.detection;
        c.validate()?;
        Ok(c)
    }

    /// Checks every invariant by building the analytical objects.
    pub fn validate(&self) -> Result<()> {
        self.pam()?;
        self.receiver()?;
        self.traps()?;
        Ok(())
    }

    /// Copy with one parameter replaced.
    pub fn with(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match parameter {
            SweepParameter::SignalRatePerNs => s.signal_rate = value,
            SweepParameter::BackgroundRatePerNs => s.background_rate = value,
            SweepParameter::Gates => s.gates = as_count(value, "gates")?,
            SweepParameter::FirstOrderAp => s.first_order_ap = value,
            SweepParameter::Order => {
                s.order = as_count(value, "order")?;
                s.levels = None;
            }
        }
        s.validate()?;
        Ok(s)
    }

    /// `key=value` pairs echoing every resolved setting.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("receiver".to_string(), self.mode.label().to_string()),
            ("gates".into(), self.gates.to_string()),
            ("pde".into(), self.spad.pde().to_string()),
            ("tau_g_ns".into(), self.spad.gate_on().to_string()),
            ("tau_d_ns".into(), self.spad.dead_time().to_string()),
            ("tau_cyc_ns".into(), self.spad.cycle().to_string()),
            ("dark_rate_per_ns".into(), self.spad.dark_rate().to_string()),
            ("first_order_ap".into(), self.first_order_ap.to_string()),
        ];
        if let Some(d) = self.ap_reference_dead_time {
            out.push(("ap_reference_tau_d_ns".into(), d.to_string()));
        }
        let lifetimes: Vec<String> = self
            .trap_shape
            .components()
            .iter()
            .map(|c| c.lifetime.to_string())
            .collect();
        let amplitudes: Vec<String> = self
            .trap_shape
            .components()
            .iter()
            .map(|c| c.amplitude.to_string())
            .collect();
        out.push(("trap_lifetimes_ns".into(), lifetimes.join(";")));
        out.push(("trap_densities".into(), amplitudes.join(";")));
        out.push(("order".into(), self.order.to_string()));
        let levels = self
            .pam()
            .map(|p| p.levels().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        out.push(("levels".into(), levels));
        out.push(("signal_rate_per_ns".into(), self.signal_rate.to_string()));
        out.push(("background_rate_per_ns".into(), self.background_rate.to_string()));
        let s = &self.sim;
        out.push(("seed".into(), s.seed.to_string()));
        out.push(("symbols".into(), s.symbols.to_string()));
        out.push(("rearm".into(), s.rearm.to_string()));
        out.push(("law".into(), config_name(&s.law)));
        out.push(("sub_runs".into(), s.sub_runs.to_string()));
        if let Some(h) = s.history_window {
            out.push(("history_window".into(), h.to_string()));
        }
        if let Some(w) = s.warmup_symbols {
            out.push(("warmup_symbols".into(), w.to_string()));
        }
        out.push(("pilot_retransmissions".into(), s.pilot.retransmissions.to_string()));
        out.push(("pilot_scheme".into(), config_name(&s.pilot.scheme)));
        out.push(("inversion".into(), config_name(&s.pilot.form)));
        out.push(("detection".into(), s.detection.label().to_string()));
        out
    }
}

/// Spelling of an enum value in a configuration file.
fn config_name(value: &impl Serialize) -> String {
    match toml::Value::try_from(value) {
        Ok(toml::Value::String(s)) => s,
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert!((s.effective_first_order_ap().unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn fixed_trap_density_raises_afterpulsing_at_short_dead_time() {
        let mut s = Scenario::default();
        s.ap_reference_dead_time = Some(38.0);
        s.spad = s.spad.with_dead_time(18.0).unwrap();
        assert!(s.effective_first_order_ap().unwrap() > 0.05);
    }

    #[test]
    fn sweep_parameters_round_trip() {
        for key in ["signal_rate_per_ns", "background_rate_per_ns", "gates", "first_order_ap", "order"] {
            assert_eq!(SweepParameter::parse(key).unwrap().key(), key);
        }
        assert!(SweepParameter::parse("lambda").is_err());
        assert!(Scenario::default().with(SweepParameter::Gates, 2.5).is_err());
        let s = Scenario::default().with(SweepParameter::Order, 8.0).unwrap();
        assert_eq!(s.pam().unwrap().order(), 8);
    }
}
