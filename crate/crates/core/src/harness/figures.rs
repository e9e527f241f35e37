//! Built-in recipes for the count-distribution and SER figures.

use super::config::{linear_grid, log_grid, Output};
use super::scenario::{Scenario, SweepParameter};
use super::sweep::{evaluate_all, ser_table, Point, ResultRow, SymbolPolicy};
use super::table::{num, sci, Table};
use crate::detection::SerMode;
use crate::error::{Error, Result};
use crate::model::{count_pmf, ReceiverMode};
use crate::sim::{data_stream, simulate_counts, stats};

/// Valid figure identifiers.
pub const FIGURE_IDS: [&str; 14] = [
    "5a", "5b", "5c", "5d", "6a", "6b", "7a", "7b", "8a", "8b", "9a", "9b", "10a", "10b",
];

pub fn figure_ids() -> Vec<&'static str> {
    FIGURE_IDS.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipeKind {
    /// Per-symbol count distributions, analytical against simulated.
    Pmf,
    /// SER curves.
    Ser,
}

/// How the gate count of a single SPAD grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeadTimeMode {
    /// Fixed detection cycle; the symbol lengthens with N.
    Dynamic,
    /// Fixed symbol duration (ns); the dead time shrinks as N grows while
    /// the trap density stays at its value for the base dead time.
    Constant(f64),
}

impl DeadTimeMode {
    fn label(self) -> &'static str {
        match self {
            DeadTimeMode::Dynamic => "dynamic",
            DeadTimeMode::Constant(_) => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub id: &'static str,
    pub title: &'static str,
    pub kind: RecipeKind,
    /// Fixed parameters.
    pub base: Scenario,
    /// Horizontal axis.
    pub x: SweepParameter,
    pub grid: Vec<f64>,
    /// Parameter distinguishing the curves, with its values.
    pub series: Option<(SweepParameter, Vec<f64>)>,
    pub dead_time_modes: Vec<DeadTimeMode>,
    /// Monte Carlo columns are produced without being asked.
    pub mc_by_default: bool,
    pub log_x: bool,
}

const CONSTANT_SYMBOL_NS: f64 = 7500.0;

fn scenario(mode: ReceiverMode, gates: usize, ap: f64, signal: f64, background: f64) -> Scenario {
    let mut s = Scenario {
        mode,
        gates,
        first_order_ap: ap,
        signal_rate: signal,
        background_rate: background,
        ..Scenario::default()
    };
    s.sim.symbols = 100_000;
    s
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    linear_grid(start, stop, step).expect("recipe grid")
}

pub fn recipe(id: &str) -> Result<Recipe> {
    use ReceiverMode::{SingleSpad as Single, SpadArray as Array};
    use SweepParameter::*;
    let pmf = |id, title, mode, ap| Recipe {
        id,
        title,
        kind: RecipeKind::Pmf,
        base: scenario(mode, 100, ap, 8.0, 0.1),
        x: SignalRatePerNs,
        grid: vec![1.0, 2.0, 4.0, 8.0],
        series: None,
        dead_time_modes: vec![DeadTimeMode::Dynamic],
        mc_by_default: true,
        log_x: false,
    };
    let ser = |id, title, base: Scenario, x, grid, series| Recipe {
        id,
        title,
        kind: RecipeKind::Ser,
        base,
        x,
        grid,
        series,
        dead_time_modes: vec![DeadTimeMode::Dynamic],
        mc_by_default: false,
        log_x: x == BackgroundRatePerNs,
    };
    let aps = vec![0.0, 0.05, 0.11];
    let lambda_s = grid(0.5, 16.0, 0.5);
    let lambda_b = log_grid(1e-5, 10.0, 25).expect("recipe grid");
    let r = match id {
        "5a" => pmf("5a", "count PMF, single SPAD, p_ap1 = 5%", Single, 0.05),
        "5b" => pmf("5b", "count PMF, SPAD array, p_ap1 = 5%", Array, 0.05),
        "5c" => pmf("5c", "count PMF, single SPAD, p_ap1 = 11%", Single, 0.11),
        "5d" => pmf("5d", "count PMF, SPAD array, p_ap1 = 11%", Array, 0.11),
        "6a" | "6b" => {
            let mode = if id == "6a" { Single } else { Array };
            let mut base = scenario(mode, 256, 0.11, 8.0, 0.1);
            base.sim.symbols = 1_000_000;
            Recipe {
                mc_by_default: true,
                ..ser(
                    if id == "6a" { "6a" } else { "6b" },
                    if id == "6a" {
                        "SER vs signal rate, single SPAD, analytical and simulated"
                    } else {
                        "SER vs signal rate, SPAD array, analytical and simulated"
                    },
                    base,
                    SignalRatePerNs,
                    grid(2.0, 16.0, 2.0),
                    None,
                )
            }
        }
        "7a" => ser(
            "7a",
            "SER vs signal rate under different afterpulsing, single SPAD",
            scenario(Single, 256, 0.05, 8.0, 0.1),
            SignalRatePerNs,
            lambda_s,
            Some((FirstOrderAp, aps)),
        ),
        "9a" => ser(
            "9a",
            "SER vs signal rate under different afterpulsing, SPAD array",
            scenario(Array, 256, 0.05, 8.0, 0.1),
            SignalRatePerNs,
            lambda_s,
            Some((FirstOrderAp, aps)),
        ),
        "7b" => ser(
            "7b",
            "SER vs background rate, single SPAD",
            scenario(Single, 256, 0.05, 8.0, 0.1),
            BackgroundRatePerNs,
            lambda_b,
            Some((SignalRatePerNs, vec![2.0, 4.0, 8.0, 12.0])),
        ),
        "9b" => ser(
            "9b",
            "SER vs background rate, SPAD array",
            scenario(Array, 256, 0.05, 8.0, 0.1),
            BackgroundRatePerNs,
            lambda_b,
            Some((SignalRatePerNs, vec![2.0, 4.0, 8.0, 12.0])),
        ),
        "8a" => Recipe {
            dead_time_modes: vec![DeadTimeMode::Dynamic, DeadTimeMode::Constant(CONSTANT_SYMBOL_NS)],
            ..ser(
                "8a",
                "SER vs gates per symbol, dynamic and constant symbol duration, single SPAD",
                scenario(Single, 256, 0.05, 8.0, 0.1),
                Gates,
                grid(50.0, 750.0, 50.0),
                Some((SignalRatePerNs, vec![4.0, 8.0, 12.0])),
            )
        },
        "10a" => ser(
            "10a",
            "SER vs array scale, SPAD array",
            scenario(Array, 256, 0.05, 8.0, 0.1),
            Gates,
            grid(50.0, 750.0, 50.0),
            Some((SignalRatePerNs, vec![4.0, 8.0, 12.0])),
        ),
        "8b" => ser(
            "8b",
            "SER vs gates per symbol for 2-, 4- and 8-PAM, single SPAD",
            scenario(Single, 256, 0.05, 8.0, 0.1),
            Gates,
            grid(50.0, 1000.0, 50.0),
            Some((Order, vec![2.0, 4.0, 8.0])),
        ),
        "10b" => ser(
            "10b",
            "SER vs array scale for 2-, 4- and 8-PAM, SPAD array",
            scenario(Array, 256, 0.05, 8.0, 0.1),
            Gates,
            grid(50.0, 1000.0, 50.0),
            Some((Order, vec![2.0, 4.0, 8.0])),
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown figure `{other}`; valid ids: {}",
                figure_ids().join(", ")
            )))
        }
    };
    Ok(r)
}

/// Single-valued replacements applied on top of a recipe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<ReceiverMode>,
    pub signal_rate: Option<f64>,
    pub background_rate: Option<f64>,
    pub gates: Option<usize>,
    pub order: Option<usize>,
    pub first_order_ap: Option<f64>,
    pub symbols: Option<usize>,
    pub seed: Option<u64>,
    pub detection: Option<crate::detection::Detection>,
}

impl Overrides {
    fn value(&self, p: SweepParameter) -> Option<f64> {
        match p {
            SweepParameter::SignalRatePerNs => self.signal_rate,
            SweepParameter::BackgroundRatePerNs => self.background_rate,
            SweepParameter::Gates => self.gates.map(|g| g as f64),
            SweepParameter::FirstOrderAp => self.first_order_ap,
            SweepParameter::Order => self.order.map(|m| m as f64),
        }
    }

    /// `key=value` pairs of the overridden settings.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Some(m) = self.mode {
            out.push(("override.receiver".to_string(), m.label().to_string()));
        }
        for p in [
            SweepParameter::SignalRatePerNs,
            SweepParameter::BackgroundRatePerNs,
            SweepParameter::Gates,
            SweepParameter::FirstOrderAp,
            SweepParameter::Order,
        ] {
            if let Some(v) = self.value(p) {
                out.push((format!("override.{}", p.key()), v.to_string()));
            }
        }
        if let Some(v) = self.symbols {
            out.push(("override.symbols".into(), v.to_string()));
        }
        if let Some(v) = self.seed {
            out.push(("override.seed".into(), v.to_string()));
        }
        if let Some(v) = self.detection {
            out.push(("override.detection".into(), v.label().to_string()));
        }
        out
    }

    /// Applies every override to `s`.
    pub fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(m) = self.mode {
            s.mode = m;
        }
        for p in [
            SweepParameter::SignalRatePerNs,
            SweepParameter::BackgroundRatePerNs,
            SweepParameter::Gates,
            SweepParameter::FirstOrderAp,
            SweepParameter::Order,
        ] {
            if let Some(v) = self.value(p) {
                *s = s.with(p, v)?;
            }
        }
        if let Some(v) = self.symbols {
            s.sim.symbols = v;
        }
        if let Some(v) = self.seed {
            s.sim.seed = v;
        }
        if let Some(v) = self.detection {
            s.sim.detection = v;
        }
        Ok(())
    }
}

impl Recipe {
    /// Recipe with overrides applied. Overriding the series parameter keeps
    /// one curve; the horizontal-axis parameter cannot be overridden.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        if o.value(self.x).is_some() {
            return Err(Error::Config(format!(
                "figure {}: `{}` is the swept parameter and cannot be overridden",
                self.id,
                self.x.key()
            )));
        }
        if let Some((p, values)) = &mut self.series {
            if let Some(v) = o.value(*p) {
                *values = vec![v];
            }
        }
        let series = self.series.as_ref().map(|(p, _)| *p);
        let mut base = self.base.clone();
        let mut kept = o.clone();
        if let Some(p) = series {
            match p {
                SweepParameter::SignalRatePerNs => kept.signal_rate = None,
                SweepParameter::BackgroundRatePerNs => kept.background_rate = None,
                SweepParameter::Gates => kept.gates = None,
                SweepParameter::FirstOrderAp => kept.first_order_ap = None,
                SweepParameter::Order => kept.order = None,
            }
        }
        kept.apply(&mut base)?;
        self.base = base;
        Ok(self)
    }

    fn point_scenario(&self, mode: DeadTimeMode, series: Option<(SweepParameter, f64)>, x: f64) -> Result<Scenario> {
        let mut s = self.base.clone();
        if let Some((p, v)) = series {
            s = s.with(p, v)?;
        }
        s = s.with(self.x, x)?;
        if let DeadTimeMode::Constant(duration) = mode {
            let cycle = duration / s.gates as f64;
            let dead = cycle - s.spad.gate_on();
            s.ap_reference_dead_time = Some(self.base.spad.dead_time());
            s.spad = s.spad.with_dead_time(dead)?;
            s.validate()?;
        }
        Ok(s)
    }

    /// Every evaluated point in output order.
    pub fn points(&self) -> Vec<Point> {
        let series: Vec<Option<(SweepParameter, f64)>> = match &self.series {
            Some((p, values)) => values.iter().map(|&v| Some((*p, v))).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for &mode in &self.dead_time_modes {
            for s in &series {
                let mut label = Vec::new();
                if self.dead_time_modes.len() > 1 {
                    label.push(mode.label().to_string());
                }
                if let Some((p, v)) = s {
                    label.push(format!("{}={v}", p.key()));
                }
                let label = if label.is_empty() { self.id.to_string() } else { label.join(";") };
                for &x in &self.grid {
                    out.push(Point {
                        series: label.clone(),
                        parameter: Some(self.x),
                        value: x,
                        scenario: self.point_scenario(mode, *s, x),
                    });
                }
            }
        }
        out
    }
}

/// Simulated symbols needed for about `target` expected errors at `ser`,
/// bounded to `[floor, cap]`.
pub fn symbols_for_errors(ser: Option<f64>, target: f64, floor: usize, cap: usize) -> usize {
    match ser {
        Some(p) if p > 0.0 && p.is_finite() => ((target / p).ceil() as usize).clamp(floor, cap),
        _ => floor,
    }
}

/// Largest automatic Monte Carlo size per SER point.
pub const MAX_AUTO_SYMBOLS: usize = 4_000_000;

/// Analytical count distribution of every symbol against the histogram of
/// simulated counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPmf {
    pub symbol: usize,
    pub analytical: Vec<f64>,
    pub empirical: Vec<f64>,
    pub samples: usize,
    pub total_variation: f64,
}

pub fn pmf_comparison(s: &Scenario) -> Result<Vec<SymbolPmf>> {
    let triggers = s.triggers()?;
    let config = s.sim_config()?;
    let stream = data_stream(&config);
    let counts = simulate_counts(&config, &stream)?;
    triggers
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let analytical = count_pmf(p, s.gates)?.probabilities().to_vec();
            let mine: Vec<u32> = counts
                .iter()
                .zip(&stream)
                .filter(|(_, &x)| x == m)
                .map(|(&c, _)| c)
                .collect();
            let empirical = stats::empirical_pmf(&mine, s.gates);
            Ok(SymbolPmf {
                symbol: m,
                total_variation: stats::total_variation(&analytical, &empirical),
                analytical,
                empirical,
                samples: mine.len(),
            })
        })
        .collect()
}

pub const PMF_HEADER: [&str; 9] = [
    "receiver",
    "first_order_ap",
    "signal_rate_per_ns",
    "symbol",
    "count",
    "pmf_analytical",
    "pmf_mc",
    "tv_distance",
    "samples",
];

pub fn pmf_rows(s: &Scenario, table: &mut Table) -> Result<Vec<SymbolPmf>> {
    let result = pmf_comparison(s)?;
    for r in &result {
        for k in 0..=s.gates {
            table.push(vec![
                s.mode.label().to_string(),
                num(Some(s.first_order_ap)),
                num(Some(s.signal_rate)),
                r.symbol.to_string(),
                k.to_string(),
                sci(Some(r.analytical[k])),
                sci(Some(r.empirical[k])),
                sci(Some(r.total_variation)),
                r.samples.to_string(),
            ]);
        }
    }
    Ok(result)
}

/// Output of a figure run.
pub struct FigureOutput {
    pub table: Table,
    /// SER rows, empty for count-distribution figures.
    pub rows: Vec<ResultRow>,
}

/// Runs a recipe. `mc` adds simulated SER columns; `symbols` fixes the
/// simulation size, otherwise it is chosen per point for about 100
/// expected errors.
pub fn reproduce_figure(recipe: &Recipe, mc: bool, symbols: Option<usize>) -> Result<FigureOutput> {
    let mut extra = vec![
        ("figure".to_string(), recipe.id.to_string()),
        ("title".to_string(), recipe.title.to_string()),
        ("x".to_string(), recipe.x.key().to_string()),
    ];
    if let Some((p, v)) = &recipe.series {
        let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        extra.push(("series".to_string(), format!("{}={}", p.key(), v.join(";"))));
    }
    for m in &recipe.dead_time_modes {
        if let DeadTimeMode::Constant(d) = m {
            extra.push(("constant_symbol_duration_ns".to_string(), d.to_string()));
        }
    }
    match recipe.kind {
        RecipeKind::Pmf => {
            let mut table = Table::new(&PMF_HEADER);
            for (k, v) in recipe.base.describe().into_iter().chain(extra) {
                table.comment(k, v);
            }
            for p in recipe.points() {
                let mut s = p.scenario?;
                if let Some(n) = symbols {
                    s.sim.symbols = n;
                }
                pmf_rows(&s, &mut table)?;
            }
            Ok(FigureOutput {
                table,
                rows: Vec::new(),
            })
        }
        RecipeKind::Ser => {
            let mc = mc || recipe.mc_by_default;
            let outputs = if mc {
                vec![Output::Analytical, Output::McTh, Output::McMl]
            } else {
                vec![Output::Analytical]
            };
            let floor = recipe.base.sim.symbols;
            let auto = move |_: &Scenario, ser: Option<f64>| symbols_for_errors(ser, 100.0, floor, MAX_AUTO_SYMBOLS);
            let fixed = move |_: &Scenario, _: Option<f64>| symbols.unwrap_or(floor);
            let policy: &SymbolPolicy = if symbols.is_some() { &fixed } else { &auto };
            let rows = evaluate_all(&recipe.points(), &outputs, SerMode::AdjacentPair, Some(policy));
            let table = ser_table(&rows, &recipe.base, &extra);
            Ok(FigureOutput { table, rows })
        }
    }
}
