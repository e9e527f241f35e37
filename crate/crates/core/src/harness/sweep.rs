//! Grid evaluation of analytical and Monte Carlo SER.

use rayon::prelude::*;

use super::config::{Output, SweepSpec};
use super::scenario::{Scenario, SweepParameter};
use super::table::{num, sci, Table};
use crate::detection::{SerMode, SerResult};
use crate::error::{Error, Result};
use crate::sim::{is_reliable, mc_ser_both};

pub const SER_HEADER: [&str; 23] = [
    "series",
    "sweep_parameter",
    "sweep_value",
    "receiver",
    "order",
    "gates",
    "signal_rate_per_ns",
    "background_rate_per_ns",
    "first_order_ap",
    "dead_time_ns",
    "ser_analytical",
    "ser_mc_th",
    "ser_mc_th_lo",
    "ser_mc_th_hi",
    "errors_mc_th",
    "ser_mc_ml",
    "ser_mc_ml_lo",
    "ser_mc_ml_hi",
    "errors_mc_ml",
    "mc_reliable",
    "seed",
    "symbols",
    "status",
];

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub series: String,
    pub parameter: Option<SweepParameter>,
    pub value: f64,
    /// The evaluated point, `None` when it could not be built.
    pub scenario: Option<Scenario>,
    pub first_order_ap: Option<f64>,
    pub analytical: Option<f64>,
    pub mc_th: Option<SerResult>,
    pub mc_ml: Option<SerResult>,
    /// `"ok"` or the error that stopped this point.
    pub status: String,
    pub error: Option<Error>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn record(&self) -> Vec<String> {
        let s = self.scenario.as_ref();
        let mc = |r: &Option<SerResult>| -> [String; 4] {
            match r {
                Some(r) => {
                    let (lo, hi) = r.interval.unwrap_or((f64::NAN, f64::NAN));
                    [
                        sci(Some(r.average)),
                        sci(Some(lo)),
                        sci(Some(hi)),
                        r.errors.map(|e| e.to_string()).unwrap_or_default(),
                    ]
                }
                None => Default::default(),
            }
        };
        let has_mc = self.mc_th.is_some() || self.mc_ml.is_some();
        let reliable = if has_mc {
            let ok = [&self.mc_th, &self.mc_ml].into_iter().flatten().all(is_reliable);
            ok.to_string()
        } else {
            String::new()
        };
        let [th, th_lo, th_hi, th_e] = mc(&self.mc_th);
        let [ml, ml_lo, ml_hi, ml_e] = mc(&self.mc_ml);
        vec![
            self.series.clone(),
            self.parameter.map(|p| p.key().to_string()).unwrap_or_default(),
            num(Some(self.value)),
            s.map(|s| s.mode.label().to_string()).unwrap_or_default(),
            s.map(|s| s.order.to_string()).unwrap_or_default(),
            s.map(|s| s.gates.to_string()).unwrap_or_default(),
            num(s.map(|s| s.signal_rate)),
            num(s.map(|s| s.background_rate)),
            num(self.first_order_ap),
            num(s.map(|s| s.spad.dead_time())),
            sci(self.analytical),
            th,
            th_lo,
            th_hi,
            th_e,
            ml,
            ml_lo,
            ml_hi,
            ml_e,
            reliable,
            if has_mc { s.map(|s| s.sim.seed.to_string()).unwrap_or_default() } else { String::new() },
            if has_mc {
                self.mc_th
                    .as_ref()
                    .or(self.mc_ml.as_ref())
                    .and_then(|r| r.trials)
                    .map(|t| t.to_string())
                    .unwrap_or_default()
            } else {
                String::new()
            },
            self.status.clone(),
        ]
    }
}

/// A point to evaluate: its series label, x value and parameters.
pub struct Point {
    pub series: String,
    pub parameter: Option<SweepParameter>,
    pub value: f64,
    pub scenario: Result<Scenario>,
}

/// Picks the Monte Carlo symbol count for a point.
pub type SymbolPolicy = dyn Fn(&Scenario, Option<f64>) -> usize + Sync;

/// Evaluates one point. Failures are recorded in the row.
pub fn evaluate(
    point: &Point,
    outputs: &[Output],
    ser_mode: SerMode,
    symbols: Option<&SymbolPolicy>,
) -> ResultRow {
    let mut row = ResultRow {
        series: point.series.clone(),
        parameter: point.parameter,
        value: point.value,
        scenario: None,
        first_order_ap: None,
        analytical: None,
        mc_th: None,
        mc_ml: None,
        status: "ok".into(),
        error: None,
    };
    let mut scenario = match &point.scenario {
        Ok(s) => s.clone(),
        Err(e) => {
            row.status = format!("error: {e}");
            row.error = Some(e.clone());
            return row;
        }
    };
    let result = (|| -> Result<()> {
        row.first_order_ap = Some(scenario.effective_first_order_ap()?);
        let analytical = scenario.analytical_ser(ser_mode).map(|r| r.average);
        if outputs.contains(&Output::Analytical) {
            row.analytical = Some(analytical.clone()?);
        }
        if outputs.iter().any(|o| o.is_mc()) {
            if let Some(policy) = symbols {
                scenario.sim.symbols = policy(&scenario, analytical.ok());
            }
            let mc = mc_ser_both(&scenario.sim_config()?)?;
            if outputs.contains(&Output::McTh) {
                row.mc_th = Some(mc.th);
            }
            if outputs.contains(&Output::McMl) {
                row.mc_ml = Some(mc.ml);
            }
        }
        Ok(())
    })();
    row.scenario = Some(scenario);
    if let Err(e) = result {
        row.status = format!("error: {e}");
        row.error = Some(e);
    }
    row
}

/// Evaluates points in parallel; rows come back in input order.
pub fn evaluate_all(
    points: &[Point],
    outputs: &[Output],
    ser_mode: SerMode,
    symbols: Option<&SymbolPolicy>,
) -> Vec<ResultRow> {
    points
        .par_iter()
        .map(|p| evaluate(p, outputs, ser_mode, symbols))
        .collect()
}

pub fn sweep_points(spec: &SweepSpec, series: &str) -> Vec<Point> {
    spec.grid
        .iter()
        .map(|&v| Point {
            series: series.to_string(),
            parameter: Some(spec.parameter),
            value: v,
            scenario: spec.base.with(spec.parameter, v),
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Vec<ResultRow> {
    evaluate_all(&sweep_points(spec, "sweep"), &spec.outputs, spec.ser_mode, None)
}

/// SER table with the base scenario echoed in the comment block.
pub fn ser_table(rows: &[ResultRow], base: &Scenario, extra: &[(String, String)]) -> Table {
    let mut t = Table::new(&SER_HEADER);
    for (k, v) in base.describe().into_iter().chain(extra.iter().cloned()) {
        t.comment(k, v);
    }
    for r in rows {
        t.push(r.record());
    }
    t
}
