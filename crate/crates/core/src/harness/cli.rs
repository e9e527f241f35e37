//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration or invariant
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::config::{load_config, linear_grid, Output, SweepSpec};
use super::figures::{pmf_rows, recipe, reproduce_figure, Overrides, RecipeKind, PMF_HEADER};
use super::scenario::{Scenario, SweepParameter};
use super::svg::{render_file, PlotSpec};
use super::sweep::{evaluate_all, ser_table, sweep_points, Point};
use super::table::{num, sci, Table};
use crate::detection::{Detection, SerMode};
use crate::error::{Error, Result};
use crate::model::{avalanche_probs, ReceiverMode};
use crate::sim::run_pilot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spadlink", version, about = "Time-gated SPAD link simulator")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Single,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectionArg {
    Th,
    Ml,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed of every random stream.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Simulated symbols, e.g. 100000 or 1e6.
    #[arg(long, global = true, value_name = "COUNT", value_parser = parse_count)]
    symbols: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    detection: Option<DetectionArg>,
    /// Peak signal photon rate, counts/ns.
    #[arg(long = "lambda-s", global = true, value_name = "C_PER_NS")]
    lambda_s: Option<f64>,
    /// Background photon rate, counts/ns.
    #[arg(long = "lambda-b", global = true, value_name = "C_PER_NS")]
    lambda_b: Option<f64>,
    /// Gates per symbol (single SPAD) or pixels (array).
    #[arg(long, global = true)]
    gates: Option<usize>,
    /// PAM order.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// First-order afterpulse probability.
    #[arg(long = "p-ap1", global = true)]
    p_ap1: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytical and simulated count distribution of every symbol.
    Pmf,
    /// Analytical SER at one operating point.
    Ser {
        #[arg(long, value_enum, default_value = "adjacent-pair")]
        ser_mode: SerModeArg,
    },
    /// SER over a one-parameter grid.
    Sweep {
        /// Swept parameter, overriding the config's sweep section.
        #[arg(long)]
        parameter: Option<String>,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Grid `start:stop:step`.
        #[arg(long)]
        range: Option<String>,
        /// Add simulated SER columns.
        #[arg(long)]
        mc: bool,
    },
    /// Reproduce a built-in figure.
    Figure {
        /// Figure id.
        id: String,
        /// Add simulated SER columns to analytical-only figures.
        #[arg(long)]
        mc: bool,
    },
    /// Monte Carlo SER with both detectors at one operating point.
    Mc,
    /// Pilot-based estimation of the trigger probabilities.
    Estimate,
    /// Parse and validate a configuration, printing the resolved values.
    ValidateConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SerModeArg {
    AdjacentPair,
    FullRegion,
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return if n == 0 { Err("must be at least 1".into()) } else { Ok(n) };
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v <= usize::MAX as f64 => Ok(v as usize),
        _ => Err(format!("`{s}` is not a positive whole number")),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let Some(command) = cli.command else {
        use clap::CommandFactory;
        let _ = Cli::command().print_help();
        eprintln!("\nerror: a subcommand is required");
        return EXIT_USAGE;
    };
    match run(&cli.global, command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode.map(|m| match m {
                ModeArg::Single => ReceiverMode::SingleSpad,
                ModeArg::Array => ReceiverMode::SpadArray,
            }),
            signal_rate: self.lambda_s,
            background_rate: self.lambda_b,
            gates: self.gates,
            order: self.order,
            first_order_ap: self.p_ap1,
            symbols: self.symbols,
            seed: self.seed,
            detection: self.detection.map(|d| match d {
                DetectionArg::Th => Detection::Th,
                DetectionArg::Ml => Detection::Ml,
            }),
        }
    }

    /// Config file (or defaults) with command-line overrides applied.
    fn load(&self) -> Result<(Scenario, Option<SweepSpec>)> {
        let (mut scenario, sweep) = match &self.config {
            Some(path) => {
                let c = load_config(path)?;
                (c.scenario, c.sweep)
            }
            None => (Scenario::default(), None),
        };
        self.overrides().apply(&mut scenario)?;
        Ok((scenario, sweep))
    }

    fn svg(&self) -> bool {
        self.format == Format::CsvSvg
    }
}

fn write(table: &Table, path: &Path) -> Result<()> {
    table.write_file(path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_plot(csv: &Path, spec: &PlotSpec) -> Result<()> {
    let svg = render_file(csv, spec)?;
    println!("wrote {}", svg.display());
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("--range `{s}`: expected start:stop:step")))?;
    match parts.as_slice() {
        &[a, b, c] => linear_grid(a, b, c),
        _ => Err(Error::Config(format!("--range `{s}`: expected start:stop:step"))),
    }
}

fn run(g: &GlobalArgs, command: Command) -> Result<()> {
    if let Command::ValidateConfig = command {
        let (scenario, sweep) = g.load()?;
        for (k, v) in scenario.describe() {
            println!("{k}={v}");
        }
        if let Some(s) = sweep {
            let grid: Vec<String> = s.grid.iter().map(|v| v.to_string()).collect();
            println!("sweep.parameter={}", s.parameter.key());
            println!("sweep.values={}", grid.join(";"));
        }
        println!("config ok");
        return Ok(());
    }
    if let Command::Figure { id, mc } = &command {
        let r = recipe(id)?.with_overrides(&g.overrides())?;
        println!("seed={}", r.base.sim.seed);
        let mut out = reproduce_figure(&r, *mc, g.symbols)?;
        out.table.comments.extend(g.overrides().describe());
        let path = g.out.join(format!("fig{}.csv", r.id));
        write(&out.table, &path)?;
        if g.svg() {
            let spec = match r.kind {
                RecipeKind::Pmf => PlotSpec::pmf(r.title),
                RecipeKind::Ser => PlotSpec::ser(r.title, "sweep_value", r.log_x),
            };
            write_plot(&path, &spec)?;
        }
        return Ok(());
    }

    let (scenario, sweep) = g.load()?;
    println!("seed={}", scenario.sim.seed);
    match command {
        Command::Pmf => {
            let mut t = Table::new(&PMF_HEADER);
            for (k, v) in scenario.describe() {
                t.comment(k, v);
            }
            let result = pmf_rows(&scenario, &mut t)?;
            for r in &result {
                println!("symbol {}: total variation {:.4}", r.symbol, r.total_variation);
            }
            let path = g.out.join("pmf.csv");
            write(&t, &path)?;
            if g.svg() {
                write_plot(&path, &PlotSpec::pmf("count PMF"))?;
            }
        }
        Command::Ser { ser_mode } => {
            let mode = match ser_mode {
                SerModeArg::AdjacentPair => SerMode::AdjacentPair,
                SerModeArg::FullRegion => SerMode::FullRegion,
            };
            let point = Point {
                series: "ser".into(),
                parameter: None,
                value: scenario.signal_rate,
                scenario: Ok(scenario.clone()),
            };
            let r = scenario.analytical_ser(mode)?;
            let rows = evaluate_all(&[point], &[Output::Analytical], mode, None);
            for (m, p) in r.per_symbol.iter().enumerate() {
                println!("symbol {m}: {p:.6e}");
            }
            println!("average SER {:.6e}", r.average);
            write(&ser_table(&rows, &scenario, &[]), &g.out.join("ser.csv"))?;
        }
        Command::Mc => {
            let point = Point {
                series: "mc".into(),
                parameter: None,
                value: scenario.signal_rate,
                scenario: Ok(scenario.clone()),
            };
            let outputs = [Output::Analytical, Output::McTh, Output::McMl];
            let rows = evaluate_all(&[point], &outputs, SerMode::AdjacentPair, None);
            let row = &rows[0];
            if let Some(e) = &row.error {
                return Err(e.clone());
            }
            println!("analytical SER {}", sci(row.analytical));
            for r in [&row.mc_th, &row.mc_ml].into_iter().flatten() {
                println!(
                    "{} SER {:.6e} ({} errors / {} symbols)",
                    r.metadata.detection.map(|d| d.label()).unwrap_or(""),
                    r.average,
                    r.errors.unwrap_or(0),
                    r.trials.unwrap_or(0)
                );
            }
            write(&ser_table(&rows, &scenario, &[]), &g.out.join("mc.csv"))?;
        }
        Command::Estimate => {
            let config = scenario.sim_config()?;
            let est = run_pilot(&config)?;
            let truth = avalanche_probs(&config.pam, &config.spad);
            let analytical = scenario.triggers()?;
            let mut t = Table::new(&[
                "symbol",
                "mean_count",
                "trigger_estimate",
                "trigger_analytical",
                "avalanche_estimate",
                "avalanche_true",
            ]);
            for (k, v) in scenario.describe() {
                t.comment(k, v);
            }
            if let Some(d) = &est.diagnostic {
                t.comment("diagnostic", d.clone());
                eprintln!("note: {d}");
            }
            for m in 0..truth.len() {
                t.push(vec![
                    m.to_string(),
                    num(est.mean_counts.get(m).copied()),
                    sci(est.trigger.get(m).copied()),
                    sci(analytical.get(m).copied()),
                    sci(est.avalanche.get(m).copied()),
                    sci(Some(truth[m])),
                ]);
            }
            write(&t, &g.out.join("estimate.csv"))?;
        }
        Command::Sweep { parameter, values, range, mc } => {
            let parameter = match &parameter {
                Some(key) => SweepParameter::parse(key)?,
                None => sweep.as_ref().map(|s| s.parameter).ok_or_else(|| {
                    Error::Config("sweep: no [sweep] section in the config and no --parameter given".into())
                })?,
            };
            let from_file = sweep.as_ref().filter(|s| s.parameter == parameter);
            let grid = match (values, &range, from_file) {
                (Some(v), None, _) => v,
                (None, Some(r), _) => parse_range(r)?,
                (None, None, Some(s)) => s.grid.clone(),
                (Some(_), Some(_), _) => {
                    return Err(Error::Config("sweep: give either --values or --range, not both".into()))
                }
                (None, None, None) => {
                    return Err(Error::Config(format!(
                        "sweep: no grid for `{}`; give --values or --range",
                        parameter.key()
                    )))
                }
            };
            let mut outputs = sweep.as_ref().map(|s| s.outputs.clone()).unwrap_or(vec![Output::Analytical]);
            if mc {
                for o in [Output::McTh, Output::McMl] {
                    if !outputs.contains(&o) {
                        outputs.push(o);
                    }
                }
            }
            let ser_mode = sweep.as_ref().map(|s| s.ser_mode).unwrap_or(SerMode::AdjacentPair);
            let spec = SweepSpec::new(parameter, grid, scenario.clone(), outputs, ser_mode)?;
            let rows = evaluate_all(&sweep_points(&spec, "sweep"), &spec.outputs, spec.ser_mode, None);
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} points failed; see the status column", rows.len());
            }
            let extra = vec![
                ("sweep.parameter".to_string(), spec.parameter.key().to_string()),
                ("sweep.points".to_string(), spec.grid.len().to_string()),
            ];
            let path = g.out.join("sweep.csv");
            write(&ser_table(&rows, &spec.base, &extra), &path)?;
            if g.svg() {
                let log_x = spec.parameter == SweepParameter::BackgroundRatePerNs;
                write_plot(&path, &PlotSpec::ser("SER sweep", "sweep_value", log_x))?;
            }
        }
        Command::Figure { .. } | Command::ValidateConfig => unreachable!("handled above"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("250").unwrap(), 250);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("0").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_entry(["spadlink"]), EXIT_USAGE);
        assert_eq!(cli_entry(["spadlink", "frobnicate"]), EXIT_USAGE);
        assert_eq!(cli_entry(["spadlink", "--help"]), EXIT_OK);
    }
}
