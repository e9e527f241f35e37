//! Configuration, sweeps, figure recipes and the command line.

use std::path::Path;

use spadlink::detection::SerMode;
use spadlink::harness::cli::{cli_entry, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use spadlink::harness::figures::{PMF_HEADER, RecipeKind};
use spadlink::harness::*;
use spadlink::model::ReceiverMode;

const SER_GOLDEN: &str = "series,sweep_parameter,sweep_value,receiver,order,gates,signal_rate_per_ns,\
background_rate_per_ns,first_order_ap,dead_time_ns,ser_analytical,ser_mc_th,ser_mc_th_lo,ser_mc_th_hi,\
errors_mc_th,ser_mc_ml,ser_mc_ml_lo,ser_mc_ml_hi,errors_mc_ml,mc_reliable,seed,symbols,status";

const PMF_GOLDEN: &str =
    "receiver,first_order_ap,signal_rate_per_ns,symbol,count,pmf_analytical,pmf_mc,tv_distance,samples";

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["spadlink".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    cli_entry(argv)
}

fn header_of(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

#[test]
fn csv_headers_are_pinned() {
    assert_eq!(SER_HEADER.join(","), SER_GOLDEN);
    assert_eq!(PMF_HEADER.join(","), PMF_GOLDEN);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["ser"], dir.path()), EXIT_OK);
    assert_eq!(header_of(&dir.path().join("ser.csv")), SER_GOLDEN);
    assert_eq!(run(&["pmf", "--gates", "16", "--symbols", "400"], dir.path()), EXIT_OK);
    assert_eq!(header_of(&dir.path().join("pmf.csv")), PMF_GOLDEN);
}

#[test]
fn csv_echoes_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["ser", "--lambda-b", "0.2", "--seed", "9"], dir.path()), EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("ser.csv")).unwrap();
    assert!(text.contains("# background_rate_per_ns=0.2\n"));
    assert!(text.contains("# seed=9\n"));
    assert!(text.contains("# tau_cyc_ns=40\n"));
    let row = text.lines().last().unwrap();
    let ser = row.split(',').nth(10).unwrap();
    assert!(ser.contains('e'), "{ser}");
}

#[test]
fn mc_output_is_byte_identical_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["mc", "--symbols", "2e4", "--seed", "42", "--gates", "64"];
    assert_eq!(run(&args, a.path()), EXIT_OK);
    assert_eq!(run(&args, b.path()), EXIT_OK);
    let x = std::fs::read(a.path().join("mc.csv")).unwrap();
    let y = std::fs::read(b.path().join("mc.csv")).unwrap();
    assert_eq!(x, y);
    let t = Table::read_file(&a.path().join("mc.csv")).unwrap();
    let row = &t.rows[0];
    for col in ["ser_mc_th_lo", "ser_mc_th_hi", "seed", "symbols"] {
        assert!(!row[t.column(col).unwrap()].is_empty(), "{col}");
    }
    assert_eq!(row[t.column("seed").unwrap()], "42");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli_entry(["spadlink"]), EXIT_USAGE);
    assert_eq!(run(&["ser", "--mode", "both"], dir.path()), EXIT_USAGE);
    assert_eq!(run(&["figure", "12c"], dir.path()), EXIT_CONFIG);
    assert_eq!(run(&["ser", "--p-ap1", "0.3"], dir.path()), EXIT_CONFIG);
    assert_eq!(run(&["ser", "--lambda-s", "0"], dir.path()), EXIT_NUMERICAL);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[detector]\ngate_on_ns = 2\ndead_time_ns = 38\ncycle_ns = 45\n").unwrap();
    assert_eq!(run(&["validate-config", "--config", bad.to_str().unwrap()], dir.path()), EXIT_CONFIG);
    std::fs::write(&bad, "[receiver]\npixels = 4\n").unwrap();
    assert_eq!(run(&["validate-config", "--config", bad.to_str().unwrap()], dir.path()), EXIT_CONFIG);
    let missing = dir.path().join("absent.toml");
    assert_eq!(run(&["ser", "--config", missing.to_str().unwrap()], dir.path()), EXIT_CONFIG);
}

#[test]
fn empty_config_gives_reference_defaults() {
    let c = parse_config("").unwrap();
    let s = c.scenario;
    assert_eq!(s.spad.pde(), 0.10);
    assert_eq!(s.spad.dark_rate(), 4.4e-5);
    assert_eq!(s.gates, 256);
    assert_eq!(s.trap_shape.components().len(), 6);
    assert_eq!(s.order, 4);
    assert_eq!(s.background_rate, 0.1);
}

#[test]
fn config_errors_name_the_problem() {
    let e = parse_config("[simulation]\nseeds = 3\n").unwrap_err().to_string();
    assert!(e.contains("seeds"), "{e}");
    let e = parse_config("[detector]\ncycle_ns = 41\ndead_time_ns = 38\n").unwrap_err().to_string();
    assert!(e.contains("tau_cyc == tau_g + tau_d"), "{e}");
    let e = parse_config("[sweep]\nparameter = \"pde\"\nvalues = [1.0]\n").unwrap_err().to_string();
    assert!(e.contains("pde"), "{e}");
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "[receiver]\nmode = \"array\"\n\n[sweep]\nparameter = \"gates\"\nvalues = [64, 128, 256]\n",
    )
    .unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()], dir.path()), EXIT_OK);
    let t = Table::read_file(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(t.rows.len(), 3);
    let ser: Vec<f64> = t.rows.iter().map(|r| r[t.column("ser_analytical").unwrap()].parse().unwrap()).collect();
    assert!(ser[0] > ser[1] && ser[1] > ser[2]);
    assert!(t.rows.iter().all(|r| r[t.column("receiver").unwrap()] == "array"));
}

#[test]
fn sweep_rows_match_direct_calls() {
    let loaded = parse_config(
        "[sweep]\nparameter = \"background_rate_per_ns\"\nlogspace = { start = 0.01, stop = 1.0, points = 3 }\n",
    )
    .unwrap();
    let spec = loaded.sweep.unwrap();
    let rows = run_sweep(&spec);
    for (row, &v) in rows.iter().zip(&spec.grid) {
        let direct = spec
            .base
            .with(SweepParameter::BackgroundRatePerNs, v)
            .unwrap()
            .analytical_ser(SerMode::AdjacentPair)
            .unwrap()
            .average;
        assert_eq!(row.analytical, Some(direct));
    }
}

/// Parameters each figure must use.
struct Expected {
    id: &'static str,
    kind: RecipeKind,
    mode: ReceiverMode,
    gates: Option<usize>,
    ap: Option<f64>,
    background: f64,
    x: &'static str,
    series: Option<(&'static str, &'static [f64])>,
}

const RECIPES: [Expected; 14] = {
    use ReceiverMode::{SingleSpad as S, SpadArray as A};
    use RecipeKind::{Pmf as P, Ser as E};
    const APS: &[f64] = &[0.0, 0.05, 0.11];
    const LS: &[f64] = &[2.0, 4.0, 8.0, 12.0];
    const LS3: &[f64] = &[4.0, 8.0, 12.0];
    const M: &[f64] = &[2.0, 4.0, 8.0];
    [
        Expected { id: "5a", kind: P, mode: S, gates: Some(100), ap: Some(0.05), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "5b", kind: P, mode: A, gates: Some(100), ap: Some(0.05), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "5c", kind: P, mode: S, gates: Some(100), ap: Some(0.11), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "5d", kind: P, mode: A, gates: Some(100), ap: Some(0.11), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "6a", kind: E, mode: S, gates: Some(256), ap: Some(0.11), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "6b", kind: E, mode: A, gates: Some(256), ap: Some(0.11), background: 0.1, x: "signal_rate_per_ns", series: None },
        Expected { id: "7a", kind: E, mode: S, gates: Some(256), ap: None, background: 0.1, x: "signal_rate_per_ns", series: Some(("first_order_ap", APS)) },
        Expected { id: "7b", kind: E, mode: S, gates: Some(256), ap: Some(0.05), background: 0.1, x: "background_rate_per_ns", series: Some(("signal_rate_per_ns", LS)) },
        Expected { id: "8a", kind: E, mode: S, gates: None, ap: Some(0.05), background: 0.1, x: "gates", series: Some(("signal_rate_per_ns", LS3)) },
        Expected { id: "8b", kind: E, mode: S, gates: None, ap: Some(0.05), background: 0.1, x: "gates", series: Some(("order", M)) },
        Expected { id: "9a", kind: E, mode: A, gates: Some(256), ap: None, background: 0.1, x: "signal_rate_per_ns", series: Some(("first_order_ap", APS)) },
        Expected { id: "9b", kind: E, mode: A, gates: Some(256), ap: Some(0.05), background: 0.1, x: "background_rate_per_ns", series: Some(("signal_rate_per_ns", LS)) },
        Expected { id: "10a", kind: E, mode: A, gates: None, ap: Some(0.05), background: 0.1, x: "gates", series: Some(("signal_rate_per_ns", LS3)) },
        Expected { id: "10b", kind: E, mode: A, gates: None, ap: Some(0.05), background: 0.1, x: "gates", series: Some(("order", M)) },
    ]
};

#[test]
fn recipes_use_the_stated_parameters() {
    assert_eq!(figure_ids().len(), RECIPES.len());
    for e in &RECIPES {
        let r = recipe(e.id).unwrap();
        assert_eq!(r.kind, e.kind, "{}", e.id);
        assert_eq!(r.base.mode, e.mode, "{}", e.id);
        if let Some(n) = e.gates {
            assert_eq!(r.base.gates, n, "{}", e.id);
        }
        if let Some(ap) = e.ap {
            assert_eq!(r.base.first_order_ap, ap, "{}", e.id);
        }
        if r.x.key() != "background_rate_per_ns" {
            assert_eq!(r.base.background_rate, e.background, "{}", e.id);
        }
        assert_eq!(r.x.key(), e.x, "{}", e.id);
        let series = r.series.as_ref().map(|(p, v)| (p.key(), v.as_slice()));
        assert_eq!(series, e.series, "{}", e.id);
        assert_eq!(r.base.order, 4, "{}", e.id);
        assert_eq!(r.base.spad.cycle(), 40.0, "{}", e.id);
    }
    assert_eq!(recipe("5a").unwrap().grid, vec![1.0, 2.0, 4.0, 8.0]);
    let g = recipe("7a").unwrap().grid;
    assert_eq!((g[0], *g.last().unwrap(), g[1] - g[0], g.len()), (0.5, 16.0, 0.5, 32));
    let g = recipe("7b").unwrap().grid;
    assert!((g[0] - 1e-5).abs() < 1e-18 && (g.last().unwrap() - 10.0).abs() < 1e-12);
}

fn series_curve(rows: &[ResultRow], label: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.series == label)
        .map(|r| (r.value, r.analytical.unwrap()))
        .collect()
}

#[test]
fn fig7a_curves_are_u_shaped() {
    let out = reproduce_figure(&recipe("7a").unwrap(), false, None).unwrap();
    for label in ["first_order_ap=0", "first_order_ap=0.05", "first_order_ap=0.11"] {
        let c = series_curve(&out.rows, label);
        let (imin, _) = c
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .unwrap();
        assert!(imin > 0 && imin < c.len() - 1, "{label}: minimum at the edge");
        assert!(c[0].1 > 10.0 * c[imin].1 && c[c.len() - 1].1 > c[imin].1);
    }
}

#[test]
fn fig7b_degrades_at_strong_background() {
    let out = reproduce_figure(&recipe("7b").unwrap(), false, None).unwrap();
    for label in ["signal_rate_per_ns=4", "signal_rate_per_ns=8", "signal_rate_per_ns=12"] {
        let c = series_curve(&out.rows, label);
        let beyond: Vec<f64> = c.iter().filter(|(x, _)| *x >= 1.0).map(|(_, s)| *s).collect();
        assert!(beyond.windows(2).all(|w| w[1] > w[0]), "{label}");
        assert!(*beyond.last().unwrap() > 5e-2, "{label}: {beyond:?}");
    }
}

#[test]
fn fig8b_has_one_curve_per_order() {
    let out = reproduce_figure(&recipe("8b").unwrap(), false, None).unwrap();
    let mut last_at_600 = 0.0;
    for m in [2, 4, 8] {
        let c = series_curve(&out.rows, &format!("order={m}"));
        assert_eq!(c.len(), 20);
        assert!(c.windows(2).all(|w| w[1].1 <= w[0].1), "order {m} not decreasing in N");
        let at_600 = c.iter().find(|(x, _)| *x == 600.0).unwrap().1;
        assert!(at_600 > last_at_600);
        last_at_600 = at_600;
    }
}

#[test]
fn figure_overrides_touch_only_their_key() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["figure", "7b", "--p-ap1", "0.11"], dir.path()), EXIT_OK);
    let t = Table::read_file(&dir.path().join("fig7b.csv")).unwrap();
    let get = |k: &str| t.comments.iter().find(|(a, _)| a == k).map(|(_, v)| v.clone());
    assert_eq!(get("first_order_ap").as_deref(), Some("0.11"));
    assert_eq!(get("gates").as_deref(), Some("256"));
    assert_eq!(get("override.first_order_ap").as_deref(), Some("0.11"));
    assert_eq!(run(&["figure", "7a", "--lambda-s", "3"], dir.path()), EXIT_CONFIG);
}

#[test]
fn figure_svg_is_rendered_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["figure", "9a", "--format", "csv+svg"], dir.path()), EXIT_OK);
    let svg = std::fs::read_to_string(dir.path().join("fig9a.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn pmf_figure_compares_distributions() {
    let mut r = recipe("5b").unwrap();
    r.base.sim.symbols = 2000;
    let out = reproduce_figure(&r, false, None).unwrap();
    // 4 signal rates x 4 symbols x 101 counts.
    assert_eq!(out.table.rows.len(), 4 * 4 * 101);
    let t = &out.table;
    let col = t.column("pmf_analytical").unwrap();
    let sum: f64 = t.rows[..101].iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-5);
}

#[test]
fn metadata_uses_config_spelling() {
    let loaded = parse_config(
        "[simulation]\nlaw = \"first_order\"\npilot_scheme = \"history_enhanced\"\n[receiver]\nmode = \"array\"\n",
    )
    .unwrap();
    let echo = loaded.scenario.describe();
    let get = |k: &str| echo.iter().find(|(a, _)| a == k).unwrap().1.clone();
    assert_eq!(get("law"), "first_order");
    assert_eq!(get("pilot_scheme"), "history_enhanced");
    assert_eq!(get("inversion"), "corrected");
    assert_eq!(get("receiver"), "array");
}
