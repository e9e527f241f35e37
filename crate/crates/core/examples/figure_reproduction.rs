//! Runs a built-in figure recipe and writes its CSV and SVG.
//!
//! Usage: cargo run --example figure_reproduction -- [ID] [OUT_DIR]

use std::path::PathBuf;

use spadlink::harness::svg::{render_file, PlotSpec};
use spadlink::harness::figures::RecipeKind;
use spadlink::harness::{figure_ids, recipe, reproduce_figure};

fn main() -> spadlink::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "7a".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "results".into()));
    println!("available: {}", figure_ids().join(" "));
    let r = recipe(&id)?;
    let fig = reproduce_figure(&r, false, None)?;
    let path = out.join(format!("fig{}.csv", r.id));
    fig.table.write_file(&path)?;
    let spec = match r.kind {
        RecipeKind::Pmf => PlotSpec::pmf(r.title),
        RecipeKind::Ser => PlotSpec::ser(r.title, "sweep_value", r.log_x),
    };
    let svg = render_file(&path, &spec)?;
    println!("{}: {} rows -> {}, {}", r.title, fig.table.rows.len(), path.display(), svg.display());
    Ok(())
}
