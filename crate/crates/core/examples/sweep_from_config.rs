//! Loads a TOML scenario with a sweep section and prints the result table.
//!
//! Usage: cargo run --example sweep_from_config -- [CONFIG]

use std::path::PathBuf;

use spadlink::harness::sweep::ser_table;
use spadlink::harness::{load_config, run_sweep};

fn main() -> spadlink::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/array_gates.toml")
    });
    let loaded = load_config(&path)?;
    let spec = loaded.sweep.expect("config has no [sweep] section");
    let rows = run_sweep(&spec);
    for r in &rows {
        let mc = r.mc_th.as_ref().map(|m| format!("{:.3e}", m.average)).unwrap_or_default();
        println!(
            "{} = {:>6}: analytical {:.3e}  simulated {mc}  {}",
            spec.parameter.key(),
            r.value,
            r.analytical.unwrap_or(f64::NAN),
            r.status
        );
    }
    ser_table(&rows, &spec.base, &[]).write(std::io::stdout())?;
    Ok(())
}
