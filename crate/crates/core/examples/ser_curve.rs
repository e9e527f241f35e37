//! Analytical SER against peak signal rate for three afterpulsing levels.

use spadlink::detection::SerMode;
use spadlink::harness::{Scenario, SweepParameter};

fn main() -> spadlink::Result<()> {
    let rates: Vec<f64> = (1..=16).map(f64::from).collect();
    print!("{:>8}", "signal");
    for ap in [0.0, 0.05, 0.11] {
        print!(" {:>12}", format!("p_ap={ap}"));
    }
    println!();
    for &ls in &rates {
        print!("{ls:>8}");
        for ap in [0.0, 0.05, 0.11] {
            let s = Scenario::default()
                .with(SweepParameter::FirstOrderAp, ap)?
                .with(SweepParameter::SignalRatePerNs, ls)?;
            print!(" {:>12.4e}", s.analytical_ser(SerMode::AdjacentPair)?.average);
        }
        println!();
    }
    Ok(())
}
