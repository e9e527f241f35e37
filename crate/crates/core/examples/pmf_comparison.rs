//! Photon-count distribution per symbol: binomial model against simulation.

use spadlink::harness::{pmf_comparison, Scenario};
use spadlink::model::ReceiverMode;

fn main() -> spadlink::Result<()> {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let mut s = Scenario { mode, gates: 100, signal_rate: 4.0, ..Scenario::default() };
        s.sim.symbols = 40_000;
        println!("{} receiver, N = {}, signal {} /ns", mode.label(), s.gates, s.signal_rate);
        for sym in pmf_comparison(&s)? {
            let mean = |pmf: &[f64]| pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>();
            println!(
                "  symbol {}: mean count {:.2} model, {:.2} simulated; total variation {:.3} over {} symbols",
                sym.symbol,
                mean(&sym.analytical),
                mean(&sym.empirical),
                sym.total_variation,
                sym.samples
            );
        }
    }
    Ok(())
}
