//! Simulated SER with confidence intervals under both afterpulse laws,
//! next to the analytical value.

use spadlink::detection::SerMode;
use spadlink::harness::Scenario;
use spadlink::model::ReceiverMode;
use spadlink::sim::{mc_ser_both, AfterpulseLaw};

fn main() -> spadlink::Result<()> {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let mut s = Scenario { mode, first_order_ap: 0.11, signal_rate: 4.0, ..Scenario::default() };
        s.sim.symbols = 200_000;
        let analytical = s.analytical_ser(SerMode::AdjacentPair)?.average;
        println!("{} receiver: analytical SER {analytical:.3e}", mode.label());
        for law in [AfterpulseLaw::Event, AfterpulseLaw::FirstOrder] {
            s.sim.law = law;
            let mc = mc_ser_both(&s.sim_config()?)?;
            for (name, r) in [("TH", &mc.th), ("ML", &mc.ml)] {
                let (lo, hi) = r.interval.unwrap_or((f64::NAN, f64::NAN));
                println!(
                    "  {law:?} law, {name}: {:.3e} [{lo:.3e}, {hi:.3e}] from {} errors",
                    r.average,
                    r.errors.unwrap_or(0)
                );
            }
        }
    }
    Ok(())
}
