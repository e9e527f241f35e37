//! Recovering avalanche probabilities from a simulated pilot sequence.

use spadlink::harness::Scenario;
use spadlink::model::{avalanche_probs, ReceiverMode};
use spadlink::sim::run_pilot;

fn main() -> spadlink::Result<()> {
    for mode in [ReceiverMode::SingleSpad, ReceiverMode::SpadArray] {
        let s = Scenario { mode, first_order_ap: 0.05, ..Scenario::default() };
        let mut config = s.sim_config()?;
        config.pilot.retransmissions = 4000;
        let truth = avalanche_probs(&config.pam, &config.spad);
        let est = run_pilot(&config)?;
        println!("{} receiver, {} pilots per symbol", mode.label(), est.retransmissions);
        for (m, (t, e)) in truth.iter().zip(&est.avalanche).enumerate() {
            println!("  symbol {m}: true p {t:.4}, estimated {e:.4}, trigger {:.4}", est.trigger[m]);
        }
    }
    Ok(())
}
