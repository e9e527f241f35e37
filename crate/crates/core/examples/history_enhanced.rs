//! History-enhanced pilot estimation for an array, against the general
//! scheme, on noise-free and simulated pilots.

use spadlink::detection::estimate::{cyclic_tail, cyclic_trigger};
use spadlink::detection::{estimate_avalanche_general, estimate_history_enhanced, InversionForm, NewtonSettings};
use spadlink::harness::Scenario;
use spadlink::model::{afterpulse_orders, afterpulse_total, avalanche_probs, ReceiverMode};
use spadlink::sim::{run_pilot, PilotScheme};

fn main() -> spadlink::Result<()> {
    let s = Scenario { mode: ReceiverMode::SpadArray, first_order_ap: 0.11, ..Scenario::default() };
    let mut config = s.sim_config()?;
    let p = avalanche_probs(&config.pam, &config.spad);
    let c = afterpulse_total(&config.traps, &config.spad)?;
    let low = afterpulse_orders(&config.traps, &config.spad, p.len() - 1)?;

    // Noise-free trigger probabilities of the cyclic pilot.
    let trig = cyclic_trigger(&p, &low, cyclic_tail(c, &low, InversionForm::Corrected));
    let n = s.gates as f64;
    let counts: Vec<f64> = trig.iter().map(|t| t * n).collect();
    let general = estimate_avalanche_general(&counts, s.gates, c, ReceiverMode::SpadArray, InversionForm::Corrected)?;
    let sol = estimate_history_enhanced(&trig, &low, c, InversionForm::Corrected, NewtonSettings::default())?;
    println!("noise-free pilot, {} Newton iterations", sol.iterations);
    for m in 0..p.len() {
        println!("  symbol {m}: true {:.5}, general {:.5}, history-enhanced {:.5}", p[m], general[m], sol.avalanche[m]);
    }

    config.pilot.scheme = PilotScheme::HistoryEnhanced;
    config.pilot.retransmissions = 4000;
    let est = run_pilot(&config)?;
    println!("simulated pilot, {} transmissions", est.retransmissions);
    for m in 0..p.len() {
        println!("  symbol {m}: true {:.5}, estimated {:.5}", p[m], est.avalanche[m]);
    }
    if let Some(d) = est.diagnostic {
        println!("  fallback: {d}");
    }
    Ok(())
}
