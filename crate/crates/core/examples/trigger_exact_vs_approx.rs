//! Exact trigger probability of the last gate in a constant sequence,
//! against the first-order approximation and the asymptotic limit.

use spadlink::model::*;

fn main() -> spadlink::Result<()> {
    let spad = SpadParams::reference();
    for ap in [0.05, 0.11] {
        let traps = normalize_traps(&TrapModel::reference_shape(), &spad, ap)?;
        let c = afterpulse_total(&traps, &spad)?;
        println!("p_ap(1) = {ap}, C = {c:.5}");
        println!("{:>4} {:>6} {:>12} {:>12} {:>12}", "n", "p", "exact", "approx", "limit");
        for p in [0.1, 0.3, 0.8] {
            let limit = triggers_single(&[p], c)?[0];
            for n in [1, 2, 4, 8, 12] {
                let seq = vec![p; n];
                let exact = trigger_exact(&seq, &traps, &spad)?;
                let approx = trigger_approx(&seq, &traps, &spad)?.probability;
                println!("{n:>4} {p:>6} {exact:>12.6} {approx:>12.6} {limit:>12.6}");
            }
        }
    }
    Ok(())
}
