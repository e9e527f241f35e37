//! Analytical photon-count statistics of gated SPAD receivers.

pub mod params;
pub mod pmf;
pub mod traps;
pub mod trigger;

pub use params::{PamScheme, ReceiverConfig, ReceiverMode, SpadParams};
pub use pmf::{count_pmf, CountDistribution};
pub use traps::{
    afterpulse_orders, afterpulse_prob, afterpulse_total, history_window, normalize_traps,
    TrapComponent, TrapModel,
};
pub use trigger::{
    asymptotic_trigger_array, asymptotic_trigger_single, avalanche_prob, avalanche_probs,
    trigger_approx, trigger_bounds, trigger_exact, triggers_array, triggers_single,
};

/// Asymptotic trigger probability of every symbol for the given receiver
/// mode.
pub fn symbol_triggers(
    mode: ReceiverMode,
    pam: &PamScheme,
    spad: &SpadParams,
    traps: &TrapModel,
) -> crate::Result<Vec<f64>> {
    let p = avalanche_probs(pam, spad);
    let c = afterpulse_total(traps, spad)?;
    match mode {
        ReceiverMode::SingleSpad => triggers_single(&p, c),
        ReceiverMode::SpadArray => triggers_array(&p, c),
    }
}
