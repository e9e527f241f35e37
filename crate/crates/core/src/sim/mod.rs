//! Event-level Monte Carlo of gated SPAD receivers with afterpulsing.

pub mod config;
pub mod engine;
pub mod kernel;
pub mod mc;
pub mod pilot;
pub mod rng;
pub mod stats;
pub mod trace;

pub use config::{PilotConfig, PilotScheme, SimConfig, HISTORY_GUARD, MAX_HISTORY_WINDOW};
pub use engine::{
    balanced_stream, data_stream, measure_trigger_rate, random_stream, simulate_counts,
    simulate_gates, TriggerRates,
};
pub use kernel::{AfterpulseKernel, AfterpulseLaw, Cause};
pub use mc::{is_reliable, mc_ser, mc_ser_both, McSer, MIN_RELIABLE_ERRORS};
pub use pilot::run_pilot;
pub use trace::{GateRecord, GateTrace};
