//! Symbol decisions, analytical error rates and pilot-based estimation.

pub mod estimate;
pub mod ser;
pub mod threshold;

pub use estimate::{
    estimate_avalanche_general, estimate_history_enhanced, estimate_trigger, HistorySolution,
    InversionForm, NewtonSettings, PilotEstimate,
};
pub use ser::{ser_analytical, wilson_interval, Detection, SerMetadata, SerMode, SerResult};
pub use threshold::{build_thresholds, decide, ml_threshold, MlDetector, ThresholdSet};
