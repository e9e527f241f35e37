//! Configuration, parameter sweeps, figure recipes and the command line.

pub mod cli;
pub mod config;
pub mod figures;
pub mod scenario;
pub mod svg;
pub mod sweep;
pub mod table;

pub use config::{load_config, parse_config, LoadedConfig, Output, SweepSpec};
pub use figures::{figure_ids, pmf_comparison, recipe, reproduce_figure, Overrides, Recipe, SymbolPmf};
pub use scenario::{Scenario, SimSettings, SweepParameter, DEFAULT_SEED};
pub use sweep::{run_sweep, ResultRow, SER_HEADER};
pub use table::Table;
