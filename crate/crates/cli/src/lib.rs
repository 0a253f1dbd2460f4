//! Front end for the `encircle` simulator: scenario files, presets,
//! parameter sweeps and table reproduction.

pub mod config;
pub mod error;
pub mod mesh;
pub mod presets;
pub mod scenario;
pub mod sweep;
pub mod table;

pub use config::{ConfigSource, Emit, InitialState, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use scenario::{run_scenario, simulate, Summary};
pub use sweep::{run_sweep, SweepSpec};
