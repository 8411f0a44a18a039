//! Scenario configuration, experiment presets and batch runs.

pub mod config;
pub mod montecarlo;
pub mod output;
pub mod presets;
pub mod scenario;
pub mod validate;

pub use config::ScenarioConfig;
pub use montecarlo::{monte_carlo, RmseRow, RmseTable};
pub use presets::{run_experiment, Experiment, PresetRun};
pub use scenario::Scenario;
pub use validate::{validate, ValidationReport};

/// A named pass/fail outcome.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}
