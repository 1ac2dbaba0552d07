//! Configuration, multi-seed runs and model verification behind the
//! `approach` binary.

pub mod config;
pub mod experiment;
pub mod verify;

pub use config::{ConfigError, EnvConfig, ExperimentConfig, Granularity};
pub use experiment::{run_experiment, Built, SeedOutcome};
pub use verify::{verify, Check};

/// Configuration printed by `show-config` when no file is given.
pub const DEFAULT_CONFIG: &str = r#"[env]
kind = "climate"

[target]
kind = "box"
lower = [20.0, 40.0]
upper = [24.0, 60.0]
"#;

pub fn default_config() -> ExperimentConfig {
    config::parse(DEFAULT_CONFIG, std::path::Path::new("defaults.config"))
        .expect("built-in defaults parse")
}
