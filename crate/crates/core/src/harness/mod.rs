//! Experiment configuration, presets, CSV emission and run manifests.

mod config;
mod csv;
mod experiment;
mod manifest;

use std::path::PathBuf;

pub use config::{parse_pairs, read_config_file, resolve_config, ControlMode, ExperimentConfig, KEYS};
pub use csv::{fmt_num, read_csv, CsvTable, CASES_HEADER, IMPULSES_HEADER};
pub use experiment::{
    build_control, ds_experiment, load_run, simulate, sweep_experiment, write_ds, write_simulation, write_sweep,
    CaseRow, DsOutcome, Simulation, SweepOutcome, StoredRun,
};
pub use manifest::{RunManifest, MANIFEST_FILE};

use crate::error::Error;

/// Environment variable overriding the default output directory.
pub const OUT_ENV: &str = "INVSTEER_OUT";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl HarnessError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => 2,
            _ => 1,
        }
    }
}

/// `$INVSTEER_OUT`, or `invsteer-out` in the working directory.
pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("invsteer-out"))
}
