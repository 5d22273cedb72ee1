//! Config-driven scenario runner: figure tables, plot scripts and run manifests.

use std::path::PathBuf;

pub mod app;
pub mod config;
pub mod output;
pub mod plots;
pub mod runs;

pub use config::{Config, Resolved, Scenario};
pub use output::{Cell, Manifest, RunOutput, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Numerical(#[from] spinlev_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad configuration or input data, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use spinlev_core::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(E::Io { .. }) | CliError::Io { .. } => 1,
            CliError::Numerical(E::Parse { .. } | E::NonuniformSampling { .. }) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
