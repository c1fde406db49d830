//! Batch driver: resolves a run configuration, executes a study and writes CSV/VTK artifacts.

pub mod config;
pub mod output;
pub mod run;
pub mod vtk;

use std::path::PathBuf;

use hfv_core::experiments::ExperimentError;
use hfv_core::mesh::MeshError;
use hfv_core::schemes::SchemeError;
use thiserror::Error;

pub use config::{Command, Overrides, RunConfig};
pub use run::run;
pub use vtk::export_vtk;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("cannot read mesh {path}: {source}")]
    MeshFile { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solver(SchemeError),
    #[error("{0}")]
    Analysis(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("export failed: {0}")]
    Export(String),
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Solver(other),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Mesh(m) => CliError::Mesh(m),
            ExperimentError::Scheme(s) => s.into(),
            ExperimentError::Analysis(m) => CliError::Analysis(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Mesh(_) | CliError::MeshFile { .. } => 3,
            CliError::Solver(_) | CliError::Analysis(_) => 4,
            CliError::Io { .. } | CliError::Export(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "mesh",
            4 => "solver",
            _ => "io",
        }
    }

    /// Single line for scripts: `error kind=<kind> code=<n> message="<escaped>"`.
    pub fn report_line(&self) -> String {
        format!("error kind={} code={} message={:?}", self.kind(), self.exit_code(), self.to_string())
    }
}
