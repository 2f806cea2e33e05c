//! Failure classes and their exit codes.

use std::path::{Path, PathBuf};

use delaunay_core::{DynamicsError, PeriodicError};
use serde_json::json;

pub const EXIT_CERTIFICATE_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Io { path: PathBuf, message: String },
    Solver { kind: &'static str, message: String },
}

impl Failure {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Io { .. } => EXIT_IO,
            Failure::Solver { .. } => EXIT_SOLVER,
        }
    }

    /// One-line JSON for stderr.
    pub fn diagnostic(&self) -> String {
        let value = match self {
            Failure::Validation(message) => json!({ "error": "validation", "message": message }),
            Failure::Io { path, message } => json!({ "error": "io", "path": path, "message": message }),
            Failure::Solver { kind, message } => json!({ "error": "solver", "kind": kind, "message": message }),
        };
        value.to_string()
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidRequest(m) => Failure::Validation(m),
            e => Failure::Solver { kind: e.kind(), message: e.to_string() },
        }
    }
}

impl From<PeriodicError> for Failure {
    fn from(e: PeriodicError) -> Self {
        match e {
            PeriodicError::InvalidRequest(m) | PeriodicError::Shooting(DynamicsError::InvalidRequest(m)) => {
                Failure::Validation(m)
            }
            e => Failure::Solver { kind: e.kind(), message: e.to_string() },
        }
    }
}
