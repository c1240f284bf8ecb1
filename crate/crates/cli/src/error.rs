use std::fmt;

use tritrans_core::angle_dynamics::AngleError;
use tritrans_core::mesh_io::MeshIoError;
use tritrans_core::simple_mesh::MeshError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or malformed input data (exit 2).
    Validation(String),
    /// Files that cannot be read or written (exit 3).
    Io(String),
    /// A computation left the valid domain, e.g. a degenerate mesh step (exit 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<MeshIoError> for CliError {
    fn from(e: MeshIoError) -> Self {
        match e {
            MeshIoError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::DegenerateOutput { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<AngleError> for CliError {
    fn from(e: AngleError) -> Self {
        CliError::Validation(e.to_string())
    }
}
