//! Command-line harness: configuration handling, mode dispatch, and
//! deterministic JSON/CSV emission for the gate simulator.

use lzgate_core::Error as CoreError;

pub mod config;
pub mod output;
pub mod run;

/// CLI failures sorted by exit code: configuration and validation
/// problems exit 2, numerical failures inside an otherwise valid run
/// exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(msg: String) -> CliError {
        CliError::Config(msg)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Maps a core error raised in the named stage. Rejected inputs and
    /// rejected operating points are configuration problems; stiffness
    /// and convergence breakdowns are numerical ones.
    pub fn from_core(stage: &str, e: CoreError) -> CliError {
        let msg = format!("{stage}: {e}");
        match e {
            CoreError::InvalidArgument(_)
            | CoreError::OutOfRange(_)
            | CoreError::RegimeRejected(_)
            | CoreError::DesignRejected(_) => CliError::Config(msg),
            CoreError::Stiffness { .. } | CoreError::Numerical { .. } => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Config(format!("io: {e}"))
    }
}
