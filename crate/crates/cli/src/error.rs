use std::fmt;

use serde::Serialize;

/// What went wrong, which fixes the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    Runtime,
    Parse,
    Infeasible,
    ResourceCap,
    VerifyMismatch,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Runtime => 1,
            Failure::Parse => 2,
            Failure::Infeasible => 3,
            Failure::ResourceCap => 4,
            Failure::VerifyMismatch => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

impl CliError {
    pub fn new(failure: Failure, message: impl Into<String>) -> Self {
        CliError { failure, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(Failure::Parse, message)
    }

    /// One JSON line for the error stream.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: Failure,
            exit_code: i32,
            message: &'a str,
        }
        serde_json::to_string(&Line {
            error: self.failure,
            exit_code: self.failure.exit_code(),
            message: &self.message,
        })
        .expect("diagnostic serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cobose_core::Error> for CliError {
    fn from(e: cobose_core::Error) -> Self {
        use cobose_core::Error as E;
        let failure = match &e {
            E::Infeasible { .. } | E::NegativeDiscriminant { .. } => Failure::Infeasible,
            E::TooLarge(_) => Failure::ResourceCap,
            E::InvalidInput(_) | E::NotNormalized { .. } | E::NoSuchMode { .. } => Failure::Parse,
            E::Pole { .. } | E::Numerical(_) => Failure::Runtime,
        };
        CliError::new(failure, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Failure::Runtime, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
