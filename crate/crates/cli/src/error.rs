use std::path::PathBuf;

use lcrl::automata::AutomatonError;
use lcrl::env::EnvError;
use lcrl::learner::LearnError;
use lcrl::ltl::LtlError;
use lcrl::oracle::OracleError;
use lcrl::product::ProductError;
use lcrl::psp::PspError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("run and oracle report disagree on {what}: `{run}` vs `{oracle}`")]
    MismatchedFixture { what: &'static str, run: String, oracle: String },
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Psp(#[from] PspError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 2 config, 3 runtime, 4 too large, 5 mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Automaton(_) | CliError::Ltl(_) => 2,
            CliError::MismatchedFixture { .. } => 5,
            CliError::Env(e) => env_code(e),
            CliError::Learn(LearnError::Config { .. }) => 2,
            CliError::Learn(LearnError::Product(p)) => product_code(p),
            CliError::Oracle(OracleError::TooLarge { .. }) => 4,
            CliError::Oracle(OracleError::Env(e)) => env_code(e),
            CliError::Oracle(OracleError::Product(p)) => product_code(p),
            _ => 3,
        }
    }
}

fn env_code(e: &EnvError) -> i32 {
    match e {
        EnvError::TooLarge { .. } | EnvError::NotEnumerable => 4,
        EnvError::Format { .. } | EnvError::UnknownName(_) | EnvError::Invalid(_) => 2,
        EnvError::InvalidAction { .. } => 3,
    }
}

fn product_code(e: &ProductError) -> i32 {
    match e {
        ProductError::UnknownAtom(_) => 2,
        ProductError::Env(e) => env_code(e),
        ProductError::InvalidAction { .. } => 3,
    }
}
