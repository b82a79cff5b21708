use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A probability or rate left its admissible range.
    #[error("detection probability {p} outside [0,1] for strategy {j} at control {b:?}")]
    Domain { j: usize, b: Vec<f64>, p: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical error: {message} (state {state:?})")]
    Numerical { message: String, state: Vec<f64> },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("integration failed at grid node {node}: {source}")]
    Node {
        node: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, state: &[f64]) -> Self {
        Error::Numerical {
            message: msg.into(),
            state: state.to_vec(),
        }
    }

    /// True when the error originates from configuration or input validation
    /// rather than from a numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Unsupported(_) => true,
            Error::Replicate { source, .. } | Error::Node { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
