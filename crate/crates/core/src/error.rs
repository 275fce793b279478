use std::path::PathBuf;

use thiserror::Error;

use crate::fock::Detector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A jump was applied to a state with zero occupation on that side.
    #[error("{detector} jump annihilates the state (zero occupation on that side)")]
    ZeroNormJump { detector: Detector },

    #[error("numerical tolerance failure at t = {time}: {reason}")]
    Tolerance { time: f64, reason: String },

    #[error("mean-field chart breaks down at z = {z}")]
    ChartBreakdown { z: f64 },

    #[error("no separatrix in this regime (chi/J = {chi_over_j})")]
    NoSeparatrix { chi_over_j: f64 },

    #[error("dense master equation refused for N = {n_atoms} (limit {limit})")]
    TooLarge { n_atoms: usize, limit: usize },

    #[error("refusing to compare: {0}")]
    Mismatch(String),

    #[error("parse error in {}: {reason}", path.display())]
    Parse { path: PathBuf, reason: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn tolerance(time: f64, reason: impl Into<String>) -> Self {
        Error::Tolerance {
            time,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::Config(_)
            | Error::Mismatch(_)
            | Error::Parse { .. }
            | Error::TooLarge { .. }
            | Error::NoSeparatrix { .. } => 2,
            Error::ZeroNormJump { .. } | Error::Tolerance { .. } | Error::ChartBreakdown { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
