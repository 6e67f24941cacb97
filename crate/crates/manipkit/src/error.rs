//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI reports them: format/IO problems exit
//! with code 2, domain (math and validation) problems with code 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("orientation is in the gimbal-lock region (|pitch| too close to pi/2)")]
    DegenerateOrientation,

    #[error("degenerate contact pair: both fingers selected point index {0}")]
    DegenerateContact(usize),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("corpus too small: need {needed} {kind} trajectories, found {available}")]
    InsufficientCorpus {
        kind: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("repeat strategy is undefined for n1 = 0")]
    StrategyUndefined,

    #[error("rank-deficient fit: all x values identical")]
    RankDeficient,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error onto.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
