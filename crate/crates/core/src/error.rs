use thiserror::Error;

use crate::constants::ConstantError;
use crate::model::Proposition;
use crate::solver::SolverError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{proposition:?} not applicable: {}", violations.join("; "))]
    Regime {
        proposition: Proposition,
        violations: Vec<String>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no embedding constant for (q, ℓ) = ({q}, {ell}): {reason}")]
    MissingEmbedding { q: f64, ell: f64, reason: String },
    #[error("no norm of {function} recorded at exponent {exponent}")]
    MissingNorm { function: &'static str, exponent: f64 },
    #[error("{parameter} = {value} reaches its critical value {critical}")]
    BlowUp {
        parameter: &'static str,
        critical: f64,
        value: f64,
    },
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
