use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("point {point:?} is outside the domain: {reason}")]
    Domain { point: Vec<f64>, reason: &'static str },

    #[error("rank of the differential is {rank} > {allowed} at {point:?}")]
    RankViolation {
        point: Vec<f64>,
        rank: usize,
        allowed: usize,
    },

    #[error("search failed in {context}: best candidate ratio {best_ratio} (limit {limit})")]
    SearchFailed {
        context: String,
        best_ratio: f64,
        limit: f64,
    },

    #[error("family is not admissible: {0}")]
    NotAdmissible(String),

    #[error("generator {index} of the target class is not a cycle")]
    NotACycle { index: usize },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("enumeration budget exceeded: coset dimension {dimension} > {budget}")]
    BudgetExceeded { dimension: usize, budget: usize },

    #[error("stage {stage} on cube {cube} failed: {source}")]
    Stage {
        stage: usize,
        cube: String,
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, value: impl std::fmt::Display, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected,
                found,
            })
        }
    }
}
