use crate::evaluate::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("instance is invalid: {}", summarize(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    #[error("numerical breakdown in simplex: {0}")]
    Numerical(String),

    #[error("enumeration space of {space} points exceeds the oracle limit of {limit}")]
    SearchSpaceTooLarge { space: u128, limit: u128 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn summarize(violations: &[Violation]) -> String {
    match violations {
        [] => "no violations".to_string(),
        [only] => only.message.clone(),
        [first, rest @ ..] => format!("{} (and {} more)", first.message, rest.len()),
    }
}
