use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MorphError>;
