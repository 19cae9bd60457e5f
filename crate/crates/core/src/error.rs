use thiserror::Error;

/// Errors raised by the numerical and game modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("window too small: {0}")]
    Window(String),
    #[error("tail sum did not converge: {0}")]
    Convergence(String),
    #[error("battlefield outside window ⟦{lo}, {hi}⟧")]
    BattlefieldOutsideWindow { lo: i64, hi: i64 },
    #[error("monotonicity violated at vertex {vertex}")]
    NotStrict { vertex: i64 },
    #[error("invalid boundary data: {0}")]
    Boundary(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
