use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not normal (residual {residual:.3e})")]
    NotNormal { residual: f64 },

    #[error("quadrature did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Quadrature { residual: f64, tolerance: f64 },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("Fock space dimension {dimension} exceeds the guard of {limit}")]
    DimensionGuard { dimension: usize, limit: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
