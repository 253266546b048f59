use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DomainDegenerate(String),

    #[error("deformation step too large: {0}")]
    StepTooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty point set")]
    EmptySet,

    #[error("meshing failure: {0}")]
    MeshingFailure(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("starshapedness violated: x·ν ≤ 0 on the boundary")]
    NotStarshaped,

    #[error("no usable data: {0}")]
    NoData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
