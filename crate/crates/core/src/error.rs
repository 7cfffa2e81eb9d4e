use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The discretization is too coarse for the requested computation; refine
    /// the grid and retry.
    #[error("resolution insufficient: {0}")]
    ResolutionInsufficient(String),

    #[error("cap of chordal radius {radius} around ({x:.6}, {y:.6}, {z:.6}) contains no grid point")]
    CapUnderResolved { radius: f64, x: f64, y: f64, z: f64 },

    #[error("not a regular value: |jacobian| = {jacobian:e} at a located preimage")]
    NotRegularValue { jacobian: f64 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    pub(crate) fn resolution(msg: impl Into<String>) -> Self {
        LabError::ResolutionInsufficient(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::InvalidArgument(_) | LabError::UndefinedRatio(_) => 2,
            LabError::ResolutionInsufficient(_)
            | LabError::CapUnderResolved { .. }
            | LabError::NotRegularValue { .. } => 3,
            LabError::ResourceLimit(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
