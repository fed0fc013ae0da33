use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families that the command-line front end maps
/// onto distinct exit codes: malformed input/configuration, and numerical
/// failures on otherwise well-formed data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unachievable torque {torque} Nm at {omega} rad/s: {reason}")]
    UnachievableTorque {
        torque: f64,
        omega: f64,
        reason: String,
    },

    #[error("rank-deficient regressor: column `{column}` has no independent excitation")]
    RankDeficient { column: String },

    #[error("poorly conditioned fit: {0}")]
    PoorConditioning(String),

    #[error("controller state: {0}")]
    State(String),

    #[error("detection failed: {0}")]
    Detection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by the data being numerically unusable
    /// rather than malformed.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnachievableTorque { .. }
                | Error::RankDeficient { .. }
                | Error::PoorConditioning(_)
                | Error::Detection(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
