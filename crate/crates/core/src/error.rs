use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter lies outside its allowed domain.
    #[error("invalid value for `{field}`: {reason}")]
    Domain { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid mode selection: {0}")]
    Modes(String),

    /// Numerically degenerate input (singular covariance, non-invertible map, ...).
    #[error("ill-conditioned computation: {0}")]
    Conditioning(String),

    /// A state that should be pure is mixed, or a state fails the uncertainty relation.
    #[error("invalid state: {0}")]
    State(String),

    #[error("truncated Fock basis loses {deficit:.3e} of the norm (limit {limit:.1e})")]
    Truncation { deficit: f64, limit: f64 },

    #[error("Fock space dimension {dim} exceeds the cap of {cap}")]
    FockCap { dim: usize, cap: usize },
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerical conditioning rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Conditioning(_) | Error::Truncation { .. })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
