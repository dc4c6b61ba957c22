use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `a²pq ≥ 1`: the perturbed identity is not positive definite.
    #[error("covariance is not positive definite (a^2 pq = {0})")]
    NotPositiveDefinite(f64),

    #[error("negative discriminant {0} in the eigenvalue formula")]
    NegativeDiscriminant(f64),

    #[error("chi-square divergence is infinite: {0}")]
    DivergenceInfinite(String),

    #[error("{name} is outside its domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("problem too large for exhaustive evaluation: {0}")]
    Infeasible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }
}
