use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("series failed to converge: {0}")]
    NonConvergence(String),
    #[error("root bracketing failed: {0}")]
    Bracket(String),
    #[error("complex growth rates for mu = {mu}")]
    ComplexRoots { mu: f64 },
    #[error("spectral gap violated: {0}")]
    SpectralGap(String),
    #[error("near-singular system: {0}")]
    Singular(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
