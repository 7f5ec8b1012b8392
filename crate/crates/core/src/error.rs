use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite multiplier symbol at wavenumber {k:?}")]
    NonFiniteSymbol { k: [i64; 3] },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: value {value:e}, achieved error bound {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("step rejected at t = {t}: {reason}; reduce dt")]
    Stability { t: f64, reason: String },

    #[error("CFL violation: courant number {courant:.4} exceeds limit {limit:.4}; reduce dt")]
    Cfl { courant: f64, limit: f64 },

    #[error("numeric blow-up at t = {t}: max |coefficient| = {max_coeff:e}")]
    BlowUp { t: f64, max_coeff: f64 },

    #[error("power-law fit failed: {reason} (offending indices {offending:?})")]
    Fit { reason: String, offending: Vec<usize> },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
