use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The postselection window accepts nothing, so fidelity and output state
    /// are undefined.
    #[error("success probability is zero (p_c = {p_c}); fidelity is undefined")]
    UndefinedFidelity { p_c: f64 },

    /// A purification round whose success probability is exactly zero.
    #[error("purification cannot succeed for these inputs")]
    PurificationImpossible,

    #[error("negative population {value:e} in {element}")]
    NegativePopulation { element: &'static str, value: f64 },

    #[error("invalid Bell-diagonal state {0:?}")]
    InvalidState([f64; 4]),

    #[error("oracle expects {expected} pairs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length ratio {ratio} is not a power of two")]
    NotPowerOfTwo { ratio: f64 },

    #[error("invalid config key `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("simulation deadlocked at t = {time_ms} ms after {delivered} of {target} pairs: {diagnostic}")]
    Deadlock {
        time_ms: f64,
        delivered: usize,
        target: usize,
        diagnostic: String,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key,
            reason: reason.into(),
        }
    }
}
