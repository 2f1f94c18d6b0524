use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("receiver at {position} m coincides with a transmitter (zero distance)")]
    ZeroDistance { position: f64 },
    #[error("at least one transmitter is required")]
    NoTransmitters,
    #[error("transmitters {first} and {second} use different carrier frequencies")]
    FrequencyMismatch { first: usize, second: usize },
    #[error("transmitters {first} and {second} share a carrier frequency")]
    DuplicateFrequency { first: usize, second: usize },
    #[error("input power must be positive, got {0} W")]
    NonPositivePower(f64),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("time step {step} s exceeds the limit of {limit} s")]
    StepTooCoarse { step: f64, limit: f64 },
    #[error("duration {duration} s is shorter than the required {required} s")]
    DurationTooShort { duration: f64, required: f64 },
    #[error("DC output of {0} W is unreachable by the rectifier")]
    Unreachable(f64),
    #[error("recovered efficiency {0} lies outside [0, 1.05]; trace is inconsistent")]
    InconsistentTrace(f64),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { field, reason: reason.into() }
    }
}
