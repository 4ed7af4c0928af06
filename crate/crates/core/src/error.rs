use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown sample {0:?}")]
    UnknownSample(String),

    #[error("invalid base system: {0}")]
    InvalidSystem(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("image {value} of state {state} at sample {sample} is not on the lattice")]
    OffLattice {
        sample: String,
        state: String,
        value: String,
    },

    #[error("image of state {state} at sample {sample} exceeds x_max (lattice too small)")]
    Escape { sample: String, state: String },

    #[error("state index {0} is outside the lattice")]
    StateOutOfRange(usize),

    #[error("random set is empty at sample {0}")]
    EmptyRandomSet(String),

    #[error("random set is not stable: phi_{sample}({state}) = {image} is not in G at the next sample")]
    NotStable {
        sample: String,
        state: String,
        image: String,
    },

    #[error("backwards iteration did not stabilize within {0} sweeps")]
    NotStabilized(usize),

    #[error("map is not monotone: phi_{sample}({low}) > phi_{sample}({high})")]
    NotMonotone {
        sample: String,
        low: String,
        high: String,
    },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable tag for the error class.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse_error",
            Error::UnknownSample(_) => "unknown_sample",
            Error::InvalidSystem(_) => "invalid_system",
            Error::InvalidLattice(_) => "invalid_lattice",
            Error::InvalidParams(_) => "invalid_params",
            Error::OffLattice { .. } => "off_lattice",
            Error::Escape { .. } => "closure_violation",
            Error::StateOutOfRange(_) => "state_out_of_range",
            Error::EmptyRandomSet(_) => "empty_random_set",
            Error::NotStable { .. } => "g_not_stable",
            Error::NotStabilized(_) => "not_stabilized",
            Error::NotMonotone { .. } => "not_monotone",
            Error::Mismatch(_) => "mismatch",
            Error::Internal(_) => "internal",
        }
    }
}
