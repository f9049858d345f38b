use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input dimensions disagree (channel count or window length).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The closed form is not guaranteed for this input (e.g. negative net drive).
    #[error("out of premise: {0}")]
    OutOfPremise(String),

    /// A scenario maps to a sparsity outside [0, 1].
    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    #[error("hardware profile '{profile}' has no E_MAC entry for (activation_bits={activation_bits}, weight_bits={weight_bits})")]
    MissingMac {
        profile: String,
        activation_bits: u32,
        weight_bits: u32,
    },

    #[error("hardware profile '{profile}' has no E_weight entry for weight_bits={weight_bits}")]
    MissingWeight { profile: String, weight_bits: u32 },

    /// Malformed configuration or profile document.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot parse '{0}' as an exact decimal")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by profile/config content rather than by arguments.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::MissingMac { .. } | Error::MissingWeight { .. } | Error::Config(_) | Error::Parse(_)
        )
    }
}
