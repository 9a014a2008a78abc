//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by the
//! stage that raises them: parameter validation, channel algebra, enumeration
//! limits, codebook construction, code parsing, and (de)serialization.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for channel algebra, codebook construction, coding, and
/// simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A probability parameter fell outside `[0, 1]`.
    #[error("probability {value} for `{name}` is outside [0, 1]")]
    ProbabilityOutOfRange {
        /// Parameter name as exposed in the API.
        name: &'static str,
        /// Offending value.
        value: f64,
    },

    /// A probability vector does not sum to 1 within tolerance.
    #[error("probabilities sum to {sum}, expected 1 (tolerance {tol})")]
    ProbabilitySum {
        /// Actual sum.
        sum: f64,
        /// Allowed absolute deviation.
        tol: f64,
    },

    /// Two objects that must share an alphabet (or a support) do not.
    #[error("alphabet mismatch: {context}")]
    AlphabetMismatch {
        /// What was being combined.
        context: &'static str,
    },

    /// A string/matrix length differs from the expected block length.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch {
        /// Required length.
        expected: usize,
        /// Provided length.
        got: usize,
    },

    /// The channel parameter sits at a composition fixed point, so no
    /// intermediate channel can reach a different target.
    #[error("channel parameter {p} is singular for this family; no intermediate channel exists")]
    SingularChannel {
        /// The physical-channel parameter.
        p: f64,
    },

    /// The requested emulation target cannot be reached from the physical
    /// channel (target milder than physical, or past the fixed point).
    #[error("no valid emulation: target {target} unreachable from physical {physical}")]
    NoValidEmulation {
        /// Physical error parameter.
        physical: f64,
        /// Requested total error parameter.
        target: f64,
    },

    /// An exact-enumeration path would exceed the configured cap.
    #[error("enumeration of {required} strings exceeds the cap of {cap}")]
    EnumerationTooLarge {
        /// Strings the operation would have to visit.
        required: u128,
        /// Configured ceiling.
        cap: u128,
    },

    /// A partition codebook needs more typical strings than exist.
    #[error("rate too high: {needed} codewords requested but the typical set holds {available}")]
    RateExceedsTypicalSet {
        /// Codewords the rate target implies.
        needed: u64,
        /// Typical-set cardinality.
        available: u128,
    },

    /// A message index outside the codebook.
    #[error("message index {index} out of range for a codebook of {messages} messages")]
    InvalidMessage {
        /// Offending index.
        index: u64,
        /// Codebook size.
        messages: u64,
    },

    /// A structural problem in a parity-check / stabilizer description.
    #[error("invalid code: {reason}")]
    InvalidCode {
        /// Human-readable defect description.
        reason: String,
    },

    /// Malformed key material (seed hex, fingerprints).
    #[error("invalid key material: {reason}")]
    InvalidKey {
        /// Human-readable defect description.
        reason: String,
    },

    /// A configuration value failed validation (counts, rates, modes).
    #[error("invalid configuration: {reason}")]
    InvalidConfig {
        /// Human-readable defect description.
        reason: String,
    },

    /// Codebook / report (de)serialization failure.
    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),

    /// A versioned file carries an unsupported version tag.
    #[error("unsupported file version {found}, expected {expected}")]
    UnsupportedVersion {
        /// Version found in the file.
        found: u32,
        /// Version this build reads/writes.
        expected: u32,
    },
}

impl Error {
    /// Shorthand used by validators.
    pub(crate) fn prob(name: &'static str, value: f64) -> Self {
        Error::ProbabilityOutOfRange { name, value }
    }

    /// Shorthand for configuration errors.
    pub(crate) fn config(reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            reason: reason.into(),
        }
    }

    /// Shorthand for code-description errors.
    pub(crate) fn code(reason: impl Into<String>) -> Self {
        Error::InvalidCode {
            reason: reason.into(),
        }
    }
}
