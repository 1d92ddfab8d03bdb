//! Error types shared across the protocol modules.

use serde::{Deserialize, Serialize};

use crate::qubit::PrepLabel;

/// Errors raised by protocol operations on malformed inputs.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A private-set element does not belong to the session's universal set.
    #[error("element {0} is not in the universal set")]
    ElementNotInUniverse(u64),

    /// The universal set must hold at least one element, all distinct.
    #[error("universal set must be non-empty with distinct elements")]
    InvalidUniverse,

    /// Two protocol vectors that must agree in length do not.
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Exponent vectors only hold positive integers.
    #[error("exponent vectors must contain positive integers only")]
    NonPositiveExponent,

    /// A caller-stated precondition does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Outcome of a failed decoy verification: the first decoy whose measurement
/// disagrees with its recorded preparation. Signals "return to Step 1".
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("decoy mismatch at transit position {position}: prepared {expected:?}, measured {observed:?}")]
pub struct DetectionFailure {
    /// Index of the decoy in the transit sequence.
    pub position: usize,
    /// The state the decoy was prepared in.
    pub expected: PrepLabel,
    /// The state the verifier measured.
    pub observed: PrepLabel,
}
