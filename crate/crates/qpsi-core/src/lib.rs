//! Deterministic simulator for a three-party quantum private set intersection
//! (QPSI) protocol built on fractional powers of the Hadamard gate, together
//! with its flawed QFT-based predecessor (NQPSI) and executable adversary
//! models.
//!
//! The crate is organized around the protocol's moving parts:
//!
//! - [`qubit`]: single-qubit states, the Hadamard gate and its third-integer
//!   fractional powers via spectral decomposition, Born-rule measurement.
//! - [`hqpsi`]: the improved H-gate protocol, from set encoding and party
//!   transforms through decoy verification and intersection decoding.
//! - [`nqpsi`]: symbolic (phase-tracking) model of the predecessor protocol
//!   and its participant-leakage attack.
//! - [`adversary`]: intercept-measure-resend eavesdropping with detection
//!   statistics, and curious-participant inference.
//! - [`harness`]: three-party session orchestration, transcripts, retry
//!   policy, and the Monte Carlo trial runner.
//!
//! Everything is seedable: a session with the same [`SessionConfig`] produces
//! a bit-identical outcome and transcript.
//!
//! ```
//! use qpsi_core::harness::{run_session, EvePlan, SessionConfig, SessionOutcome};
//! use qpsi_core::hqpsi::{PrivateSet, UniversalSet};
//!
//! let universe = UniversalSet::new(vec![2, 5, 7, 9, 13, 17, 20, 35])?;
//! let cfg = SessionConfig::new(
//!     universe,
//!     PrivateSet::new([5, 7, 17, 20]),
//!     PrivateSet::new([7, 13, 17, 35]),
//!     42,
//! );
//! match run_session(&cfg, &EvePlan::none())? {
//!     SessionOutcome::Completed { intersection, .. } => {
//!         assert_eq!(intersection, PrivateSet::new([7, 17]));
//!     }
//!     SessionOutcome::Aborted { .. } => unreachable!("untampered channels verify"),
//! }
//! # Ok::<(), qpsi_core::Error>(())
//! ```

pub mod adversary;
pub mod demo;
pub mod error;
pub mod harness;
pub mod hqpsi;
pub mod nqpsi;
pub mod qubit;
pub mod rng;

pub use adversary::{AttackReport, BasisPolicy, EveStrategy, Hop, InferenceReport, PositionKnowledge};
pub use error::{DetectionFailure, Error};
pub use harness::{
    EvePlan, Message, Party, Payload, SessionConfig, SessionOutcome, Transcript,
};
pub use hqpsi::{
    Announcement, CodeVector, CompareMode, DecoyRecord, ExponentVector, FlagVector, PrivateSet,
    QuantumSequence, UniversalSet,
};
pub use qubit::{Gate2, MeasBasis, PrepLabel, QubitState, ThirdExponent};
pub use rng::SeededRng;
