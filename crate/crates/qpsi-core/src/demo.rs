//! A fully pinned reference session with known-good results.
//!
//! Every input is fixed: the universal set, both private sets, Calvin's
//! preparation labels, both masking strings, and Alice's flag string. The
//! session is therefore exactly reproducible and its per-position outcomes
//! are frozen here as constants. The CLI `demo-example` subcommand replays it
//! and checks each expectation; tests use the same fixtures.

use crate::harness::{ReplayInputs, SessionConfig};
use crate::hqpsi::{CompareMode, ExponentVector, FlagVector, PrivateSet, UniversalSet};
use crate::qubit::PrepLabel;

pub fn universe() -> UniversalSet {
    UniversalSet::new(vec![2, 5, 7, 9, 13, 17, 20, 35]).expect("fixed universe is valid")
}

pub fn set_a() -> PrivateSet {
    PrivateSet::new([5, 7, 17, 20])
}

pub fn set_b() -> PrivateSet {
    PrivateSet::new([7, 13, 17, 35])
}

/// Calvin's sixteen preparation labels: |101+00-++01+-0-1>.
pub fn prep_labels() -> Vec<PrepLabel> {
    use PrepLabel::*;
    vec![
        One, Zero, One, Plus, Zero, Zero, Minus, Plus, Plus, Zero, One, Plus, Minus, Zero, Minus,
        One,
    ]
}

pub fn r_a() -> ExponentVector {
    ExponentVector::new(vec![3, 6, 4, 2, 4, 1, 9, 7, 3, 6, 4, 2, 4, 1, 9, 7])
        .expect("fixed exponents are positive")
}

pub fn r_b() -> ExponentVector {
    ExponentVector::new(vec![7, 9, 8, 5, 4, 2, 3, 6, 7, 9, 8, 5, 4, 2, 3, 6])
        .expect("fixed exponents are positive")
}

/// Alice's flag string H_A = 11001001.
pub fn flags_a() -> FlagVector {
    FlagVector::new(vec![true, true, false, false, true, false, false, true])
}

pub fn replay_inputs() -> ReplayInputs {
    ReplayInputs {
        prep_labels: prep_labels(),
        r_a: r_a().values().to_vec(),
        r_b: r_b().values().to_vec(),
        flags_a: flags_a().bits().to_vec(),
    }
}

/// A session config that replays the fixed inputs. Decoys are disabled so the
/// transcript carries exactly the sixteen payload particles.
pub fn session_config(seed: u64) -> SessionConfig {
    SessionConfig {
        universe: universe(),
        set_a: set_a(),
        set_b: set_b(),
        decoys_per_hop: 0,
        compare_mode: CompareMode::Exact { tol: 1e-9 },
        max_retries: 0,
        exponent_bound: 1024,
        seed,
        replay: Some(replay_inputs()),
    }
}

/// First-register positions (1-based) whose particles return unchanged.
pub const EXPECTED_EQUAL_FIRST: [usize; 4] = [1, 3, 4, 6];

/// Second-register transit positions (1-based) whose particles come back
/// changed.
pub const EXPECTED_UNEQUAL_SECOND: [usize; 3] = [10, 11, 14];

/// The positions Calvin announces.
pub const EXPECTED_ANNOUNCED: [usize; 2] = [3, 6];

/// Whether the net gate at each transit position (0-based) is H rather than
/// the identity; the finalized particle is `H^b` applied to its preparation.
pub const EXPECTED_HADAMARD_APPLIED: [bool; 16] = [
    false, true, false, false, true, false, true, true, false, true, true, false, false, true,
    false, false,
];

pub fn expected_intersection() -> PrivateSet {
    PrivateSet::new([7, 17])
}
