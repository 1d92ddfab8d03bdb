//! Symbolic model of the predecessor QFT-based protocol and its leakage.
//!
//! The predecessor's whole quantum content reduces to phase bookkeeping:
//! `QFT^2 |j> = -|j>` and `QFT^4 |j> = |j>`, so a particle's state is fully
//! described by its accumulated exponent mod 4. The protocol is therefore
//! simulated with exponent arithmetic rather than state vectors, and the sign
//! of each final particle reproduces the published per-position results.
//!
//! Physically, `-|j>` and `|j>` differ only by a global phase and no
//! measurement can tell them apart, so the final comparison step is not
//! operationally realizable as written; this module reproduces the
//! bookkeeping, not a measurement procedure.
//!
//! The leakage: every minus-signed position belongs to exactly one private
//! set, so a participant who sees the signs learns the other party's
//! difference-set elements. [`leakage_attack`] executes exactly that
//! deduction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hqpsi::{encode_set, CodeVector, PrivateSet, UniversalSet};
use crate::rng::SeededRng;

/// A particle tracked as (identifier, accumulated QFT exponent mod 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTrackedState {
    /// Index of the particle in the prepared sequence.
    pub label: usize,
    /// Accumulated exponent, reduced modulo 4.
    pub exp_mod4: u8,
}

impl PhaseTrackedState {
    pub fn new(label: usize) -> Self {
        Self { label, exp_mod4: 0 }
    }
}

/// Adds `e` QFT applications to the tracked exponent.
pub fn qft_accumulate(state: PhaseTrackedState, e: i64) -> PhaseTrackedState {
    PhaseTrackedState {
        label: state.label,
        exp_mod4: ((i64::from(state.exp_mod4) + e).rem_euclid(4)) as u8,
    }
}

/// One party's per-position randomness: a bit `r_i` and a positive integer
/// `h_i`; the particle receives `QFT^(c_i * 2 + r_i * h_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NqpsiRandomness {
    pub r: Vec<bool>,
    pub h: Vec<u32>,
}

impl NqpsiRandomness {
    pub fn sample(n: usize, h_bound: u32, rng: &mut SeededRng) -> Self {
        let h_bound = h_bound.max(1);
        Self {
            r: (0..n).map(|_| rng.random_bool(0.5)).collect(),
            h: (0..n).map(|_| rng.random_range(1..=h_bound)).collect(),
        }
    }

    fn masking(&self, i: usize) -> i64 {
        if self.r[i] {
            i64::from(self.h[i])
        } else {
            0
        }
    }
}

/// The sign of the final particle relative to its preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictSign {
    /// Final particle equals the prepared one.
    Plus,
    /// Final particle is the negated prepared one.
    Minus,
}

/// Per-position signs of the final comparison, for positions `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NqpsiVerdict {
    signs: Vec<VerdictSign>,
}

impl NqpsiVerdict {
    pub fn signs(&self) -> &[VerdictSign] {
        &self.signs
    }

    pub fn sign(&self, i: usize) -> VerdictSign {
        self.signs[i]
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// Intermediate values of one symbolic run, kept for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NqpsiTranscript {
    pub randomness_a: NqpsiRandomness,
    pub randomness_b: NqpsiRandomness,
    /// The correction exponents `h_i^C = 4 - ((r_A h_A + r_B h_B) mod 4)`.
    pub correction: Vec<u32>,
    /// Final accumulated exponents mod 4; always 0 or 2.
    pub final_exp: Vec<u8>,
}

/// Runs the predecessor protocol symbolically (Steps 1-7): Alice and Bob add
/// their coded and masked exponents, the parties jointly send the correction
/// that cancels the masking, and Calvin reads off a sign per position.
pub fn nqpsi_run(
    set_a: &PrivateSet,
    set_b: &PrivateSet,
    universe: &UniversalSet,
    rng: &mut SeededRng,
) -> Result<(NqpsiVerdict, NqpsiTranscript), Error> {
    let code_a = encode_set(universe, set_a)?;
    let code_b = encode_set(universe, set_b)?;
    let n = universe.len();
    let randomness_a = NqpsiRandomness::sample(n, 64, rng);
    let randomness_b = NqpsiRandomness::sample(n, 64, rng);

    let mut signs = Vec::with_capacity(n);
    let mut correction = Vec::with_capacity(n);
    let mut final_exp = Vec::with_capacity(n);
    for i in 0..n {
        let state = PhaseTrackedState::new(i);
        let state = qft_accumulate(state, i64::from(code_a.bit(i)) * 2 + randomness_a.masking(i));
        let state = qft_accumulate(state, i64::from(code_b.bit(i)) * 2 + randomness_b.masking(i));
        let mask_total = randomness_a.masking(i) + randomness_b.masking(i);
        let h_c = 4 - (mask_total.rem_euclid(4)) as u32;
        let state = qft_accumulate(state, i64::from(h_c));
        correction.push(h_c);
        final_exp.push(state.exp_mod4);
        signs.push(if state.exp_mod4 == 0 {
            VerdictSign::Plus
        } else {
            VerdictSign::Minus
        });
    }

    Ok((
        NqpsiVerdict { signs },
        NqpsiTranscript {
            randomness_a,
            randomness_b,
            correction,
            final_exp,
        },
    ))
}

/// Splits the verdicts into the complement-intersection set (plus signs:
/// elements in both sets or in neither) and the difference set (minus signs).
pub fn partition_results(
    verdict: &NqpsiVerdict,
    universe: &UniversalSet,
) -> (PrivateSet, PrivateSet) {
    let mut complement_intersection = Vec::new();
    let mut difference = Vec::new();
    for (i, &element) in universe.elements().iter().enumerate() {
        match verdict.sign(i) {
            VerdictSign::Plus => complement_intersection.push(element),
            VerdictSign::Minus => difference.push(element),
        }
    }
    (
        PrivateSet::new(complement_intersection),
        PrivateSet::new(difference),
    )
}

/// A participant's deduction from the published verdicts: every minus-signed
/// position whose element is outside their own set must belong to the other
/// party. Returns exactly the other party's elements outside the
/// intersection.
pub fn leakage_attack(
    verdict: &NqpsiVerdict,
    own_code: &CodeVector,
    universe: &UniversalSet,
) -> PrivateSet {
    universe
        .elements()
        .iter()
        .enumerate()
        .filter(|(i, _)| verdict.sign(*i) == VerdictSign::Minus && !own_code.bit(*i))
        .map(|(_, &element)| element)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_universe() -> UniversalSet {
        UniversalSet::new(vec![2, 5, 7, 9, 13, 17, 20, 35]).unwrap()
    }

    #[test]
    fn qft_accumulate_examples() {
        let s = PhaseTrackedState::new(0);
        assert_eq!(qft_accumulate(s, 4).exp_mod4, 0);
        assert_eq!(qft_accumulate(s, 2).exp_mod4, 2);
        let s3 = PhaseTrackedState { label: 0, exp_mod4: 3 };
        assert_eq!(qft_accumulate(s3, 1).exp_mod4, 0);
        assert_eq!(qft_accumulate(s, -1).exp_mod4, 3);
    }

    #[test]
    fn verdict_signs_depend_only_on_code_bits() {
        // The published table: (0,0) -> +, (0,1) -> -, (1,0) -> -, (1,1) -> +.
        let u = UniversalSet::new(vec![10, 20, 30, 40]).unwrap();
        let set_a = PrivateSet::new([30, 40]);
        let set_b = PrivateSet::new([20, 40]);
        // Codes: a = 0011, b = 0101 -> signs +,-,-,+.
        for seed in 0..1000 {
            let mut rng = SeededRng::new(seed);
            let (verdict, transcript) = nqpsi_run(&set_a, &set_b, &u, &mut rng).unwrap();
            assert_eq!(
                verdict.signs(),
                &[
                    VerdictSign::Plus,
                    VerdictSign::Minus,
                    VerdictSign::Minus,
                    VerdictSign::Plus
                ]
            );
            for &e in &transcript.final_exp {
                assert!(e == 0 || e == 2, "final exponent must be 0 or 2, got {e}");
            }
        }
    }

    #[test]
    fn exhaustive_masking_cancellation() {
        // Over all small r, h choices and all four code pairs the correction
        // exactly cancels the masking: final exponent is 2 * (c_A + c_B) mod 4.
        for c_a in [0i64, 1] {
            for c_b in [0i64, 1] {
                for r_a in [0i64, 1] {
                    for h_a in 1i64..=8 {
                        for r_b in [0i64, 1] {
                            for h_b in 1i64..=8 {
                                let state = PhaseTrackedState::new(0);
                                let state = qft_accumulate(state, c_a * 2 + r_a * h_a);
                                let state = qft_accumulate(state, c_b * 2 + r_b * h_b);
                                let mask = r_a * h_a + r_b * h_b;
                                let h_c = 4 - mask.rem_euclid(4);
                                let state = qft_accumulate(state, h_c);
                                let expected = ((c_a + c_b) * 2).rem_euclid(4) as u8;
                                assert_eq!(state.exp_mod4, expected);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partition_matches_set_algebra() {
        let u = example_universe();
        let set_a = PrivateSet::new([5, 7, 17, 20]);
        let set_b = PrivateSet::new([7, 13, 17, 35]);
        let mut rng = SeededRng::new(1);
        let (verdict, _) = nqpsi_run(&set_a, &set_b, &u, &mut rng).unwrap();
        let (c_in, diff) = partition_results(&verdict, &u);
        assert_eq!(diff, PrivateSet::new([5, 13, 20, 35]));
        assert_eq!(c_in, PrivateSet::new([2, 7, 9, 17]));

        // S_A = S_B gives an empty difference set.
        let (verdict, _) = nqpsi_run(&set_a, &set_a, &u, &mut rng).unwrap();
        let (_, diff) = partition_results(&verdict, &u);
        assert!(diff.is_empty());

        // S_A = U, S_B empty: everything differs.
        let all = PrivateSet::new(u.elements().iter().copied());
        let (verdict, _) = nqpsi_run(&all, &PrivateSet::default(), &u, &mut rng).unwrap();
        let (_, diff) = partition_results(&verdict, &u);
        assert_eq!(diff, all);
    }

    #[test]
    fn leakage_recovers_the_other_partys_extras() {
        let u = example_universe();
        let set_a = PrivateSet::new([5, 7, 17, 20]);
        let set_b = PrivateSet::new([7, 13, 17, 35]);
        let code_a = encode_set(&u, &set_a).unwrap();
        let code_b = encode_set(&u, &set_b).unwrap();
        let mut rng = SeededRng::new(2);
        let (verdict, _) = nqpsi_run(&set_a, &set_b, &u, &mut rng).unwrap();

        let alice_inference = leakage_attack(&verdict, &code_a, &u);
        assert_eq!(alice_inference, PrivateSet::new([13, 35]));
        assert_eq!(alice_inference, set_b.difference(&set_a));

        let bob_inference = leakage_attack(&verdict, &code_b, &u);
        assert_eq!(bob_inference, PrivateSet::new([5, 20]));
        assert_eq!(bob_inference, set_a.difference(&set_b));

        // Identical sets leak nothing.
        let (verdict, _) = nqpsi_run(&set_a, &set_a, &u, &mut rng).unwrap();
        assert!(leakage_attack(&verdict, &code_a, &u).is_empty());
    }

    #[test]
    fn leakage_partitions_the_difference_set() {
        let rng = SeededRng::new(3);
        for trial in 0..100 {
            let mut trial_rng = rng.child(&format!("trial{trial}"));
            let n = trial_rng.random_range(1..=12usize);
            let universe =
                UniversalSet::new((0..n as u64).map(|i| i * 3 + 1).collect()).unwrap();
            let set_a: PrivateSet = universe
                .elements()
                .iter()
                .copied()
                .filter(|_| trial_rng.random_bool(0.5))
                .collect();
            let set_b: PrivateSet = universe
                .elements()
                .iter()
                .copied()
                .filter(|_| trial_rng.random_bool(0.5))
                .collect();
            let code_a = encode_set(&universe, &set_a).unwrap();
            let code_b = encode_set(&universe, &set_b).unwrap();
            let (verdict, _) = nqpsi_run(&set_a, &set_b, &universe, &mut trial_rng).unwrap();

            let from_alice = leakage_attack(&verdict, &code_a, &universe);
            let from_bob = leakage_attack(&verdict, &code_b, &universe);
            let (_, diff) = partition_results(&verdict, &universe);

            assert_eq!(from_alice.union(&from_bob), diff);
            assert!(from_alice.intersection(&from_bob).is_empty());
        }
    }
}
