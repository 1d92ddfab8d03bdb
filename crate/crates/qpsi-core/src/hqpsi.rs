//! The improved H-gate private set intersection protocol.
//!
//! Three parties: Calvin (semi-honest third party) prepares `2n` particles,
//! Alice and Bob apply Hadamard powers whose fractional parts encode their
//! set membership bits, and Calvin finally undoes the random integer masking
//! and compares particle by particle. A position `i <= n` whose first-register
//! particle came back unchanged while its second-register partner changed is
//! announced as an intersection element.
//!
//! Quantum hops carry decoy particles at secret positions; verification of
//! the decoys against their preparation bases detects channel tampering.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DetectionFailure, Error};
use crate::qubit::{
    canonical_state, equal_up_to_global_phase, h_power, measure, MeasBasis, PrepLabel,
    QubitState, ThirdExponent,
};
use crate::rng::SeededRng;

/// The session's ordered complete set. Order is fixed for the whole session;
/// code vectors index into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalSet {
    elements: Vec<u64>,
}

impl UniversalSet {
    /// Requires at least one element, all distinct.
    pub fn new(elements: Vec<u64>) -> Result<Self, Error> {
        if elements.is_empty() {
            return Err(Error::InvalidUniverse);
        }
        let distinct: BTreeSet<u64> = elements.iter().copied().collect();
        if distinct.len() != elements.len() {
            return Err(Error::InvalidUniverse);
        }
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn contains(&self, element: u64) -> bool {
        self.elements.contains(&element)
    }
}

/// A party's private set; must be a subset of the session's universal set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateSet {
    elements: BTreeSet<u64>,
}

impl PrivateSet {
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Self {
        Self {
            elements: elements.into_iter().collect(),
        }
    }

    pub fn contains(&self, element: u64) -> bool {
        self.elements.contains(&element)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn intersection(&self, other: &PrivateSet) -> PrivateSet {
        PrivateSet {
            elements: self.elements.intersection(&other.elements).copied().collect(),
        }
    }

    pub fn difference(&self, other: &PrivateSet) -> PrivateSet {
        PrivateSet {
            elements: self.elements.difference(&other.elements).copied().collect(),
        }
    }

    pub fn union(&self, other: &PrivateSet) -> PrivateSet {
        PrivateSet {
            elements: self.elements.union(&other.elements).copied().collect(),
        }
    }
}

impl FromIterator<u64> for PrivateSet {
    fn from_iter<T: IntoIterator<Item = u64>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// The n-bit characteristic vector of a private set relative to the ordered
/// universal set: bit i is set iff element i belongs to the private set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeVector {
    bits: Vec<bool>,
}

impl CodeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for CodeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A vector of random positive integer exponents (the masking strings R_A,
/// R_B, and their sum R_C).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVector {
    values: Vec<u32>,
}

impl ExponentVector {
    /// All entries must be positive.
    pub fn new(values: Vec<u32>) -> Result<Self, Error> {
        if values.contains(&0) {
            return Err(Error::NonPositiveExponent);
        }
        Ok(Self { values })
    }

    /// Uniform draw from `[1, bound]` per entry.
    pub fn sample(len: usize, bound: u32, rng: &mut SeededRng) -> Self {
        let bound = bound.max(1);
        Self {
            values: (0..len).map(|_| rng.random_range(1..=bound)).collect(),
        }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The classical flag string H_A (or the derived H_B) that gates whose code
/// bit enters the second qubit register. Indexed for qubit positions
/// `n+1..2n`; distinct from the H gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagVector {
    bits: Vec<bool>,
}

impl FlagVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn sample(n: usize, rng: &mut SeededRng) -> Self {
        Self {
            bits: (0..n).map(|_| rng.random_bool(0.5)).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// An ordered sequence of particles: `2n` in clean form, `2n + l` while
/// decoys are in transit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumSequence {
    particles: Vec<QubitState>,
}

impl QuantumSequence {
    pub fn new(particles: Vec<QubitState>) -> Self {
        Self { particles }
    }

    pub fn from_labels(labels: &[PrepLabel]) -> Self {
        Self {
            particles: labels.iter().map(|&l| canonical_state(l)).collect(),
        }
    }

    pub fn particles(&self) -> &[QubitState] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Position, preparation, and measurement basis of one decoy particle,
/// recorded by its sender and disclosed to the verifier. The basis is the
/// preparation's eigenbasis; carrying it keeps the record self-describing on
/// the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyRecord {
    /// Index of the decoy in the transit sequence.
    pub position: usize,
    pub prep: PrepLabel,
    pub basis: MeasBasis,
}

/// The position set Calvin publishes in Step 7. Positions are 1-based
/// (`1..=n`), matching what the parties decode against the universal set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    positions: BTreeSet<usize>,
}

impl Announcement {
    pub fn new(positions: impl IntoIterator<Item = usize>) -> Self {
        Self {
            positions: positions.into_iter().collect(),
        }
    }

    pub fn positions(&self) -> &BTreeSet<usize> {
        &self.positions
    }

    pub fn contains(&self, position: usize) -> bool {
        self.positions.contains(&position)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// How Calvin decides particle equality in Step 7.
///
/// `Exact` compares state vectors directly (the simulator's omniscient
/// oracle). `Sampled` models a physically honest Calvin: each position is
/// measured in its preparation basis across `repetitions` independent
/// protocol replicas, and flagged unequal on any mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CompareMode {
    Exact { tol: f64 },
    Sampled { repetitions: usize },
}

impl Default for CompareMode {
    fn default() -> Self {
        CompareMode::Exact { tol: 1e-9 }
    }
}

/// One protocol pass available to Calvin for comparison: the preparation
/// labels he chose and the finalized sequence that came back.
#[derive(Debug, Clone)]
pub struct ComparisonReplica {
    pub prep_labels: Vec<PrepLabel>,
    pub finalized: QuantumSequence,
}

/// Encodes a private set against the universal set (the characteristic
/// bit vector).
pub fn encode_set(universe: &UniversalSet, s: &PrivateSet) -> Result<CodeVector, Error> {
    for element in s.iter() {
        if !universe.contains(element) {
            return Err(Error::ElementNotInUniverse(element));
        }
    }
    Ok(CodeVector::new(
        universe.elements().iter().map(|e| s.contains(*e)).collect(),
    ))
}

/// Calvin's Step 1 preparation: `2n` particles drawn uniformly from the four
/// canonical states. The labels are returned so Calvin can later compare or
/// measure in the preparation basis.
pub fn prepare_initial_sequence(
    n: usize,
    rng: &mut SeededRng,
) -> (QuantumSequence, Vec<PrepLabel>) {
    let labels: Vec<PrepLabel> = (0..2 * n).map(|_| PrepLabel::sample(rng)).collect();
    (QuantumSequence::from_labels(&labels), labels)
}

/// Inserts `l` decoy particles at uniformly random distinct positions of the
/// transit sequence. Each decoy is drawn uniformly from the four canonical
/// states; its basis is the preparation basis. Stripping via the returned
/// records recovers the payload exactly.
pub fn insert_decoys(
    seq: QuantumSequence,
    l: usize,
    rng: &mut SeededRng,
) -> (QuantumSequence, Vec<DecoyRecord>) {
    let total = seq.len() + l;
    // Partial Fisher-Yates over the transit indices: the first l slots become
    // the decoy positions.
    let mut indices: Vec<usize> = (0..total).collect();
    for i in 0..l {
        let j = rng.random_range(i..total);
        indices.swap(i, j);
    }
    let mut decoy_positions: Vec<usize> = indices[..l].to_vec();
    decoy_positions.sort_unstable();

    let mut records = Vec::with_capacity(l);
    let mut particles = Vec::with_capacity(total);
    let mut payload = seq.particles.into_iter();
    let mut next_decoy = 0usize;
    for position in 0..total {
        if next_decoy < l && decoy_positions[next_decoy] == position {
            let prep = PrepLabel::sample(rng);
            records.push(DecoyRecord {
                position,
                prep,
                basis: prep.basis(),
            });
            particles.push(canonical_state(prep));
            next_decoy += 1;
        } else {
            particles.push(payload.next().expect("payload exhausted"));
        }
    }
    (QuantumSequence::new(particles), records)
}

/// Measures every decoy in its recorded basis and compares against the
/// recorded preparation. On success returns the stripped payload sequence;
/// otherwise reports the first mismatching decoy, which per the protocol
/// sends everyone back to Step 1.
pub fn verify_and_strip_decoys(
    transit: QuantumSequence,
    records: &[DecoyRecord],
    rng: &mut SeededRng,
) -> Result<QuantumSequence, DetectionFailure> {
    let mut sorted: Vec<&DecoyRecord> = records.iter().collect();
    sorted.sort_unstable_by_key(|r| r.position);

    for record in &sorted {
        let (outcome, _) = measure(&transit.particles[record.position], record.basis, rng);
        if outcome != record.prep {
            return Err(DetectionFailure {
                position: record.position,
                expected: record.prep,
                observed: outcome,
            });
        }
    }

    let decoy_positions: BTreeSet<usize> = sorted.iter().map(|r| r.position).collect();
    let payload = transit
        .particles
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !decoy_positions.contains(i))
        .map(|(_, p)| p)
        .collect();
    Ok(QuantumSequence::new(payload))
}

/// Exponent numerator applied at transit position `i` (0-based) by a party
/// holding code bits `code`, masking exponents `r`, and second-register
/// flags `flags`: `(c + 2) + 3r` on the first register and
/// `(h*c + 2) + 3r` on the second.
fn coded_numerator(i: usize, n: usize, code: &CodeVector, r: &ExponentVector, flags: &FlagVector) -> ThirdExponent {
    let masked = ThirdExponent::from_integer(i64::from(r.values()[i]));
    if i < n {
        ThirdExponent(i64::from(code.bit(i)) + 2) + masked
    } else {
        let gated = flags.bit(i - n) && code.bit(i - n);
        ThirdExponent(i64::from(gated) + 2) + masked
    }
}

fn coded_transform(
    seq: QuantumSequence,
    code: &CodeVector,
    r: &ExponentVector,
    flags: &FlagVector,
) -> Result<QuantumSequence, Error> {
    let n = code.len();
    if seq.len() != 2 * n {
        return Err(Error::LengthMismatch {
            what: "quantum sequence",
            expected: 2 * n,
            actual: seq.len(),
        });
    }
    if r.len() != 2 * n {
        return Err(Error::LengthMismatch {
            what: "exponent vector",
            expected: 2 * n,
            actual: r.len(),
        });
    }
    if flags.len() != n {
        return Err(Error::LengthMismatch {
            what: "flag vector",
            expected: n,
            actual: flags.len(),
        });
    }
    let particles = seq
        .particles
        .into_iter()
        .enumerate()
        .map(|(i, p)| h_power(coded_numerator(i, n, code, r, flags)).apply(&p))
        .collect();
    Ok(QuantumSequence::new(particles))
}

/// Alice's Step 3 transform. Both tensor halves act on the received
/// particles.
pub fn alice_transform(
    seq: QuantumSequence,
    code: &CodeVector,
    r: &ExponentVector,
    flags: &FlagVector,
) -> Result<QuantumSequence, Error> {
    coded_transform(seq, code, r, flags)
}

/// Bob's Step 5 flag string: the elementwise complement of Alice's.
pub fn derive_flag_b(flags_a: &FlagVector) -> FlagVector {
    FlagVector::new(flags_a.bits().iter().map(|&b| !b).collect())
}

/// Bob's Step 5 transform, symmetric to Alice's with his own parameters.
pub fn bob_transform(
    seq: QuantumSequence,
    code: &CodeVector,
    r: &ExponentVector,
    flags_b: &FlagVector,
) -> Result<QuantumSequence, Error> {
    coded_transform(seq, code, r, flags_b)
}

/// Step 7 public exponents: `r_C = r_A + r_B`, elementwise.
pub fn combine_public_exponents(
    r_a: &ExponentVector,
    r_b: &ExponentVector,
) -> Result<ExponentVector, Error> {
    if r_a.len() != r_b.len() {
        return Err(Error::LengthMismatch {
            what: "exponent vector",
            expected: r_a.len(),
            actual: r_b.len(),
        });
    }
    ExponentVector::new(
        r_a.values()
            .iter()
            .zip(r_b.values())
            .map(|(&a, &b)| a + b)
            .collect(),
    )
}

/// Calvin's Step 7 unmasking: applies `H^(r_C)` (numerator `3 r_C`) at each
/// position. With honest inputs the composed gate at position `i <= n`
/// collapses to `H^((c_A + c_B) mod 2)` and at `n + i` to
/// `H^((h_A c_A + h_B c_B) mod 2)`.
pub fn calvin_finalize(
    seq: QuantumSequence,
    r_c: &ExponentVector,
) -> Result<QuantumSequence, Error> {
    if seq.len() != r_c.len() {
        return Err(Error::LengthMismatch {
            what: "public exponent vector",
            expected: seq.len(),
            actual: r_c.len(),
        });
    }
    let particles = seq
        .particles
        .into_iter()
        .zip(r_c.values())
        .map(|(p, &r)| h_power(ThirdExponent::from_integer(i64::from(r))).apply(&p))
        .collect();
    Ok(QuantumSequence::new(particles))
}

/// Per-position equality verdicts (length `2n`, transit order).
///
/// In `Exact` mode only the first replica is consulted and verdicts come from
/// state-vector comparison up to global phase. In `Sampled` mode the first
/// `repetitions` replicas are each measured once per position in their own
/// preparation basis; a position is equal iff every outcome matches.
pub fn equality_verdicts(
    replicas: &[ComparisonReplica],
    mode: &CompareMode,
    rng: &mut SeededRng,
) -> Vec<bool> {
    assert!(!replicas.is_empty(), "at least one replica required");
    let len = replicas[0].prep_labels.len();
    for r in replicas {
        assert_eq!(r.prep_labels.len(), len, "replica length mismatch");
        assert_eq!(r.finalized.len(), len, "replica length mismatch");
    }
    match mode {
        CompareMode::Exact { tol } => {
            let r = &replicas[0];
            (0..len)
                .map(|i| {
                    equal_up_to_global_phase(
                        &canonical_state(r.prep_labels[i]),
                        &r.finalized.particles()[i],
                        *tol,
                    )
                })
                .collect()
        }
        CompareMode::Sampled { repetitions } => {
            let k = (*repetitions).max(1).min(replicas.len());
            (0..len)
                .map(|i| {
                    replicas[..k].iter().all(|r| {
                        let label = r.prep_labels[i];
                        let (outcome, _) =
                            measure(&r.finalized.particles()[i], label.basis(), rng);
                        outcome == label
                    })
                })
                .collect()
        }
    }
}

/// Step 7 announcement rule: position `i <= n` (1-based) is published iff its
/// first-register particle is equal and its second-register partner is not.
pub fn announcement_from_verdicts(verdicts: &[bool]) -> Announcement {
    let n = verdicts.len() / 2;
    Announcement::new((0..n).filter(|&i| verdicts[i] && !verdicts[i + n]).map(|i| i + 1))
}

/// Convenience composition of [`equality_verdicts`] and
/// [`announcement_from_verdicts`].
pub fn compare_and_announce(
    replicas: &[ComparisonReplica],
    mode: &CompareMode,
    rng: &mut SeededRng,
) -> Announcement {
    announcement_from_verdicts(&equality_verdicts(replicas, mode, rng))
}

/// Step 8: maps announced positions back to universal-set elements.
pub fn decode_intersection(a: &Announcement, universe: &UniversalSet) -> PrivateSet {
    a.positions()
        .iter()
        .filter(|&&p| p >= 1 && p <= universe.len())
        .map(|&p| universe.elements()[p - 1])
        .collect()
}
