//! Executable attack models: an outside eavesdropper on the quantum
//! channels with detection statistics, and what a curious third party can
//! (and cannot) infer from his own view.
//!
//! Eve cannot tell decoys from payload, so an intercept-measure-resend
//! attack measures every transit particle. Each decoy catches her with
//! probability 1/4 (she picks the conjugate basis half the time, and a
//! conjugate-basis measurement flips the verification outcome half the
//! time), so `l` decoys detect the attack with probability `1 - (3/4)^l`.
//!
//! Other known channel attacks (Trojan-horse, invisible-photon,
//! man-in-the-middle) act below this simulator's abstraction of the quantum
//! channel and are out of scope; the entangling-ancilla participant attack
//! provably yields nothing beyond a global phase, which no measurement can
//! extract, and is represented only by the view-equivalence check.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::harness::{run_session, EvePlan, Party, SessionConfig, SessionOutcome};
use crate::hqpsi::{encode_set, Announcement, CompareMode, PrivateSet, QuantumSequence, UniversalSet};
use crate::qubit::{measure, MeasBasis};
use crate::rng::SeededRng;

/// Which basis Eve measures in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BasisPolicy {
    /// A fresh uniform choice of Z or X per particle.
    #[default]
    RandomZX,
    AlwaysZ,
    AlwaysX,
}

/// Eve's behavior on one channel hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EveStrategy {
    /// No tampering.
    #[default]
    PassThrough,
    /// Measure every particle in the policy's basis and forward the
    /// post-measurement eigenstate.
    InterceptMeasureResend(BasisPolicy),
}

/// The three quantum channel hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hop {
    CalvinToAlice,
    AliceToBob,
    BobToCalvin,
}

impl Hop {
    pub const ALL: [Hop; 3] = [Hop::CalvinToAlice, Hop::AliceToBob, Hop::BobToCalvin];

    /// The protocol step at which this hop's decoys are verified.
    pub fn verify_step(self) -> u8 {
        match self {
            Hop::CalvinToAlice => 2,
            Hop::AliceToBob => 4,
            Hop::BobToCalvin => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Hop::CalvinToAlice => "calvin-alice",
            Hop::AliceToBob => "alice-bob",
            Hop::BobToCalvin => "bob-calvin",
        }
    }
}

/// Applies Eve's strategy to a transit sequence. She sees only the wire, so
/// an intercepting Eve measures every particle, decoy or not.
pub fn eve_intercept(
    transit: QuantumSequence,
    strategy: &EveStrategy,
    rng: &mut SeededRng,
) -> QuantumSequence {
    match strategy {
        EveStrategy::PassThrough => transit,
        EveStrategy::InterceptMeasureResend(policy) => {
            let particles = transit
                .particles()
                .iter()
                .map(|p| {
                    let basis = match policy {
                        BasisPolicy::AlwaysZ => MeasBasis::Z,
                        BasisPolicy::AlwaysX => MeasBasis::X,
                        BasisPolicy::RandomZX => {
                            if rng.random_bool(0.5) {
                                MeasBasis::Z
                            } else {
                                MeasBasis::X
                            }
                        }
                    };
                    measure(p, basis, rng).1
                })
                .collect();
            QuantumSequence::new(particles)
        }
    }
}

/// Probability that `l` decoys catch a full intercept-measure-resend
/// attack: `1 - (3/4)^l`. Each decoy individually detects with probability
/// 1/4, independent of the basis policy, because the decoy preparation is
/// itself uniform over both bases.
pub fn detection_rate_theory(l: usize) -> f64 {
    1.0 - 0.75f64.powi(l as i32)
}

/// Detection statistics over repeated attacked sessions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub trials: usize,
    pub detections: usize,
    pub empirical_rate: f64,
    pub theoretical_rate: f64,
    pub decoys_per_hop: usize,
}

/// Runs `trials` independent single-attempt sessions with Eve on the given
/// hop and counts how many times the verification at that hop fails. Trials
/// run in parallel; each derives its own seed from `rng`, so the report is
/// reproducible.
pub fn run_attack_trials(
    cfg: &SessionConfig,
    strategy: &EveStrategy,
    hop: Hop,
    trials: usize,
    rng: &SeededRng,
) -> Result<AttackReport, Error> {
    let detections: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut trial_cfg = cfg.clone();
            trial_cfg.seed = rng.child(&format!("attack/{trial}")).seed();
            trial_cfg.max_retries = 0;
            let outcome = run_session(&trial_cfg, &EvePlan::on_hop(hop, *strategy))?;
            Ok(matches!(
                outcome,
                SessionOutcome::Aborted { step, .. } if step == hop.verify_step()
            ) as usize)
        })
        .sum::<Result<usize, Error>>()?;

    let theoretical_rate = match strategy {
        EveStrategy::PassThrough => 0.0,
        EveStrategy::InterceptMeasureResend(_) => detection_rate_theory(cfg.decoys_per_hop),
    };
    Ok(AttackReport {
        trials,
        detections,
        empirical_rate: detections as f64 / trials.max(1) as f64,
        theoretical_rate,
        decoys_per_hop: cfg.decoys_per_hop,
    })
}

/// What Calvin can conclude about one universe position from his own view.
/// Deliberately carries no party payload: an `InExactlyOne` position is
/// known to sit in exactly one private set, but never whose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositionKnowledge {
    /// The element is in both private sets (Calvin computed the announcement
    /// himself, so announced positions are known intersections).
    InBoth,
    /// The element is in exactly one private set; which one is unknowable.
    InExactlyOne,
    /// The element is in both sets or in neither; indistinguishable.
    InNeitherOrBoth,
    /// No verdict available for this position.
    Unknown,
}

/// A curious participant's per-position conclusions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceReport {
    pub observer: Party,
    /// Entry `i` describes universe position `i + 1`.
    pub knowledge: Vec<PositionKnowledge>,
}

/// Calvin's best inference from an exact-mode session: a first-register
/// mismatch means the code bits differ, an announced position is a known
/// intersection element, and everything else stays ambiguous.
pub fn curious_calvin_inference(
    first_register_equal: &[bool],
    announcement: &Announcement,
) -> InferenceReport {
    let knowledge = first_register_equal
        .iter()
        .enumerate()
        .map(|(i, &equal)| {
            if !equal {
                PositionKnowledge::InExactlyOne
            } else if announcement.contains(i + 1) {
                PositionKnowledge::InBoth
            } else {
                PositionKnowledge::InNeitherOrBoth
            }
        })
        .collect();
    InferenceReport {
        observer: Party::Calvin,
        knowledge,
    }
}

/// Runs two exact-mode sessions with the same seed, differing only in Bob's
/// set, and checks that Alice's complete received view (transit states,
/// decoy disclosures, announcement) is identical.
///
/// Precondition: both choices of Bob's set share the same intersection
/// positions with Alice's set.
pub fn alice_view_equivalence(
    set_a: &PrivateSet,
    set_b: &PrivateSet,
    set_b_alt: &PrivateSet,
    universe: &UniversalSet,
    seed: u64,
) -> Result<bool, Error> {
    let code_a = encode_set(universe, set_a)?;
    let code_b = encode_set(universe, set_b)?;
    let code_b_alt = encode_set(universe, set_b_alt)?;
    let positions = |code: &crate::hqpsi::CodeVector| -> Vec<usize> {
        (0..universe.len())
            .filter(|&i| code_a.bit(i) && code.bit(i))
            .collect()
    };
    if positions(&code_b) != positions(&code_b_alt) {
        return Err(Error::PreconditionViolated(
            "the two choices of Bob's set intersect Alice's set at different positions".into(),
        ));
    }

    let cfg = |set_b: &PrivateSet| SessionConfig {
        universe: universe.clone(),
        set_a: set_a.clone(),
        set_b: set_b.clone(),
        decoys_per_hop: 8,
        compare_mode: CompareMode::Exact { tol: 1e-9 },
        max_retries: 0,
        exponent_bound: 1024,
        seed,
        replay: None,
    };
    let first = run_session(&cfg(set_b), &EvePlan::none())?;
    let second = run_session(&cfg(set_b_alt), &EvePlan::none())?;
    let (SessionOutcome::Completed { transcript: t1, .. }, SessionOutcome::Completed { transcript: t2, .. }) =
        (&first, &second)
    else {
        return Ok(false);
    };

    let view1 = t1.view_for(Party::Alice);
    let view2 = t2.view_for(Party::Alice);
    Ok(view1.len() == view2.len()
        && view1.iter().zip(&view2).all(|(a, b)| {
            a.attempt == b.attempt && a.step == b.step && a.message == b.message
        }))
}
