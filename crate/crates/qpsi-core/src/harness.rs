//! Session orchestration: the Step 1-8 wiring between Calvin, Alice, and
//! Bob, channel tamper hooks, decoy-failure retry policy, transcript
//! recording, and the Monte Carlo trial runner.
//!
//! Quantum sequences are moved from hop to hop, never copied by party logic;
//! once a sequence is sent the sender has no handle to it. The transcript
//! keeps its own snapshots for evidence.
//!
//! A session is single-threaded and fully determined by its
//! [`SessionConfig`] (including the seed). Monte Carlo trials run in
//! parallel; every trial derives its own child seed, so the summary does not
//! depend on scheduling.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::{eve_intercept, EveStrategy, Hop};
use crate::error::{DetectionFailure, Error};
use crate::hqpsi::{
    alice_transform, announcement_from_verdicts, bob_transform, calvin_finalize,
    combine_public_exponents, decode_intersection, derive_flag_b, encode_set, equality_verdicts,
    insert_decoys, prepare_initial_sequence, verify_and_strip_decoys, Announcement, CodeVector,
    CompareMode, ComparisonReplica, DecoyRecord, ExponentVector, FlagVector, PrivateSet,
    QuantumSequence, UniversalSet,
};
use crate::qubit::PrepLabel;
use crate::rng::{stable_hash64, SeededRng};

/// The three protocol participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
    Calvin,
}

/// A message on the simulated channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Payload {
    QuantumTransit(QuantumSequence),
    DecoyDisclosure(Vec<DecoyRecord>),
    ClassicalExponents(ExponentVector),
    FlagDisclosure(FlagVector),
    Announcement(Announcement),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::QuantumTransit(_) => "quantum_transit",
            Payload::DecoyDisclosure(_) => "decoy_disclosure",
            Payload::ClassicalExponents(_) => "classical_exponents",
            Payload::FlagDisclosure(_) => "flag_disclosure",
            Payload::Announcement(_) => "announcement",
        }
    }

    /// Stable 64-bit digest of the payload content, so transcripts are
    /// diffable without embedding full state vectors.
    pub fn digest(&self) -> u64 {
        let bytes = serde_json::to_vec(self).expect("payloads serialize");
        stable_hash64(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub from: Party,
    pub to: Party,
    pub payload: Payload,
}

/// One recorded message: which attempt it belongs to (retries and sampled-
/// mode replicas both advance the attempt counter) and its protocol step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub attempt: u32,
    pub step: u8,
    pub message: Message,
}

/// Ordered record of every message of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub session_id: String,
    pub seed: u64,
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    fn new(session_id: String, seed: u64) -> Self {
        Self {
            session_id,
            seed,
            entries: Vec::new(),
        }
    }

    fn record(&mut self, attempt: u32, step: u8, message: Message) {
        debug_assert!(
            Self::payload_legal_at_step(step, &message.payload),
            "{} is not a legal payload at step {step}",
            message.payload.kind()
        );
        self.entries.push(TranscriptEntry {
            attempt,
            step,
            message,
        });
    }

    fn payload_legal_at_step(step: u8, payload: &Payload) -> bool {
        match payload {
            Payload::QuantumTransit(_) => matches!(step, 1 | 3 | 5),
            Payload::DecoyDisclosure(_) => matches!(step, 2 | 4 | 6),
            Payload::FlagDisclosure(_) => step == 3,
            Payload::ClassicalExponents(_) | Payload::Announcement(_) => step == 7,
        }
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    /// The messages a party received, in order: that party's view of the
    /// channel.
    pub fn view_for(&self, party: Party) -> Vec<&TranscriptEntry> {
        self.entries.iter().filter(|e| e.message.to == party).collect()
    }

    /// Structured export with one row per message. By default each payload
    /// appears only as a kind and stable digest; `verbose` embeds the full
    /// payload (including state vectors).
    pub fn export(&self, outcome: serde_json::Value, verbose: bool) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                let mut row = json!({
                    "attempt": e.attempt,
                    "step": e.step,
                    "from": e.message.from,
                    "to": e.message.to,
                    "payload_kind": e.message.payload.kind(),
                    "payload_digest": format!("{:016x}", e.message.payload.digest()),
                });
                if verbose {
                    row["payload"] =
                        serde_json::to_value(&e.message.payload).expect("payloads serialize");
                }
                row
            })
            .collect();
        json!({
            "session_id": self.session_id,
            "seed": self.seed,
            "steps": steps,
            "outcome": outcome,
        })
    }
}

/// Fixed inputs for replaying a known session: Calvin's preparation labels
/// and the parties' randomness. Decoy choices stay random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayInputs {
    pub prep_labels: Vec<PrepLabel>,
    pub r_a: Vec<u32>,
    pub r_b: Vec<u32>,
    pub flags_a: Vec<bool>,
}

/// Everything that determines a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionConfig {
    pub universe: UniversalSet,
    pub set_a: PrivateSet,
    pub set_b: PrivateSet,
    pub decoys_per_hop: usize,
    pub compare_mode: CompareMode,
    pub max_retries: u32,
    pub exponent_bound: u32,
    pub seed: u64,
    pub replay: Option<ReplayInputs>,
}

impl SessionConfig {
    /// A config with the default knobs: 16 decoys per hop, exact comparison,
    /// 3 retries, exponents in `[1, 1024]`.
    pub fn new(universe: UniversalSet, set_a: PrivateSet, set_b: PrivateSet, seed: u64) -> Self {
        Self {
            universe,
            set_a,
            set_b,
            decoys_per_hop: 16,
            compare_mode: CompareMode::default(),
            max_retries: 3,
            exponent_bound: 1024,
            seed,
            replay: None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.exponent_bound < 2 {
            return Err(Error::PreconditionViolated(
                "exponent_bound must be at least 2".into(),
            ));
        }
        if let Some(replay) = &self.replay {
            let n = self.universe.len();
            for (what, actual, expected) in [
                ("replay prep labels", replay.prep_labels.len(), 2 * n),
                ("replay r_a", replay.r_a.len(), 2 * n),
                ("replay r_b", replay.r_b.len(), 2 * n),
                ("replay flags_a", replay.flags_a.len(), n),
            ] {
                if actual != expected {
                    return Err(Error::LengthMismatch {
                        what,
                        expected,
                        actual,
                    });
                }
            }
            if replay.r_a.iter().chain(&replay.r_b).any(|&r| r == 0) {
                return Err(Error::NonPositiveExponent);
            }
        }
        Ok(())
    }

    /// Stable identifier derived from the whole config.
    pub fn session_id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        format!("{:016x}", stable_hash64(&bytes))
    }
}

/// Per-hop channel tampering. Defaults to an untampered channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvePlan {
    pub calvin_to_alice: EveStrategy,
    pub alice_to_bob: EveStrategy,
    pub bob_to_calvin: EveStrategy,
}

impl EvePlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn on_hop(hop: Hop, strategy: EveStrategy) -> Self {
        let mut plan = Self::default();
        match hop {
            Hop::CalvinToAlice => plan.calvin_to_alice = strategy,
            Hop::AliceToBob => plan.alice_to_bob = strategy,
            Hop::BobToCalvin => plan.bob_to_calvin = strategy,
        }
        plan
    }

    fn for_hop(&self, hop: Hop) -> &EveStrategy {
        match hop {
            Hop::CalvinToAlice => &self.calvin_to_alice,
            Hop::AliceToBob => &self.alice_to_bob,
            Hop::BobToCalvin => &self.bob_to_calvin,
        }
    }
}

/// Final result of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SessionOutcome {
    Completed {
        intersection: PrivateSet,
        /// Per-position equality verdicts (length `2n`, transit order).
        equality: Vec<bool>,
        transcript: Transcript,
    },
    Aborted {
        step: u8,
        reason: String,
        retries_used: u32,
    },
}

impl SessionOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, SessionOutcome::Completed { .. })
    }

    pub fn summary_json(&self) -> serde_json::Value {
        match self {
            SessionOutcome::Completed { intersection, .. } => json!({
                "kind": "completed",
                "intersection": intersection.iter().collect::<Vec<u64>>(),
            }),
            SessionOutcome::Aborted {
                step,
                reason,
                retries_used,
            } => json!({
                "kind": "aborted",
                "step": step,
                "reason": reason,
                "retries_used": retries_used,
            }),
        }
    }
}

enum AttemptError {
    Detection { step: u8, failure: DetectionFailure },
    Fatal(Error),
}

/// Exact intersection by direct element comparison: the ground truth the
/// protocol is checked against.
pub fn classical_oracle(set_a: &PrivateSet, set_b: &PrivateSet) -> PrivateSet {
    set_a.intersection(set_b)
}

/// Runs the full protocol. On a decoy verification failure the session
/// restarts from Step 1 with fresh randomness, up to `max_retries` times;
/// after that it aborts at the failing step. In sampled comparison mode,
/// Steps 1-7 run once per repetition (fresh preparations, same code vectors)
/// and Calvin compares across all replicas.
pub fn run_session(cfg: &SessionConfig, eve: &EvePlan) -> Result<SessionOutcome, Error> {
    cfg.validate()?;
    let code_a = encode_set(&cfg.universe, &cfg.set_a)?;
    let code_b = encode_set(&cfg.universe, &cfg.set_b)?;
    let n = cfg.universe.len();
    let root = SeededRng::new(cfg.seed);
    let mut transcript = Transcript::new(cfg.session_id(), cfg.seed);

    let replicas_needed = match cfg.compare_mode {
        CompareMode::Exact { .. } => 1,
        CompareMode::Sampled { repetitions } => repetitions.max(1),
    };

    let mut replicas: Vec<ComparisonReplica> = Vec::with_capacity(replicas_needed);
    let mut retries_used = 0u32;
    let mut attempt = 0u32;
    while replicas.len() < replicas_needed {
        attempt += 1;
        match run_attempt(cfg, eve, &root, attempt, n, &code_a, &code_b, &mut transcript) {
            Ok(replica) => replicas.push(replica),
            Err(AttemptError::Fatal(e)) => return Err(e),
            Err(AttemptError::Detection { step, failure }) => {
                if retries_used >= cfg.max_retries {
                    return Ok(SessionOutcome::Aborted {
                        step,
                        reason: failure.to_string(),
                        retries_used,
                    });
                }
                retries_used += 1;
            }
        }
    }

    let mut compare_rng = root.child("compare");
    let equality = equality_verdicts(&replicas, &cfg.compare_mode, &mut compare_rng);
    let announcement = announcement_from_verdicts(&equality);
    for to in [Party::Alice, Party::Bob] {
        transcript.record(
            attempt,
            7,
            Message {
                from: Party::Calvin,
                to,
                payload: Payload::Announcement(announcement.clone()),
            },
        );
    }
    let intersection = decode_intersection(&announcement, &cfg.universe);
    Ok(SessionOutcome::Completed {
        intersection,
        equality,
        transcript,
    })
}

/// One pass of Steps 1-7 (without the announcement): returns what Calvin
/// needs for comparison.
#[allow(clippy::too_many_arguments)]
fn run_attempt(
    cfg: &SessionConfig,
    eve: &EvePlan,
    root: &SeededRng,
    attempt: u32,
    n: usize,
    code_a: &CodeVector,
    code_b: &CodeVector,
    transcript: &mut Transcript,
) -> Result<ComparisonReplica, AttemptError> {
    let mut calvin_rng = root.child(&format!("attempt{attempt}/calvin"));
    let mut alice_rng = root.child(&format!("attempt{attempt}/alice"));
    let mut bob_rng = root.child(&format!("attempt{attempt}/bob"));

    // Step 1: Calvin prepares 2n particles (or replays pinned labels).
    let (sequence, labels) = match &cfg.replay {
        Some(replay) => (
            QuantumSequence::from_labels(&replay.prep_labels),
            replay.prep_labels.clone(),
        ),
        None => prepare_initial_sequence(n, &mut calvin_rng),
    };

    // Steps 1-2: Calvin -> Alice.
    let received = quantum_hop(
        cfg,
        eve,
        root,
        attempt,
        Hop::CalvinToAlice,
        sequence,
        &mut calvin_rng,
        &mut alice_rng,
        transcript,
    )?;

    // Step 3: Alice's randomness and transform; she discloses her flags to
    // Bob alongside the transit.
    let (r_a, flags_a) = match &cfg.replay {
        Some(replay) => (
            ExponentVector::new(replay.r_a.clone()).map_err(AttemptError::Fatal)?,
            FlagVector::new(replay.flags_a.clone()),
        ),
        None => (
            ExponentVector::sample(2 * n, cfg.exponent_bound, &mut alice_rng),
            FlagVector::sample(n, &mut alice_rng),
        ),
    };
    let p_a = alice_transform(received, code_a, &r_a, &flags_a).map_err(AttemptError::Fatal)?;
    transcript.record(
        attempt,
        3,
        Message {
            from: Party::Alice,
            to: Party::Bob,
            payload: Payload::FlagDisclosure(flags_a.clone()),
        },
    );

    // Steps 3-4: Alice -> Bob.
    let received = quantum_hop(
        cfg,
        eve,
        root,
        attempt,
        Hop::AliceToBob,
        p_a,
        &mut alice_rng,
        &mut bob_rng,
        transcript,
    )?;

    // Step 5: Bob derives his flags and transforms.
    let r_b = match &cfg.replay {
        Some(replay) => ExponentVector::new(replay.r_b.clone()).map_err(AttemptError::Fatal)?,
        None => ExponentVector::sample(2 * n, cfg.exponent_bound, &mut bob_rng),
    };
    let flags_b = derive_flag_b(&flags_a);
    let p_b = bob_transform(received, code_b, &r_b, &flags_b).map_err(AttemptError::Fatal)?;

    // Steps 5-6: Bob -> Calvin.
    let received = quantum_hop(
        cfg,
        eve,
        root,
        attempt,
        Hop::BobToCalvin,
        p_b,
        &mut bob_rng,
        &mut calvin_rng,
        transcript,
    )?;

    // Step 7: public exponents and Calvin's unmasking.
    for (from, vector) in [(Party::Alice, &r_a), (Party::Bob, &r_b)] {
        transcript.record(
            attempt,
            7,
            Message {
                from,
                to: Party::Calvin,
                payload: Payload::ClassicalExponents(vector.clone()),
            },
        );
    }
    let r_c = combine_public_exponents(&r_a, &r_b).map_err(AttemptError::Fatal)?;
    let finalized = calvin_finalize(received, &r_c).map_err(AttemptError::Fatal)?;

    Ok(ComparisonReplica {
        prep_labels: labels,
        finalized,
    })
}

/// One quantum hop: decoy insertion by the sender, optional tampering on the
/// channel, transit and disclosure recording, then verification and
/// stripping by the receiver.
#[allow(clippy::too_many_arguments)]
fn quantum_hop(
    cfg: &SessionConfig,
    eve: &EvePlan,
    root: &SeededRng,
    attempt: u32,
    hop: Hop,
    payload: QuantumSequence,
    sender_rng: &mut SeededRng,
    receiver_rng: &mut SeededRng,
    transcript: &mut Transcript,
) -> Result<QuantumSequence, AttemptError> {
    let (from, to, send_step, verify_step) = match hop {
        Hop::CalvinToAlice => (Party::Calvin, Party::Alice, 1, 2),
        Hop::AliceToBob => (Party::Alice, Party::Bob, 3, 4),
        Hop::BobToCalvin => (Party::Bob, Party::Calvin, 5, 6),
    };
    let (transit, records) = insert_decoys(payload, cfg.decoys_per_hop, sender_rng);
    let mut eve_rng = root.child(&format!("attempt{attempt}/eve/{}", hop.label()));
    let delivered = eve_intercept(transit, eve.for_hop(hop), &mut eve_rng);

    transcript.record(
        attempt,
        send_step,
        Message {
            from,
            to,
            payload: Payload::QuantumTransit(delivered.clone()),
        },
    );
    transcript.record(
        attempt,
        verify_step,
        Message {
            from,
            to,
            payload: Payload::DecoyDisclosure(records.clone()),
        },
    );

    verify_and_strip_decoys(delivered, &records, receiver_rng).map_err(|failure| {
        AttemptError::Detection {
            step: verify_step,
            failure,
        }
    })
}

/// Bounds on randomly generated problem instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SetGenPolicy {
    pub min_n: usize,
    pub max_n: usize,
}

impl SetGenPolicy {
    /// Universe sizes from 1 up to `max_n`; degenerate empty universes are
    /// never generated.
    pub fn up_to(max_n: usize) -> Self {
        Self {
            min_n: 1,
            max_n: max_n.max(1),
        }
    }

    /// Draws a random instance: a universe of distinct labels and two
    /// independent uniform subsets.
    pub fn sample_instance(&self, rng: &mut SeededRng) -> (UniversalSet, PrivateSet, PrivateSet) {
        let n = rng.random_range(self.min_n.max(1)..=self.max_n.max(1));
        let mut elements = std::collections::BTreeSet::new();
        while elements.len() < n {
            elements.insert(rng.random_range(0..10_000u64));
        }
        let elements: Vec<u64> = elements.into_iter().collect();
        let universe = UniversalSet::new(elements.clone()).expect("distinct by construction");
        let pick = |rng: &mut SeededRng| -> PrivateSet {
            elements.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
        };
        let set_a = pick(rng);
        let set_b = pick(rng);
        (universe, set_a, set_b)
    }
}

/// Knobs for the oracle-equivalence trial runner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloOptions {
    pub trials: usize,
    pub policy: SetGenPolicy,
    pub decoys_per_hop: usize,
    pub compare_mode: CompareMode,
    pub exponent_bound: u32,
    pub max_retries: u32,
    pub seed: u64,
}

impl MonteCarloOptions {
    pub fn new(trials: usize, max_n: usize, seed: u64) -> Self {
        Self {
            trials,
            policy: SetGenPolicy::up_to(max_n),
            decoys_per_hop: 4,
            compare_mode: CompareMode::default(),
            exponent_bound: 1024,
            max_retries: 3,
            seed,
        }
    }
}

/// A trial whose announced intersection differed from the classical oracle,
/// with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialMismatch {
    pub trial: usize,
    pub seed: u64,
    pub expected: Vec<u64>,
    pub actual: Vec<u64>,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub matches: usize,
    pub mismatches: Vec<TrialMismatch>,
    /// Total intersection elements expected across all trials.
    pub intersection_elements: usize,
    /// Expected elements missing from announcements (sampled-mode misses).
    pub false_negatives: usize,
    /// Announced elements outside the true intersection.
    pub false_positives: usize,
    pub elapsed_ms: u64,
}

/// Runs `trials` independent sessions against the classical oracle. Each
/// trial derives a child seed from the base seed, samples an instance per
/// the policy, runs the protocol, and compares. Trials run in parallel; the
/// merged summary is order-independent.
pub fn run_monte_carlo(opts: &MonteCarloOptions) -> Result<MonteCarloSummary, Error> {
    let start = Instant::now();
    let base = SeededRng::new(opts.seed);

    struct TrialResult {
        trial: usize,
        seed: u64,
        expected: PrivateSet,
        actual: Option<PrivateSet>,
    }

    let results: Result<Vec<TrialResult>, Error> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = base.child(&format!("mc/{trial}")).seed();
            let mut gen_rng = SeededRng::new(trial_seed).child("gen");
            let (universe, set_a, set_b) = opts.policy.sample_instance(&mut gen_rng);
            let expected = classical_oracle(&set_a, &set_b);
            let cfg = SessionConfig {
                universe,
                set_a,
                set_b,
                decoys_per_hop: opts.decoys_per_hop,
                compare_mode: opts.compare_mode,
                max_retries: opts.max_retries,
                exponent_bound: opts.exponent_bound,
                seed: trial_seed,
                replay: None,
            };
            let outcome = run_session(&cfg, &EvePlan::none())?;
            let actual = match outcome {
                SessionOutcome::Completed { intersection, .. } => Some(intersection),
                SessionOutcome::Aborted { .. } => None,
            };
            Ok(TrialResult {
                trial,
                seed: trial_seed,
                expected,
                actual,
            })
        })
        .collect();

    let mut summary = MonteCarloSummary {
        trials: opts.trials,
        matches: 0,
        mismatches: Vec::new(),
        intersection_elements: 0,
        false_negatives: 0,
        false_positives: 0,
        elapsed_ms: 0,
    };
    for result in results? {
        summary.intersection_elements += result.expected.len();
        match &result.actual {
            Some(actual) if *actual == result.expected => summary.matches += 1,
            _ => {
                let actual = result.actual.clone().unwrap_or_default();
                summary.false_negatives += result.expected.difference(&actual).len();
                summary.false_positives += actual.difference(&result.expected).len();
                summary.mismatches.push(TrialMismatch {
                    trial: result.trial,
                    seed: result.seed,
                    expected: result.expected.iter().collect(),
                    actual: actual.iter().collect(),
                    aborted: result.actual.is_none(),
                });
            }
        }
    }
    summary.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(summary)
}
