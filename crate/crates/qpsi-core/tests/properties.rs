//! Cross-module invariants: gate algebra under random inputs, protocol
//! soundness against the classical oracle (randomized and exhaustive),
//! sampled-mode error statistics, and privacy properties.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use qpsi_core::harness::{classical_oracle, run_session, EvePlan, SessionConfig, SessionOutcome};
use qpsi_core::hqpsi::{
    alice_transform, bob_transform, calvin_finalize, combine_public_exponents,
    compare_and_announce, derive_flag_b, encode_set, insert_decoys, verify_and_strip_decoys,
    CodeVector, CompareMode, ComparisonReplica, ExponentVector, FlagVector, PrivateSet,
    QuantumSequence, UniversalSet,
};
use qpsi_core::qubit::{
    canonical_state, equal_up_to_global_phase, fidelity, h_power, measure, Gate2, MeasBasis,
    PrepLabel, QubitState, ThirdExponent,
};
use qpsi_core::SeededRng;

fn random_unitary(rng: &mut SeededRng) -> Gate2 {
    use std::f64::consts::TAU;
    let theta = rng.random_range(0.0..TAU);
    let phi = rng.random_range(0.0..TAU);
    let lambda = rng.random_range(0.0..TAU);
    let gamma = rng.random_range(0.0..TAU);
    let g = Complex64::from_polar(1.0, gamma);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Gate2 {
        m00: g * c,
        m01: -g * Complex64::from_polar(s, lambda),
        m10: g * Complex64::from_polar(s, phi),
        m11: g * Complex64::from_polar(c, phi + lambda),
    }
}

fn random_state(rng: &mut SeededRng) -> QubitState {
    random_unitary(rng).apply(&canonical_state(PrepLabel::Zero))
}

#[test]
fn apply_preserves_norm_for_random_unitary_state_pairs() {
    let mut rng = SeededRng::new(0x5eed);
    for _ in 0..10_000 {
        let u = random_unitary(&mut rng);
        assert!(u.is_unitary(1e-9));
        let s = random_state(&mut rng);
        let out = u.apply(&s);
        assert!(out.is_normalized(1e-9));
    }
}

#[test]
fn measurement_frequencies_follow_fidelity_probabilities() {
    let samples = 100_000usize;
    let mut rng = SeededRng::new(0xacc);
    for trial in 0..4 {
        let mut state_rng = rng.child(&format!("state{trial}"));
        let state = random_state(&mut state_rng);
        for basis in [MeasBasis::Z, MeasBasis::X] {
            let (first, _) = basis.eigenstates();
            let p = fidelity(&canonical_state(first), &state);
            let hits = (0..samples)
                .filter(|_| measure(&state, basis, &mut rng).0 == first)
                .count();
            let freq = hits as f64 / samples as f64;
            let sigma = (p * (1.0 - p) / samples as f64).sqrt().max(1e-9);
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "basis {basis:?}: frequency {freq} vs probability {p}"
            );
        }
    }
}

proptest! {
    #[test]
    fn h_power_collapses_to_parity(k in -1_000_000i64..1_000_000) {
        let reduced = ThirdExponent::new(k.rem_euclid(2));
        prop_assert!(h_power(ThirdExponent::new(k)).distance(&h_power(reduced)) <= 1e-12);
    }

    #[test]
    fn h_power_is_multiplicative(k in -100_000i64..100_000, j in -100_000i64..100_000) {
        let product = h_power(ThirdExponent::new(k)).mul(&h_power(ThirdExponent::new(j)));
        prop_assert!(product.distance(&h_power(ThirdExponent::new(k + j))) <= 1e-12);
    }

    #[test]
    fn phase_equality_is_an_equivalence_up_to_phase(seed in any::<u64>(), angle in 0.0..std::f64::consts::TAU) {
        let mut rng = SeededRng::new(seed);
        let a = random_state(&mut rng);
        let b = random_state(&mut rng);
        prop_assert!(equal_up_to_global_phase(&a, &a, 1e-9));
        let phase = Complex64::from_polar(1.0, angle);
        let rotated = QubitState::new(a.a0 * phase, a.a1 * phase);
        prop_assert!(equal_up_to_global_phase(&a, &rotated, 1e-9));
        prop_assert_eq!(
            equal_up_to_global_phase(&a, &b, 1e-9),
            equal_up_to_global_phase(&b, &a, 1e-9)
        );
    }

    #[test]
    fn decoy_round_trip_over_untampered_channel(seed in any::<u64>(), n in 1usize..8, l in 0usize..24) {
        let mut rng = SeededRng::new(seed);
        let labels: Vec<PrepLabel> = (0..2 * n).map(|_| PrepLabel::sample(&mut rng)).collect();
        let seq = QuantumSequence::from_labels(&labels);
        let (transit, records) = insert_decoys(seq.clone(), l, &mut rng);
        prop_assert_eq!(transit.len(), 2 * n + l);
        let stripped = verify_and_strip_decoys(transit, &records, &mut rng).unwrap();
        prop_assert_eq!(stripped, seq);
    }

    #[test]
    fn flag_derivation_is_an_involution(bits in proptest::collection::vec(any::<bool>(), 1..32)) {
        let flags = FlagVector::new(bits);
        prop_assert_eq!(derive_flag_b(&derive_flag_b(&flags)), flags);
    }
}

/// The composed per-position gate over a full honest pipeline: Alice, Bob,
/// then Calvin's unmasking, for one first-register and one second-register
/// position.
#[test]
fn parity_algebra_for_all_codes_flags_and_random_exponents() {
    let mut rng = SeededRng::new(0xa1);
    for c_a in [false, true] {
        for c_b in [false, true] {
            for h_a in [false, true] {
                let h_b = !h_a;
                for _ in 0..100 {
                    let r_a = rng.random_range(1..=1024i64);
                    let r_b = rng.random_range(1..=1024i64);

                    // First register.
                    let composed = h_power(ThirdExponent::from_integer(r_a + r_b))
                        .mul(&h_power(ThirdExponent::new(i64::from(c_b) + 2 + 3 * r_b)))
                        .mul(&h_power(ThirdExponent::new(i64::from(c_a) + 2 + 3 * r_a)));
                    let parity = (i64::from(c_a) + i64::from(c_b)) % 2;
                    assert!(composed.distance(&h_power(ThirdExponent::new(parity))) <= 1e-9);

                    // Second register gates the code bits through the flags.
                    let g_a = i64::from(h_a && c_a);
                    let g_b = i64::from(h_b && c_b);
                    let composed = h_power(ThirdExponent::from_integer(r_a + r_b))
                        .mul(&h_power(ThirdExponent::new(g_b + 2 + 3 * r_b)))
                        .mul(&h_power(ThirdExponent::new(g_a + 2 + 3 * r_a)));
                    let parity = (g_a + g_b) % 2;
                    assert!(composed.distance(&h_power(ThirdExponent::new(parity))) <= 1e-9);
                }
            }
        }
    }
}

fn subsets_of(elements: &[u64]) -> Vec<PrivateSet> {
    let n = elements.len();
    (0..(1usize << n))
        .map(|mask| {
            elements
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &e)| e)
                .collect()
        })
        .collect()
}

#[test]
fn exhaustive_oracle_equivalence_for_all_code_pairs_n4() {
    let universe = UniversalSet::new(vec![11, 22, 33, 44]).unwrap();
    let subsets = subsets_of(universe.elements());
    let mut checked = 0;
    for set_a in &subsets {
        for set_b in &subsets {
            let mut cfg =
                SessionConfig::new(universe.clone(), set_a.clone(), set_b.clone(), 0xc0de);
            cfg.decoys_per_hop = 2;
            let outcome = run_session(&cfg, &EvePlan::none()).unwrap();
            let SessionOutcome::Completed { intersection, .. } = outcome else {
                panic!("honest session must complete");
            };
            assert_eq!(intersection, classical_oracle(set_a, set_b));
            checked += 1;
        }
    }
    assert_eq!(checked, 256);
}

#[test]
fn randomized_oracle_equivalence_up_to_n16() {
    let root = SeededRng::new(0xfeed);
    for trial in 0..100 {
        let mut rng = root.child(&format!("t{trial}"));
        let n = rng.random_range(1..=16usize);
        let mut elements: Vec<u64> = Vec::new();
        while elements.len() < n {
            let e = rng.random_range(0..1000u64);
            if !elements.contains(&e) {
                elements.push(e);
            }
        }
        let universe = UniversalSet::new(elements.clone()).unwrap();
        let pick = |rng: &mut SeededRng| -> PrivateSet {
            elements.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
        };
        let set_a = pick(&mut rng);
        let set_b = pick(&mut rng);
        let cfg = SessionConfig::new(universe, set_a.clone(), set_b.clone(), rng.seed());
        let SessionOutcome::Completed { intersection, .. } =
            run_session(&cfg, &EvePlan::none()).unwrap()
        else {
            panic!("honest session must complete");
        };
        assert_eq!(intersection, classical_oracle(&set_a, &set_b));
    }
}

/// Sampled-mode comparison bounds, exercised directly on the comparator:
/// a truly-equal position is never flagged unequal, and a position differing
/// by one Hadamard is missed with probability `2^-k`.
#[test]
fn sampled_mode_error_bounds() {
    let k = 3usize;
    let trials = 10_000usize;
    let mut rng = SeededRng::new(0x5a);
    let mut missed = 0usize;
    for _ in 0..trials {
        let replicas: Vec<ComparisonReplica> = (0..k)
            .map(|_| {
                let label = PrepLabel::sample(&mut rng);
                let changed = Gate2::hadamard().apply(&canonical_state(label));
                ComparisonReplica {
                    prep_labels: vec![label, label],
                    finalized: QuantumSequence::new(vec![canonical_state(label), changed]),
                }
            })
            .collect();
        let announcement = compare_and_announce(
            &replicas,
            &CompareMode::Sampled { repetitions: k },
            &mut rng,
        );
        // Position 1 is truly equal, its partner truly unequal: announced
        // unless every one of the k partner measurements happened to match.
        if !announcement.contains(1) {
            missed += 1;
        }
    }
    let p = 0.5f64.powi(k as i32);
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let freq = missed as f64 / trials as f64;
    assert!(
        (freq - p).abs() <= 3.0 * sigma,
        "miss frequency {freq} vs 2^-{k} = {p}"
    );
}

#[test]
fn sampled_mode_never_flags_equal_positions() {
    let mut rng = SeededRng::new(0x5b);
    for _ in 0..2000 {
        let label = PrepLabel::sample(&mut rng);
        let replicas: Vec<ComparisonReplica> = (0..10)
            .map(|_| ComparisonReplica {
                prep_labels: vec![label, label],
                finalized: QuantumSequence::new(vec![
                    canonical_state(label),
                    canonical_state(label),
                ]),
            })
            .collect();
        let announcement = compare_and_announce(
            &replicas,
            &CompareMode::Sampled { repetitions: 10 },
            &mut rng,
        );
        assert!(
            announcement.is_empty(),
            "an equal pair of registers must never be announced"
        );
    }
}

/// Exact-mode announcements depend only on the intersection positions: the
/// full pipeline run with two different Bob sets sharing the same agreement
/// pattern yields bit-identical announcements.
#[test]
fn announcements_are_view_equivalent_for_matching_intersections() {
    let universe = UniversalSet::new(vec![1, 2, 3, 4, 5, 6]).unwrap();
    let set_a = PrivateSet::new([1, 2, 3]);
    let set_b = PrivateSet::new([2, 4]);
    let set_b_alt = PrivateSet::new([2, 5, 6]);

    let announce = |set_b: &PrivateSet, seed: u64| {
        let code_a = encode_set(&universe, &set_a).unwrap();
        let code_b = encode_set(&universe, set_b).unwrap();
        let mut rng = SeededRng::new(seed);
        let labels: Vec<PrepLabel> = (0..12).map(|_| PrepLabel::sample(&mut rng)).collect();
        let r_a = ExponentVector::sample(12, 1024, &mut rng);
        let r_b = ExponentVector::sample(12, 1024, &mut rng);
        let flags_a = FlagVector::sample(6, &mut rng);
        let p_a = alice_transform(QuantumSequence::from_labels(&labels), &code_a, &r_a, &flags_a)
            .unwrap();
        let p_b = bob_transform(p_a, &code_b, &r_b, &derive_flag_b(&flags_a)).unwrap();
        let finalized =
            calvin_finalize(p_b, &combine_public_exponents(&r_a, &r_b).unwrap()).unwrap();
        compare_and_announce(
            &[ComparisonReplica {
                prep_labels: labels,
                finalized,
            }],
            &CompareMode::Exact { tol: 1e-9 },
            &mut rng,
        )
    };

    for seed in 0..20 {
        assert_eq!(announce(&set_b, seed), announce(&set_b_alt, seed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codes_determine_announcements(seed in any::<u64>(), mask_a in 0u16..256, mask_b in 0u16..256) {
        // Brute-force oracle: announced positions are exactly the common
        // one-bits of the two code vectors.
        let elements: Vec<u64> = (0..8u64).map(|i| i * 7 + 1).collect();
        let universe = UniversalSet::new(elements.clone()).unwrap();
        let from_mask = |mask: u16| -> PrivateSet {
            elements.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e).collect()
        };
        let set_a = from_mask(mask_a);
        let set_b = from_mask(mask_b);
        let mut cfg = SessionConfig::new(universe, set_a.clone(), set_b.clone(), seed);
        cfg.decoys_per_hop = 1;
        let outcome = run_session(&cfg, &EvePlan::none()).unwrap();
        let SessionOutcome::Completed { intersection, .. } = outcome else {
            panic!("honest session must complete");
        };
        prop_assert_eq!(intersection, classical_oracle(&set_a, &set_b));
    }

    #[test]
    fn coded_gates_keep_states_normalized(seed in any::<u64>(), mask in 0u16..256) {
        let mut rng = SeededRng::new(seed);
        let code = CodeVector::new((0..8).map(|i| mask & (1 << i) != 0).collect());
        let labels: Vec<PrepLabel> = (0..16).map(|_| PrepLabel::sample(&mut rng)).collect();
        let r = ExponentVector::sample(16, 1024, &mut rng);
        let flags = FlagVector::sample(8, &mut rng);
        let out = alice_transform(QuantumSequence::from_labels(&labels), &code, &r, &flags).unwrap();
        for p in out.particles() {
            prop_assert!(p.is_normalized(1e-9));
        }
    }
}
