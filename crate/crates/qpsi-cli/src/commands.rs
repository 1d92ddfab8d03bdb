//! One function per subcommand. Each returns the JSON report plus the exit
//! code; human-readable summaries go to stderr so stdout stays a clean,
//! byte-stable report stream.

use serde_json::json;

use qpsi_core::adversary::{run_attack_trials, BasisPolicy, EveStrategy, Hop};
use qpsi_core::demo;
use qpsi_core::harness::{
    run_monte_carlo, EvePlan, MonteCarloOptions, SessionConfig, SessionOutcome, SetGenPolicy,
};
use qpsi_core::hqpsi::{
    alice_transform, announcement_from_verdicts, bob_transform, calvin_finalize,
    combine_public_exponents, decode_intersection, derive_flag_b, encode_set, equality_verdicts,
    CompareMode, ComparisonReplica, PrivateSet, QuantumSequence, UniversalSet,
};
use qpsi_core::nqpsi::{leakage_attack, nqpsi_run, VerdictSign};
use qpsi_core::qubit::{
    canonical_state, fidelity, h_power, h_power_spectral, hadamard_eigensystem, Gate2,
    ThirdExponent,
};
use qpsi_core::SeededRng;

use crate::input::{
    load_config_file, parse_elements_arg, seed_from_env, CliFailure, ConfigFile,
};
use crate::report::Report;
use crate::{
    exit_code, AttackArgs, HopArg, ModeArg, MonteCarloArgs, RunArgs, StrategyArg, VerifyGatesArgs,
    VulnArgs,
};

type CommandResult = Result<(Report, i32), CliFailure>;

fn usage(message: impl Into<String>) -> CliFailure {
    crate::input::usage(message)
}

fn hop_of(arg: HopArg) -> Hop {
    match arg {
        HopArg::CalvinAlice => Hop::CalvinToAlice,
        HopArg::AliceBob => Hop::AliceToBob,
        HopArg::BobCalvin => Hop::BobToCalvin,
    }
}

fn strategy_of(arg: StrategyArg) -> EveStrategy {
    match arg {
        StrategyArg::Passthrough => EveStrategy::PassThrough,
        StrategyArg::Intercept => EveStrategy::InterceptMeasureResend(BasisPolicy::RandomZX),
        StrategyArg::InterceptZ => EveStrategy::InterceptMeasureResend(BasisPolicy::AlwaysZ),
        StrategyArg::InterceptX => EveStrategy::InterceptMeasureResend(BasisPolicy::AlwaysX),
    }
}

pub fn cmd_run(args: &RunArgs) -> CommandResult {
    let file_cfg = match &args.config {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };

    let resolve_elements = |flag: &Option<String>,
                            file: &Option<crate::input::ElementList>,
                            name: &str|
     -> Result<Vec<u64>, CliFailure> {
        match (flag, file) {
            (Some(value), _) => parse_elements_arg(value),
            (None, Some(list)) => list.resolve().map_err(usage),
            (None, None) => Err(usage(format!("--{name} is required (flag or config file)"))),
        }
    };

    let universe_elements = resolve_elements(&args.universe, &file_cfg.universe, "universe")?;
    let set_a_elements = resolve_elements(&args.set_a, &file_cfg.set_a, "set-a")?;
    let set_b_elements = resolve_elements(&args.set_b, &file_cfg.set_b, "set-b")?;

    let seed = match args.seed.or(file_cfg.seed) {
        Some(seed) => seed,
        None => seed_from_env()?.unwrap_or(0),
    };
    let mode = match args.mode {
        Some(m) => m,
        None => match file_cfg.compare_mode.as_deref() {
            None | Some("exact") => ModeArg::Exact,
            Some("sampled") => ModeArg::Sampled,
            Some(other) => return Err(usage(format!("unknown compare_mode {other:?}"))),
        },
    };
    let reps = args.reps.or(file_cfg.repetitions).unwrap_or(10);
    let compare_mode = match mode {
        ModeArg::Exact => CompareMode::Exact { tol: 1e-9 },
        ModeArg::Sampled => CompareMode::Sampled {
            repetitions: reps.max(1),
        },
    };

    let universe = UniversalSet::new(universe_elements).map_err(|e| usage(e.to_string()))?;
    let cfg = SessionConfig {
        universe,
        set_a: PrivateSet::new(set_a_elements),
        set_b: PrivateSet::new(set_b_elements),
        decoys_per_hop: args.decoys.or(file_cfg.decoys_per_hop).unwrap_or(16),
        compare_mode,
        max_retries: args.retries.or(file_cfg.max_retries).unwrap_or(3),
        exponent_bound: args.exponent_bound.or(file_cfg.exponent_bound).unwrap_or(1024),
        seed,
        replay: None,
    };

    let eve = match (args.eve_hop, args.eve_strategy) {
        (None, None) => EvePlan::none(),
        (hop, strategy) => EvePlan::on_hop(
            hop_of(hop.unwrap_or(HopArg::CalvinAlice)),
            strategy_of(strategy.unwrap_or(StrategyArg::Intercept)),
        ),
    };
    let outcome =
        qpsi_core::harness::run_session(&cfg, &eve).map_err(|e| usage(e.to_string()))?;

    let mut inputs = serde_json::to_value(&cfg).expect("config serializes");
    inputs["eve"] = serde_json::to_value(eve).expect("plan serializes");
    let (results, code) = match &outcome {
        SessionOutcome::Completed {
            intersection,
            equality,
            transcript,
        } => {
            eprintln!(
                "session {}: completed, intersection {{{}}}",
                transcript.session_id,
                intersection
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            eprintln!(
                "transcript: {} messages over {} attempt(s)",
                transcript.entries().len(),
                transcript.entries().iter().map(|e| e.attempt).max().unwrap_or(1)
            );
            (
                json!({
                    "outcome": outcome.summary_json(),
                    "equality": equality,
                    "transcript": transcript.export(outcome.summary_json(), args.verbose_transcript),
                }),
                exit_code::OK,
            )
        }
        SessionOutcome::Aborted { step, reason, .. } => {
            eprintln!("session aborted at step {step}: {reason}");
            (
                json!({ "outcome": outcome.summary_json() }),
                exit_code::ABORTED,
            )
        }
    };
    Ok((Report::new("run", inputs, results), code))
}

pub fn cmd_demo_example() -> CommandResult {
    let universe = demo::universe();
    let labels = demo::prep_labels();
    let code_a = encode_set(&universe, &demo::set_a()).expect("demo sets are valid");
    let code_b = encode_set(&universe, &demo::set_b()).expect("demo sets are valid");
    let flags_a = demo::flags_a();
    let flags_b = derive_flag_b(&flags_a);
    let (r_a, r_b) = (demo::r_a(), demo::r_b());

    let p_a = alice_transform(QuantumSequence::from_labels(&labels), &code_a, &r_a, &flags_a)
        .expect("demo lengths are consistent");
    let p_b = bob_transform(p_a, &code_b, &r_b, &flags_b).expect("demo lengths are consistent");
    let r_c = combine_public_exponents(&r_a, &r_b).expect("demo lengths are consistent");
    let finalized = calvin_finalize(p_b, &r_c).expect("demo lengths are consistent");

    let mut rng = SeededRng::new(0);
    let replica = ComparisonReplica {
        prep_labels: labels.clone(),
        finalized: finalized.clone(),
    };
    let verdicts = equality_verdicts(
        std::slice::from_ref(&replica),
        &CompareMode::Exact { tol: 1e-9 },
        &mut rng,
    );
    let announcement = announcement_from_verdicts(&verdicts);
    let intersection = decode_intersection(&announcement, &universe);

    // Every finalized particle must equal H^b applied to its preparation,
    // with b the pinned per-position parity.
    let states_match = (0..16).all(|i| {
        let expected = h_power(ThirdExponent::new(i64::from(
            demo::EXPECTED_HADAMARD_APPLIED[i],
        )))
        .apply(&canonical_state(labels[i]));
        fidelity(&finalized.particles()[i], &expected) >= 1.0 - 1e-9
    });

    let equal_first: Vec<usize> = (0..8).filter(|&i| verdicts[i]).map(|i| i + 1).collect();
    let unequal_second: Vec<usize> = (8..16).filter(|&i| !verdicts[i]).map(|i| i + 1).collect();
    let announced: Vec<usize> = announcement.positions().iter().copied().collect();

    let checks = json!({
        "equal_first_register": equal_first == demo::EXPECTED_EQUAL_FIRST,
        "unequal_second_register": unequal_second == demo::EXPECTED_UNEQUAL_SECOND,
        "announced_positions": announced == demo::EXPECTED_ANNOUNCED,
        "intersection": intersection == demo::expected_intersection(),
        "finalized_states": states_match,
    });
    let all_match = checks.as_object().unwrap().values().all(|v| v == true);

    // Fixed-width per-position table, first and second register side by side.
    eprintln!("pos  prep  equal   |  pos  prep  equal");
    for i in 0..8 {
        eprintln!(
            "{:>3}   |{}>   {}    |  {:>3}   |{}>   {}",
            i + 1,
            labels[i].symbol(),
            if verdicts[i] { "yes" } else { " no" },
            i + 9,
            labels[i + 8].symbol(),
            if verdicts[i + 8] { "yes" } else { " no" },
        );
    }
    eprintln!(
        "announced: {announced:?}  intersection: {:?}  all checks: {}",
        intersection.iter().collect::<Vec<_>>(),
        if all_match { "pass" } else { "FAIL" }
    );

    let per_position: Vec<serde_json::Value> = (0..16)
        .map(|i| {
            json!({
                "position": i + 1,
                "prepared": labels[i].symbol().to_string(),
                "equal": verdicts[i],
                "net_hadamard": demo::EXPECTED_HADAMARD_APPLIED[i],
            })
        })
        .collect();
    let inputs = json!({
        "universe": universe.elements(),
        "set_a": demo::set_a().iter().collect::<Vec<_>>(),
        "set_b": demo::set_b().iter().collect::<Vec<_>>(),
        "code_a": code_a.to_string(),
        "code_b": code_b.to_string(),
        "flags_a": flags_a.bits(),
        "r_a": r_a.values(),
        "r_b": r_b.values(),
    });
    let results = json!({
        "per_position": per_position,
        "equal_first_register": equal_first,
        "unequal_second_register": unequal_second,
        "announced": announced,
        "intersection": intersection.iter().collect::<Vec<_>>(),
        "checks": checks,
        "all_match": all_match,
    });
    let code = if all_match { exit_code::OK } else { exit_code::CHECK_FAILED };
    Ok((Report::new("demo-example", inputs, results), code))
}

pub fn cmd_verify_gates(args: &VerifyGatesArgs) -> CommandResult {
    let tolerance = args.tolerance;
    let identity = Gate2::identity();
    let hadamard = Gate2::hadamard();
    let (v_plus, v_minus) = hadamard_eigensystem();

    let spectral_vs_parity = (-6..=6)
        .map(|k| h_power_spectral(ThirdExponent::new(k)).distance(&h_power(ThirdExponent::new(k))))
        .fold(0.0f64, f64::max);
    let residuals = [
        (
            "h_pow_4_3_minus_identity",
            h_power_spectral(ThirdExponent::new(4)).distance(&identity),
        ),
        (
            "h_pow_5_3_minus_h",
            h_power_spectral(ThirdExponent::new(5)).distance(&hadamard),
        ),
        (
            "h_squared_minus_identity",
            h_power_spectral(ThirdExponent::new(6)).distance(&identity),
        ),
        (
            "eigenvector_inner_product",
            v_plus.inner(&v_minus).norm(),
        ),
        (
            "eigenvector_norm_error",
            (v_plus.norm_sqr().sqrt() - 1.0)
                .abs()
                .max((v_minus.norm_sqr().sqrt() - 1.0).abs()),
        ),
        ("spectral_vs_parity_max", spectral_vs_parity),
    ];
    let pass = residuals.iter().all(|(_, r)| *r <= tolerance);

    eprintln!("residual                        value");
    for (name, value) in &residuals {
        eprintln!("{name:<30}  {value:.3e}");
    }
    eprintln!("tolerance {tolerance:.0e}: {}", if pass { "pass" } else { "FAIL" });

    // Both construction routes for the interesting numerators, for
    // side-by-side inspection.
    let routes: Vec<serde_json::Value> = [3i64, 4, 5]
        .iter()
        .map(|&k| {
            let spectral = h_power_spectral(ThirdExponent::new(k));
            let parity = h_power(ThirdExponent::new(k));
            json!({
                "numerator": k,
                "spectral": spectral,
                "parity_shortcut": parity,
                "identical": spectral.distance(&parity) <= tolerance,
            })
        })
        .collect();

    let results = json!({
        "residuals": residuals
            .iter()
            .map(|(name, value)| (name.to_string(), json!(value)))
            .collect::<serde_json::Map<_, _>>(),
        "routes": routes,
        "tolerance": tolerance,
        "pass": pass,
    });
    let code = if pass { exit_code::OK } else { exit_code::CHECK_FAILED };
    Ok((
        Report::new("verify-gates", json!({ "tolerance": tolerance }), results),
        code,
    ))
}

pub fn cmd_vuln_nqpsi(args: &VulnArgs) -> CommandResult {
    let seed = match args.seed {
        Some(seed) => seed,
        None => seed_from_env()?.unwrap_or(0),
    };
    let trials = args.trials;
    let root = SeededRng::new(seed);

    // Fixed example first.
    let universe = demo::universe();
    let (set_a, set_b) = (demo::set_a(), demo::set_b());
    let code_a = encode_set(&universe, &set_a).expect("demo sets are valid");
    let code_b = encode_set(&universe, &set_b).expect("demo sets are valid");
    let mut rng = root.child("example");
    let (verdict, _) = nqpsi_run(&set_a, &set_b, &universe, &mut rng)
        .expect("demo sets are valid");
    let alice_inferred = leakage_attack(&verdict, &code_a, &universe);
    let bob_inferred = leakage_attack(&verdict, &code_b, &universe);
    let alice_expected = set_b.difference(&set_a);
    let bob_expected = set_a.difference(&set_b);

    eprintln!("pos  c_A  c_B  sign");
    for (i, sign) in verdict.signs().iter().enumerate() {
        eprintln!(
            "{:>3}   {}    {}    {}",
            i + 1,
            u8::from(code_a.bit(i)),
            u8::from(code_b.bit(i)),
            match sign {
                VerdictSign::Plus => '+',
                VerdictSign::Minus => '-',
            }
        );
    }
    eprintln!(
        "alice infers {:?} (S_B - S_A), bob infers {:?} (S_A - S_B)",
        alice_inferred.iter().collect::<Vec<_>>(),
        bob_inferred.iter().collect::<Vec<_>>()
    );

    // Random instances, each checked against direct set algebra.
    let policy = SetGenPolicy::up_to(12);
    let mut matches = 0usize;
    for trial in 0..trials {
        let mut trial_rng = root.child(&format!("trial/{trial}"));
        let (universe, set_a, set_b) = policy.sample_instance(&mut trial_rng);
        let code_a = encode_set(&universe, &set_a).expect("subset by construction");
        let code_b = encode_set(&universe, &set_b).expect("subset by construction");
        let (verdict, _) = nqpsi_run(&set_a, &set_b, &universe, &mut trial_rng)
            .expect("subset by construction");
        let alice = leakage_attack(&verdict, &code_a, &universe);
        let bob = leakage_attack(&verdict, &code_b, &universe);
        if alice == set_b.difference(&set_a) && bob == set_a.difference(&set_b) {
            matches += 1;
        }
    }
    eprintln!("random trials: {matches}/{trials} exact inference matches");

    let signs: String = verdict
        .signs()
        .iter()
        .map(|s| if *s == VerdictSign::Plus { '+' } else { '-' })
        .collect();
    let inputs = json!({ "seed": seed, "trials": trials });
    let results = json!({
        "example": {
            "universe": universe.elements(),
            "set_a": set_a.iter().collect::<Vec<_>>(),
            "set_b": set_b.iter().collect::<Vec<_>>(),
            "signs": signs,
            "alice_inferred": alice_inferred.iter().collect::<Vec<_>>(),
            "alice_expected": alice_expected.iter().collect::<Vec<_>>(),
            "alice_match": alice_inferred == alice_expected,
            "bob_inferred": bob_inferred.iter().collect::<Vec<_>>(),
            "bob_expected": bob_expected.iter().collect::<Vec<_>>(),
            "bob_match": bob_inferred == bob_expected,
        },
        "random_trials": { "trials": trials, "exact_matches": matches },
    });
    Ok((Report::new("vuln-nqpsi", inputs, results), exit_code::OK))
}

pub fn cmd_attack(args: &AttackArgs) -> CommandResult {
    let seed = match args.seed {
        Some(seed) => seed,
        None => seed_from_env()?.unwrap_or(0),
    };
    let hop = hop_of(args.hop);
    let strategy = strategy_of(args.strategy);
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }

    let mut cfg = SessionConfig::new(demo::universe(), demo::set_a(), demo::set_b(), seed);
    cfg.decoys_per_hop = args.decoys;
    let report = run_attack_trials(&cfg, &strategy, hop, args.trials, &SeededRng::new(seed))
        .map_err(|e| usage(e.to_string()))?;

    // 95% binomial confidence interval around the empirical rate.
    let p = report.empirical_rate;
    let half_width = 1.96 * (p * (1.0 - p) / report.trials as f64).sqrt();
    let ci95 = [(p - half_width).max(0.0), (p + half_width).min(1.0)];

    eprintln!(
        "{} on hop {}: detected {}/{} (empirical {:.4}, theory {:.4})",
        match strategy {
            EveStrategy::PassThrough => "pass-through",
            EveStrategy::InterceptMeasureResend(_) => "intercept-measure-resend",
        },
        hop.label(),
        report.detections,
        report.trials,
        report.empirical_rate,
        report.theoretical_rate
    );

    let inputs = json!({
        "hop": hop.label(),
        "strategy": args.strategy.as_str(),
        "decoys": args.decoys,
        "trials": args.trials,
        "seed": seed,
    });
    let results = json!({
        "trials": report.trials,
        "detections": report.detections,
        "empirical_rate": report.empirical_rate,
        "theoretical_rate": report.theoretical_rate,
        "decoys_per_hop": report.decoys_per_hop,
        "ci95": ci95,
    });
    Ok((Report::new("attack", inputs, results), exit_code::OK))
}

pub fn cmd_monte_carlo(args: &MonteCarloArgs, timing: bool) -> CommandResult {
    let seed = match args.seed {
        Some(seed) => seed,
        None => seed_from_env()?.unwrap_or(0),
    };
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.max_n == 0 {
        return Err(usage("--max-n must be at least 1"));
    }
    let compare_mode = match args.mode {
        ModeArg::Exact => CompareMode::Exact { tol: 1e-9 },
        ModeArg::Sampled => CompareMode::Sampled {
            repetitions: args.reps.max(1),
        },
    };
    let mut opts = MonteCarloOptions::new(args.trials, args.max_n, seed);
    opts.compare_mode = compare_mode;

    let mut summary = run_monte_carlo(&opts).map_err(|e| usage(e.to_string()))?;
    let wall_ms = summary.elapsed_ms;
    if !timing {
        summary.elapsed_ms = 0;
    }

    eprintln!(
        "{}/{} sessions matched the classical oracle in {wall_ms} ms",
        summary.matches, summary.trials
    );

    let exact = matches!(opts.compare_mode, CompareMode::Exact { .. });
    let mut results = serde_json::to_value(&summary).expect("summary serializes");
    if let CompareMode::Sampled { repetitions } = opts.compare_mode {
        let predicted = 0.5f64.powi(repetitions as i32);
        let observed = if summary.intersection_elements > 0 {
            summary.false_negatives as f64 / summary.intersection_elements as f64
        } else {
            0.0
        };
        results["sampled_error_model"] = json!({
            "repetitions": repetitions,
            "predicted_false_negative_rate": predicted,
            "observed_false_negative_rate": observed,
        });
        eprintln!(
            "sampled mode: false-negative rate {observed:.5} vs predicted {predicted:.5}"
        );
    }

    let inputs = serde_json::to_value(&opts).expect("options serialize");
    let code = if exact && !summary.mismatches.is_empty() {
        eprintln!(
            "exact-mode mismatch; first reproduction seed: {}",
            summary.mismatches[0].seed
        );
        exit_code::CHECK_FAILED
    } else {
        exit_code::OK
    };
    Ok((Report::new("monte-carlo", inputs, results), code))
}

