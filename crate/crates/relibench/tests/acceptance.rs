//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relibench::agents::run_oracle;
use relibench::chaos::{
    build_profile, select_fault, FaultKind, FaultSession, FaultType,
};
use relibench::core::config::{default_price_table, AblationName, RunConfig};
use relibench::core::cost::compute_cost;
use relibench::core::log::read_episode_log;
use relibench::core::types::{Domain, EpisodeRecord, FaultEvent, ToolCallRecord, SCHEMA_VERSION};
use relibench::domains::state::DomainState;
use relibench::domains::{all_task_suites, apply_tool, catalog, verify};
use relibench::metamorph::perturb_task;
use relibench::metrics::{
    ablation_report, build_surface, degradation_gradient, estimate_pass_k, recovery_stats,
    Axis, Observation,
};
use relibench::runner::{execute_plan, plan_experiment, replay_log};

fn criterion(name: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(e) => {
            println!("acceptance {name}: FAIL");
            resume_unwind(e);
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn criterion_1_profile_fidelity() {
    criterion("1 profile-fidelity", || {
        let expected: [(f64, f64, &[(FaultType, f64)]); 4] = [
            (0.0, 0.0, &[]),
            (0.1, 0.075, &[
                (FaultType::TransientTimeout, 0.4),
                (FaultType::HighLatency, 0.3),
                (FaultType::EmptyResponse, 0.3),
            ]),
            (0.2, 0.175, &[
                (FaultType::TransientTimeout, 0.25),
                (FaultType::SoftRateLimit, 0.25),
                (FaultType::PartialResponse, 0.2),
                (FaultType::SchemaDrift, 0.15),
                (FaultType::StaleData, 0.15),
            ]),
            (0.3, 0.275, &[
                (FaultType::TransientTimeout, 0.15),
                (FaultType::ConnectionReset, 0.15),
                (FaultType::HardRateLimit, 0.15),
                (FaultType::PartialResponse, 0.15),
                (FaultType::SchemaDrift, 0.2),
                (FaultType::CascadingFailure, 0.2),
            ]),
        ];
        for (lambda, rate, weights) in expected {
            let p = build_profile(lambda).unwrap();
            assert_eq!(p.lambda_level, lambda);
            assert_eq!(p.failure_rate, rate, "rate at λ={lambda}");
            assert_eq!(p.fault_weights.len(), weights.len(), "mix size at λ={lambda}");
            for (fault, w) in weights {
                assert_eq!(p.weight(*fault), *w, "{fault} weight at λ={lambda}");
            }
        }
    });
}

#[test]
fn criterion_2_fault_rate_monte_carlo() {
    criterion("2 fault-rate-monte-carlo", || {
        let p = build_profile(0.2).unwrap();
        let mut r = rng(20_002);
        let n = 100_000;
        let mut fired = 0u64;
        let mut counts: BTreeMap<FaultType, u64> = BTreeMap::new();
        for _ in 0..n {
            if let Some(f) = select_fault(&p, &mut r) {
                fired += 1;
                *counts.entry(f).or_insert(0) += 1;
            }
        }
        let rate = fired as f64 / n as f64;
        assert!((rate - 0.175).abs() <= 0.004, "rate {rate}");
        for (fault, expected) in &p.fault_weights {
            let got = counts[fault] as f64 / fired as f64;
            assert!((got - expected).abs() <= 0.01, "{fault}: {got} vs {expected}");
        }
        let baseline = build_profile(0.0).unwrap();
        for _ in 0..n {
            assert_eq!(select_fault(&baseline, &mut r), None);
        }
    });
}

#[test]
fn criterion_3_oracle_suite() {
    criterion("3 oracle-suite", || {
        let tasks = all_task_suites(42);
        assert_eq!(tasks.len(), 20);
        for task in &tasks {
            for epsilon in [0.0, 0.1, 0.2, 0.3] {
                for seed in 0..50u64 {
                    let mut prng = rng(seed * 7919 + 17);
                    let (perturbed, applied) = perturb_task(task, epsilon, &mut prng).unwrap();
                    let weight: f64 = applied.iter().map(|m| m.weight).sum();
                    assert!((weight - epsilon).abs() < 1e-9);
                    let mut session = FaultSession::new(
                        build_profile(0.0).unwrap(),
                        &perturbed.initial_state,
                    );
                    let traj = run_oracle(&perturbed, &mut session, &mut prng);
                    let ok =
                        verify(&perturbed, &perturbed.initial_state, &traj.final_state).unwrap();
                    assert!(
                        ok,
                        "oracle failed {} at ε={epsilon} seed={seed}: {:?}",
                        task.task_id, perturbed.description
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_4_pass_k_estimator() {
    criterion("4 pass-k-estimator", || {
        // Exhaustive brute-force subset enumeration for all n ≤ 12.
        for n in 1..=12usize {
            for pattern in 0u32..(1u32 << n) {
                let outcomes: Vec<bool> = (0..n).map(|i| pattern & (1 << i) != 0).collect();
                for k in 1..=n {
                    let mut total = 0u64;
                    let mut all_pass = 0u64;
                    for mask in 0u32..(1u32 << n) {
                        if mask.count_ones() as usize != k {
                            continue;
                        }
                        total += 1;
                        if (0..n).all(|i| mask & (1 << i) == 0 || outcomes[i]) {
                            all_pass += 1;
                        }
                    }
                    let expected = all_pass as f64 / total as f64;
                    let got = estimate_pass_k(&outcomes, k).unwrap();
                    assert!((got - expected).abs() < 1e-12, "n={n} k={k}");
                }
            }
        }
        let half = estimate_pass_k(&[true, true, true, false], 2).unwrap();
        assert_eq!(half, 0.5);
    });
}

/// Minimal valid record for engineered metric-reproduction logs.
fn synth_record(
    task_id: &str,
    epsilon: f64,
    lambda: f64,
    trial: u32,
    agent: &str,
    success: bool,
) -> EpisodeRecord {
    EpisodeRecord {
        schema_version: SCHEMA_VERSION,
        task_id: task_id.to_string(),
        epsilon: 0.0,
        lambda_level: lambda,
        fault_profile: None,
        trial_index: trial,
        agent_id: agent.to_string(),
        model_id: "synthetic".to_string(),
        seed: 0,
        perturbed_description: String::new(),
        applied_mrs: vec![],
        transcript: vec![],
        tool_calls: vec![],
        fault_events: vec![],
        success,
        final_state: DomainState::empty(Domain::Scheduling),
        tokens_in: 0,
        tokens_out: 0,
        wall_ms: 0,
        cost_usd: 0.0,
    }
    // epsilon is set separately because applied_mrs stays empty in
    // synthetic records; the observation carries the level instead.
    .with_epsilon_unchecked(epsilon)
}

trait WithEpsilon {
    fn with_epsilon_unchecked(self, epsilon: f64) -> Self;
}
impl WithEpsilon for EpisodeRecord {
    fn with_epsilon_unchecked(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Observations where `successes` of `tasks` tasks pass both of two
/// trials and the rest pass only the first, making the pass^2 mean
/// exactly successes/tasks.
fn two_trial_obs(
    eps: &[f64],
    lam: &[f64],
    tasks: usize,
    successes: &dyn Fn(f64, f64) -> usize,
) -> Vec<Observation> {
    let mut out = Vec::new();
    for &l in lam {
        for &e in eps {
            let ok = successes(e, l);
            for t in 0..tasks {
                for trial in 0..2u32 {
                    out.push(Observation {
                        task_id: format!("task-{t:03}"),
                        epsilon: e,
                        lambda: l,
                        trial_index: trial,
                        success: t < ok || trial == 0,
                    });
                }
            }
        }
    }
    out
}

#[test]
fn criterion_5_metric_reproduction() {
    criterion("5 metric-reproduction", || {
        // Measured-surface values at k=2: counts out of 800 task-points.
        let obs = two_trial_obs(&[0.0, 0.2], &[0.0, 0.1, 0.2], 800, &|e, l| {
            match ((e * 10.0).round() as u32, (l * 10.0).round() as u32) {
                (0, 0) => 775,
                (2, 0) => 728,
                (0, 1) => 705,
                (2, 1) => 680,
                (0, 2) => 705,
                (2, 2) => 672,
                _ => unreachable!(),
            }
        });
        let s = build_surface(&obs, &[2], &[0.0, 0.2], &[0.0, 0.1, 0.2]).unwrap();
        // Two-decimal agreement: within half a unit in the last place
        // (88.125 is a genuine tie and is reported as 88.12).
        let check = |e: f64, l: f64, want: f64| {
            let pct = s.estimate(2, e, l).unwrap() * 100.0;
            assert!((pct - want).abs() <= 0.005, "({e},{l}): {pct} vs {want}");
        };
        check(0.0, 0.0, 96.88);
        check(0.0, 0.1, 88.12);
        check(0.0, 0.2, 88.12);
        check(0.2, 0.0, 91.0);
        check(0.2, 0.1, 85.0);
        check(0.2, 0.2, 84.0);

        // Ablation deltas from 80-episode profiles.
        let mut records = Vec::new();
        for (profile, ok) in [
            (AblationName::TimeoutOnly, 79),
            (AblationName::RateLimitOnly, 75),
            (AblationName::PartialOnly, 78),
            (AblationName::Mixed, 77),
        ] {
            for i in 0..80 {
                let mut r = synth_record("t", 0.0, 0.2, 0, "react", i < ok);
                r.fault_profile = Some(profile.as_str().to_string());
                records.push(r);
            }
        }
        let rows = ablation_report(&records).unwrap();
        let deltas: Vec<f64> = rows
            .iter()
            .map(|r| (r.delta_vs_mixed * 10_000.0).round() / 100.0)
            .collect();
        assert_eq!(deltas, vec![2.50, -2.50, 1.25, 0.0]);

        // Recovery rate 38/47 → 80.9%.
        let mut records = Vec::new();
        for i in 0..47 {
            let mut r = synth_record("t", 0.0, 0.2, i, "react", true);
            r.tool_calls.push(ToolCallRecord {
                index: 0,
                tool_name: "book_meeting".to_string(),
                args: Default::default(),
                result_text: "status=error reason=transient_timeout".to_string(),
                fault_annotation: Some("TransientTimeout".to_string()),
                is_explicit_fault: true,
            });
            r.fault_events.push(FaultEvent {
                tool_call_index: 0,
                fault_id: "TransientTimeout".to_string(),
                was_explicit: true,
                recovered: i < 38,
            });
            records.push(r);
        }
        let stats = recovery_stats(&records);
        assert_eq!(stats.faults_encountered, 47);
        assert_eq!(stats.successful_recoveries, 38);
        assert_eq!(format!("{:.1}", stats.recovery_rate.unwrap() * 100.0), "80.9");

        // λ-gradients: ReAct 97.5→90.0 (−0.375/unit), Reflexion
        // 96.25→86.25 (−0.500/unit), both from 80-task logs.
        let react = two_trial_obs(&[0.0], &[0.0, 0.2], 80, &|_, l| {
            if l == 0.0 { 78 } else { 72 }
        });
        let s = build_surface(&react, &[2], &[0.0], &[0.0, 0.2]).unwrap();
        let g = degradation_gradient(&s, 2, 0.0, 0.0, Axis::Lambda).unwrap();
        assert_eq!((g * 1000.0).round() / 1000.0, -0.375);
        let reflexion = two_trial_obs(&[0.0], &[0.0, 0.2], 80, &|_, l| {
            if l == 0.0 { 77 } else { 69 }
        });
        let s = build_surface(&reflexion, &[2], &[0.0], &[0.0, 0.2]).unwrap();
        let g = degradation_gradient(&s, 2, 0.0, 0.0, Axis::Lambda).unwrap();
        assert_eq!((g * 1000.0).round() / 1000.0, -0.500);
    });
}

#[test]
fn criterion_6_grid_accounting() {
    criterion("6 grid-accounting", || {
        let tasks = all_task_suites(42);
        let main = plan_experiment(&RunConfig::paper_main(), &tasks).unwrap();
        assert_eq!(main.jobs.len(), 480);
        let ablation = plan_experiment(&RunConfig::paper_ablation(), &tasks).unwrap();
        assert_eq!(ablation.jobs.len(), 320);
        // Two models run the main grid; the ablation ran on one.
        assert_eq!(2 * main.jobs.len() + ablation.jobs.len(), 1280);
    });
}

#[test]
fn criterion_7_determinism_and_replay() {
    criterion("7 determinism-and-replay", || {
        let mut config = RunConfig::paper_main();
        config.epsilon_levels = vec![0.0, 0.2];
        config.lambda_levels = vec![0.0, 0.2];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let run_with_threads = |threads: usize, name: &str| {
            let path = dir.path().join(name);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| execute_plan(&plan, &config, &tasks, &path)).unwrap();
            path
        };
        let a = run_with_threads(1, "p1.jsonl");
        let b = run_with_threads(8, "p8.jsonl");
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap(),
            "logs must be byte-identical at parallelism 1 and 8"
        );
        let records = read_episode_log(&a).unwrap();
        assert_eq!(records.len(), plan.jobs.len());
        let mismatches = replay_log(&records, &tasks).unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    });
}

#[test]
fn criterion_8_fault_semantics() {
    criterion("8 fault-semantics", || {
        let tasks = all_task_suites(42);
        let mut r = rng(88);

        // Explicit-error faults never mutate state: 1,000 random tool
        // sequences with random forced faults interleaved.
        for _ in 0..1000 {
            let task = &tasks[r.gen_range(0..tasks.len())];
            let tools = catalog(task.domain);
            let mut session =
                FaultSession::new(build_profile(0.3).unwrap(), &task.initial_state);
            let mut state = task.initial_state.clone();
            for _ in 0..6 {
                let spec = &tools[r.gen_range(0..tools.len())];
                let args: relibench::core::types::ToolArgs = spec
                    .params
                    .iter()
                    .map(|p| {
                        let v = match r.gen_range(0..4) {
                            0 => serde_json::json!("2026-01-01"),
                            1 => serde_json::json!("09:00"),
                            2 => serde_json::json!(""),
                            _ => serde_json::json!("x"),
                        };
                        (p.name.to_string(), v)
                    })
                    .collect();
                if r.gen_bool(0.5) {
                    let fault = FaultType::ALL[r.gen_range(0..FaultType::ALL.len())];
                    session.force_next(fault);
                }
                let out = session.execute(&state, spec.name, &args, &mut r).unwrap();
                if out.is_explicit {
                    assert_eq!(out.state, state, "explicit fault mutated state");
                }
                state = out.state;
                session.note_turn();
            }
        }

        // A single forced recoverable fault never prevents oracle
        // success; position is steered with benign latency padding.
        let recoverable: Vec<FaultType> = FaultType::ALL
            .into_iter()
            .filter(|f| f.recoverable() && f.kind() == FaultKind::ExplicitError)
            .collect();
        for task in &tasks {
            for &fault in &recoverable {
                for position in 0..3 {
                    let mut session =
                        FaultSession::new(build_profile(0.0).unwrap(), &task.initial_state);
                    for _ in 0..position {
                        session.force_next(FaultType::HighLatency);
                    }
                    session.force_next(fault);
                    let mut orng = rng(1234);
                    let traj = run_oracle(task, &mut session, &mut orng);
                    let ok = verify(task, &task.initial_state, &traj.final_state).unwrap();
                    assert!(ok, "{} with {fault} at call {position}", task.task_id);
                }
            }
        }

        // HardRateLimit on the first (goal-critical path) tool always
        // prevents success: the oracle aborts rather than hammering a
        // dead tool.
        for task in &tasks {
            let mut session =
                FaultSession::new(build_profile(0.0).unwrap(), &task.initial_state);
            session.force_next(FaultType::HardRateLimit);
            let mut orng = rng(4321);
            let traj = run_oracle(task, &mut session, &mut orng);
            let ok = verify(task, &task.initial_state, &traj.final_state).unwrap();
            assert!(!ok, "{} succeeded past a hard rate limit", task.task_id);
            assert!(!traj.finished);
        }
    });
}

#[test]
fn criterion_9_cost_model() {
    criterion("9 cost-model", || {
        let table = default_price_table();
        // Input rate: 1M Gemini input tokens cost 0.075 USD.
        let gemini_in = compute_cost(1_000_000, 0, "gemini-2.0-flash", &table).unwrap();
        assert!((gemini_in - 0.075).abs() < 1e-12);
        // Like-for-like usage is ~33x more expensive on the larger
        // model at any split.
        for (tin, tout) in [(1_000_000, 0), (0, 1_000_000), (500_000, 500_000)] {
            let big = compute_cost(tin, tout, "gpt-4o", &table).unwrap();
            let small = compute_cost(tin, tout, "gemini-2.0-flash", &table).unwrap();
            let ratio = big / small;
            assert!((33.0..=34.0).contains(&ratio), "ratio {ratio}");
        }
        // Skewed splits push the per-call ratio well past 82x
        // (output-heavy large-model calls vs input-heavy small ones).
        let big = compute_cost(0, 1_000_000, "gpt-4o", &table).unwrap();
        let small = compute_cost(1_000_000, 0, "gemini-2.0-flash", &table).unwrap();
        assert!(big / small >= 82.0);
    });
}

/// Criterion 10 (live-backend smoke) requires credentials and a
/// network; it is exercised manually via the `live` feature and is
/// deliberately not part of this gate.
#[test]
fn criterion_10_live_backend_not_in_ci() {
    criterion("10 live-backend (skipped: needs credentials)", || {});
}

// Apply tools referenced indirectly so the import is exercised even if
// the random-args property never picks a state-changing combination.
#[test]
fn sanity_apply_tool_used_by_replay_path() {
    let tasks = all_task_suites(42);
    let task = &tasks[0];
    let args: relibench::core::types::ToolArgs = [
        ("date".to_string(), serde_json::json!("2026-01-01")),
        ("time".to_string(), serde_json::json!("09:00")),
        ("topic".to_string(), serde_json::json!("Review")),
    ]
    .into_iter()
    .collect();
    let (state, text) = apply_tool(&task.initial_state, "book_meeting", &args).unwrap();
    assert!(text.starts_with("status=booked"));
    assert!(verify(task, &task.initial_state, &state).unwrap());
}
