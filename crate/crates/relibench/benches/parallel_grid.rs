//! Benchmarks the episode grid executor: the rayon data-parallel path
//! (at several thread-pool widths) against the sequential fallback.
//!
//! The sequential fallback proper is selected at compile time with
//! `--no-default-features`; under the default `parallel` feature a
//! one-thread rayon pool is benchmarked alongside it as the in-binary
//! sequential reference, plus a per-episode microbenchmark that has no
//! parallel machinery at all.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use relibench::core::config::RunConfig;
use relibench::domains::all_task_suites;
use relibench::runner::{execute_plan, plan_experiment, run_episode, ExperimentPlan};

fn bench_config() -> RunConfig {
    let mut config = RunConfig::paper_main();
    // A quarter-size grid keeps wall time sane while still giving each
    // worker a few chunks: 20 tasks × 2ε × 2λ × 1 agent × 1 trial.
    config.epsilon_levels = vec![0.0, 0.2];
    config.lambda_levels = vec![0.0, 0.2];
    config.agent_ids = vec!["react".to_string()];
    config.k_trials = 1;
    config
}

fn run_grid(plan: &ExperimentPlan, config: &RunConfig) {
    let tasks = all_task_suites(config.global_seed);
    let dir = tempfile::tempdir().expect("tempdir");
    let report = execute_plan(plan, config, &tasks, &dir.path().join("bench.jsonl"))
        .expect("bench grid executes");
    assert_eq!(report.records.len(), plan.jobs.len());
}

fn grid_benches(c: &mut Criterion) {
    let config = bench_config();
    let tasks = all_task_suites(config.global_seed);
    let plan = plan_experiment(&config, &tasks).expect("bench plan");

    let mut group = c.benchmark_group("grid_execution");
    group.throughput(Throughput::Elements(plan.jobs.len() as u64));
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    for threads in [1usize, 2, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        group.bench_with_input(
            BenchmarkId::new("parallel", threads),
            &threads,
            |b, _| b.iter(|| pool.install(|| run_grid(&plan, &config))),
        );
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_with_input(BenchmarkId::new("sequential", 1), &1usize, |b, _| {
        b.iter(|| run_grid(&plan, &config))
    });

    group.finish();

    // Single-episode latency, free of any executor or I/O overhead.
    let mut single = c.benchmark_group("single_episode");
    let job = &plan.jobs[0];
    let task = tasks
        .iter()
        .find(|t| t.task_id == job.task_id)
        .expect("task for first job");
    single.bench_function("run_episode", |b| {
        b.iter(|| run_episode(job, task, &config).expect("episode runs"))
    });
    single.finish();
}

criterion_group!(benches, grid_benches);
criterion_main!(benches);
