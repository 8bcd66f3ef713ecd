//! `run`: execute a configured experiment end to end.
//!
//! One engine run per seed (in parallel threads; each run is independent and
//! seeded, so the output does not depend on scheduling), optionally a
//! random-search baseline at the same budget, one record file per
//! (method, seed), and a summary table of per-iteration incumbent mean and
//! standard error across seeds.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mixbo::benchmarks::{random_search, BenchmarkProblem};
use mixbo::error::BenchmarkError;
use mixbo::optimizer::Optimizer;
use mixbo::record::RunRecord;

use crate::config::ExperimentConfig;
use crate::CliError;

struct SeedOutcome {
    method: &'static str,
    seed: u64,
    record: RunRecord<f64>,
    /// Abort message when the run did not complete.
    failure: Option<String>,
}

pub fn run_experiment(config_path: &Path) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    if config.external {
        return Err(CliError::Config(
            "external configs have no objective to run; drive them with `session`".into(),
        ));
    }
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    // Resolve and validate everything before touching the filesystem, so a
    // bad config leaves no partial outputs behind.
    let problem = config.resolve_benchmark(config_dir)?;
    let engine_config = config.optimizer_config(config.seeds[0], problem.minimize());
    engine_config
        .validate(problem.space())
        .map_err(|e| CliError::Config(format!("optimizer config: {e}")))?;

    let mut outcomes: Vec<SeedOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| {
                let problem = &problem;
                let config = &config;
                scope.spawn(move || run_engine_seed(problem, config, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("seed runs do not panic"))
            .collect()
    });

    if config.random_search {
        let budget = engine_config.max_evals;
        let minimize = engine_config.minimize;
        let hash = engine_config.hash();
        for &seed in &config.seeds {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut record = random_search(
                |z| {
                    let v = problem.evaluate(z).expect("uniform draws stay in-space");
                    if minimize {
                        -v
                    } else {
                        v
                    }
                },
                problem.space(),
                budget,
                &mut rng,
            );
            record.seed = seed;
            record.minimize = minimize;
            record.config_hash = hash.clone();
            outcomes.push(SeedOutcome {
                method: "random",
                seed,
                record,
                failure: None,
            });
        }
    }

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output dir: {e}")))?;
    let mut failures = Vec::new();
    for outcome in &outcomes {
        let stem = format!("{}_seed{}", outcome.method, outcome.seed);
        let record_path = config.output_dir.join(format!("{stem}.record"));
        std::fs::write(&record_path, outcome.record.to_text())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", record_path.display())))?;
        if let Some(msg) = &outcome.failure {
            let error_path = config.output_dir.join(format!("{stem}.error"));
            std::fs::write(&error_path, format!("{msg}\n"))
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", error_path.display())))?;
            failures.push(format!("{stem}: {msg}"));
        }
    }

    let summary = summarize(&outcomes)?;
    let summary_path = config.output_dir.join("summary.tsv");
    std::fs::write(&summary_path, summary)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", summary_path.display())))?;

    let written = outcomes.len();
    println!(
        "wrote {written} record file(s) and summary.tsv to {}",
        config.output_dir.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} of {} runs aborted: {}",
            failures.len(),
            outcomes.len(),
            failures.join("; ")
        )))
    }
}

fn run_engine_seed(
    problem: &BenchmarkProblem<f64>,
    config: &ExperimentConfig,
    seed: u64,
) -> SeedOutcome {
    let engine_config = config.optimizer_config(seed, problem.minimize());
    let engine = Optimizer::new(problem.space().clone(), engine_config)
        .expect("config validated before the sweep started");
    // Benchmark failures surface as a non-finite value, which the engine
    // rejects; the abort then carries the original error message.
    let mut bench_error: Option<BenchmarkError> = None;
    let result = engine.run(|z| match problem.evaluate(z) {
        Ok(v) => v,
        Err(e) => {
            bench_error = Some(e);
            f64::NAN
        }
    });
    match result {
        Ok(record) => SeedOutcome {
            method: "bo",
            seed,
            record,
            failure: None,
        },
        Err(aborted) => {
            let message = match bench_error {
                Some(e) => format!("objective evaluation failed: {e}"),
                None => format!("protocol violation: {}", aborted.error),
            };
            SeedOutcome {
                method: "bo",
                seed,
                record: aborted.record,
                failure: Some(message),
            }
        }
    }
}

/// Per-iteration incumbent mean and standard error across the completed
/// seeds of each method, on the natural objective scale.
fn summarize(outcomes: &[SeedOutcome]) -> Result<String, CliError> {
    let mut out = String::from("method\titeration\tmean\tse\tseeds\n");
    for method in ["bo", "random"] {
        let records: Vec<&RunRecord<f64>> = outcomes
            .iter()
            .filter(|o| o.method == method && o.failure.is_none())
            .map(|o| &o.record)
            .collect();
        let Some(first) = records.first() else {
            continue;
        };
        let t = first.len();
        if records.iter().any(|r| r.len() != t) {
            return Err(CliError::Runtime(format!(
                "{method} records disagree on length; cannot aggregate"
            )));
        }
        let n = records.len() as f64;
        for i in 0..t {
            let values: Vec<f64> = records
                .iter()
                .map(|r| {
                    let incumbent = r.evaluations[i].incumbent;
                    if r.minimize {
                        -incumbent
                    } else {
                        incumbent
                    }
                })
                .collect();
            let mean = values.iter().sum::<f64>() / n;
            let se = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            out.push_str(&format!(
                "{method}\t{}\t{mean}\t{se}\t{}\n",
                i + 1,
                records.len()
            ));
        }
    }
    Ok(out)
}
