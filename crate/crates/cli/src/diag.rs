//! `diag`: theory-validation reports as structured text.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mixbo::diagnostics::{categorical_spectrum_check, check_categorical_gain_bound, regret_curve};
use mixbo::record::RunRecord;

use crate::CliError;

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Information-gain bound report for one categorical variable.
pub fn gain(n: usize, t: usize, lengthscale: f64, sigma2: f64, seed: u64) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Config("n must be at least 2".into()));
    }
    if t < 1 {
        return Err(CliError::Config("t must be at least 1".into()));
    }
    if sigma2 <= 0.0 {
        return Err(CliError::Config("sigma2 must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let report = check_categorical_gain_bound(n, t, lengthscale, sigma2, &mut rng);
    println!("categorical information-gain bound");
    println!("n\t{}", report.n);
    println!("t\t{}", report.t);
    println!("lengthscale\t{}", report.lengthscale);
    println!("sigma2\t{}", report.sigma2);
    println!("gamma_random\t{}", report.gamma_random);
    println!("gamma_greedy\t{}", report.gamma_greedy);
    println!("gamma\t{}", report.gamma);
    println!("bound\t{}", report.bound);
    println!("slack\t{}", report.slack);
    println!("random_samples\t{}", join(&report.random_samples));
    println!("greedy_samples\t{}", join(&report.greedy_samples));
    Ok(())
}

/// Eigenstructure report for the full n-point categorical Gram matrix.
pub fn spectrum(n: usize, lengthscale: f64) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Config("n must be at least 2".into()));
    }
    let check = categorical_spectrum_check(n, lengthscale);
    println!("categorical gram spectrum");
    println!("n\t{n}");
    println!("lengthscale\t{lengthscale}");
    println!("large\t{}\tanalytic\t{}", check.large, lengthscale.exp() + n as f64 - 1.0);
    println!("small\t{}\tanalytic\t{}", check.small, lengthscale.exp() - 1.0);
    println!("small_multiplicity\t{}", n - 1);
    println!("max_residual\t{}", check.max_residual);
    Ok(())
}

/// Regret curves of a stored run record against a known optimum.
pub fn regret(record_path: &Path, f_star: f64) -> Result<(), CliError> {
    let text = std::fs::read_to_string(record_path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", record_path.display())))?;
    let record: RunRecord<f64> = RunRecord::from_text(&text)
        .map_err(|e| CliError::Runtime(format!("bad record {}: {e}", record_path.display())))?;
    let curve = regret_curve(&record, f_star);

    println!("# per-evaluation simple regret vs f_star {f_star}");
    println!("evaluation\tsimple_regret");
    for (i, r) in curve.per_eval_simple.iter().enumerate() {
        println!("{}\t{}", i + 1, r);
    }
    if !curve.per_restart_simple.is_empty() {
        println!("# per-restart regret of archived local maxima");
        println!("restart\tsimple_regret\tcumulative");
        for (i, (r, c)) in curve
            .per_restart_simple
            .iter()
            .zip(curve.cumulative.iter())
            .enumerate()
        {
            println!("{}\t{}\t{}", i + 1, r, c);
        }
    }
    Ok(())
}
