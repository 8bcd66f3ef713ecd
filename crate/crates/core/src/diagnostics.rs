//! Executable checks of the theory behind the optimizer: information gain
//! and its categorical bound, the categorical Gram eigenstructure, and
//! regret bookkeeping over run records.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::GpError;
use crate::kernels::{gram, KernelChoice, KernelParams};
use crate::linalg::cholesky_with_jitter;
use crate::record::RunRecord;
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// Jitter ladder bounds, matching the surrogate's solver.
const JITTER_START_REL: f64 = 1e-8;
const JITTER_MAX_REL: f64 = 1e-2;

/// Information gain of a sample set: ½ log|I + σ⁻²K|.
///
/// Computed through a Cholesky factorization of `I + σ⁻²K`; a jitter ladder
/// is climbed on numerical failure before giving up. The result is clamped
/// to be nonnegative (the matrix dominates the identity, so the exact value
/// cannot be negative).
pub fn info_gain<T: Real>(
    points: &[MixedPoint<T>],
    space: &SearchSpace<T>,
    choice: KernelChoice,
    params: &KernelParams<T>,
    sigma2: T,
) -> Result<T, GpError> {
    assert!(!points.is_empty(), "information gain needs a sample set");
    assert!(sigma2 > T::zero(), "noise variance must be positive");
    let k = gram(points, params, space, choice)?;
    let n = points.len();
    let mut m = k;
    let inv_sigma2 = T::one() / sigma2;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = m[(i, j)] * inv_sigma2;
        }
        m[(i, i)] = m[(i, i)] + T::one();
    }
    let (l, _) = cholesky_with_jitter(&m, T::of(JITTER_START_REL), T::of(JITTER_MAX_REL))
        .map_err(|pivot| GpError::Cholesky {
            pivot,
            max_jitter: JITTER_MAX_REL * m.mean_diag().as_f64(),
        })?;
    let mut log_det_half = T::zero();
    for i in 0..n {
        log_det_half = log_det_half + l[(i, i)].ln();
    }
    Ok(log_det_half.max(T::zero()))
}

/// Outcome of the categorical information-gain bound check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoGainReport<T> {
    /// Number of categories of the single variable.
    pub n: usize,
    /// Sample-set size.
    pub t: usize,
    pub lengthscale: T,
    pub sigma2: T,
    /// The random sample set (category values) and its gain.
    pub random_samples: Vec<usize>,
    pub gamma_random: T,
    /// The greedily gain-maximizing set and its gain.
    pub greedy_samples: Vec<usize>,
    pub gamma_greedy: T,
    /// Worst observed gain: max of the two above.
    pub gamma: T,
    /// n·log(1 + σ⁻²·T·(eˡ + n − 1)).
    pub bound: T,
    /// bound − gamma; nonnegative whenever the theory applies.
    pub slack: T,
}

fn single_categorical_setup<T: Real>(
    n: usize,
    lengthscale: T,
) -> (SearchSpace<T>, KernelParams<T>) {
    let space =
        SearchSpace::categorical(vec![n]).expect("single categorical dimension always valid");
    let params = KernelParams {
        cat_lengthscales: vec![lengthscale],
        cont_lengthscales: Vec::new(),
        outputscale: T::one(),
        lambda: T::of(0.5),
        ard_enabled: true,
    };
    (space, params)
}

fn gain_of_values<T: Real>(
    values: &[usize],
    space: &SearchSpace<T>,
    params: &KernelParams<T>,
    sigma2: T,
) -> T {
    let points: Vec<MixedPoint<T>> = values
        .iter()
        .map(|&v| MixedPoint::categorical(vec![v]))
        .collect();
    info_gain(&points, space, KernelChoice::Categorical, params, sigma2)
        .expect("identity-dominated matrix cannot fail to factor")
}

/// Check the information-gain bound for one categorical variable with `n`
/// values: draws a uniform random sample set of size `t`, builds a greedy
/// gain-maximizing set of the same size, and verifies both gains against
/// n·log(1 + σ⁻²·t·(eˡ + n − 1)). Panics if either gain exceeds the bound,
/// which would falsify the theory this engine's regret guarantees rest on.
pub fn check_categorical_gain_bound<T: Real, R: Rng>(
    n: usize,
    t: usize,
    lengthscale: T,
    sigma2: T,
    rng: &mut R,
) -> InfoGainReport<T> {
    assert!(n >= 2, "need at least two categories");
    assert!(t >= 1, "need at least one sample");
    let (space, params) = single_categorical_setup(n, lengthscale);

    let random_samples: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n)).collect();
    let gamma_random = gain_of_values(&random_samples, &space, &params, sigma2);

    // Greedy adversary: grow the set one value at a time, always picking the
    // category that maximizes the joint gain.
    let mut greedy_samples: Vec<usize> = Vec::with_capacity(t);
    for _ in 0..t {
        let mut best: Option<(usize, T)> = None;
        for v in 0..n {
            greedy_samples.push(v);
            let g = gain_of_values(&greedy_samples, &space, &params, sigma2);
            greedy_samples.pop();
            if best.map_or(true, |(_, bg)| g > bg) {
                best = Some((v, g));
            }
        }
        greedy_samples.push(best.expect("n >= 2 candidates").0);
    }
    let gamma_greedy = gain_of_values(&greedy_samples, &space, &params, sigma2);

    let gamma = gamma_random.max(gamma_greedy);
    let bound = T::of(n as f64)
        * (T::one() + (T::one() / sigma2) * T::of(t as f64) * (lengthscale.exp() + T::of(n as f64) - T::one()))
            .ln();
    let slack = bound - gamma;
    assert!(
        slack >= T::zero(),
        "information-gain bound violated: gamma {gamma:?} > bound {bound:?} (n={n}, t={t})"
    );
    InfoGainReport {
        n,
        t,
        lengthscale,
        sigma2,
        random_samples,
        gamma_random,
        greedy_samples,
        gamma_greedy,
        gamma,
        bound,
        slack,
    }
}

/// Regrets extracted from a run record against a known optimum `f_star`
/// (given on the natural objective scale of the run).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve<T> {
    /// f* − incumbent after each evaluation (internal maximization scale, so
    /// identical to natural-scale simple regret).
    pub per_eval_simple: Vec<T>,
    /// Simple regret of each completed restart's archived local maximum.
    pub per_restart_simple: Vec<T>,
    /// Cumulative restart regret: R_I = Σ_{j ≤ I} per_restart_simple[j].
    pub cumulative: Vec<T>,
}

/// Compute simple and cumulative regrets for a record. Completed restarts
/// are read from the archive; a record whose run never restarted gets the
/// per-evaluation curve only.
pub fn regret_curve<T: Real>(record: &RunRecord<T>, f_star: T) -> RegretCurve<T> {
    let f_star_internal = if record.minimize { -f_star } else { f_star };
    let per_eval_simple = record
        .evaluations
        .iter()
        .map(|e| f_star_internal - e.incumbent)
        .collect();
    let per_restart_simple: Vec<T> = record
        .archive
        .entries()
        .iter()
        .map(|e| f_star_internal - e.value)
        .collect();
    let mut cumulative = Vec::with_capacity(per_restart_simple.len());
    let mut total = T::zero();
    for &r in &per_restart_simple {
        total = total + r;
        cumulative.push(total);
    }
    RegretCurve {
        per_eval_simple,
        per_restart_simple,
        cumulative,
    }
}

/// Eigenstructure of the full categorical Gram on all `n` distinct values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck<T> {
    /// The simple eigenvalue eˡ + n − 1 (uniform eigenvector).
    pub large: T,
    /// The (n−1)-fold eigenvalue eˡ − 1 (difference eigenvectors).
    pub small: T,
    /// Largest residual ‖Kv − λv‖∞ over a spanning set of eigenvectors.
    pub max_residual: T,
}

/// Verify that the Gram matrix of all `n` category values under the
/// exponentiated-overlap kernel has spectrum {eˡ+n−1, (eˡ−1)×(n−1)}.
///
/// The analytic eigenpairs are checked by residual: the uniform vector for
/// the large eigenvalue and the n−1 difference vectors e₀−eₖ for the small
/// one. Those n vectors span the space, so small residuals certify the whole
/// spectrum.
pub fn categorical_spectrum_check<T: Real>(n: usize, lengthscale: T) -> SpectrumCheck<T> {
    assert!(n >= 2, "need at least two categories");
    let (space, params) = single_categorical_setup(n, lengthscale);
    let points: Vec<MixedPoint<T>> = (0..n).map(|v| MixedPoint::categorical(vec![v])).collect();
    let k = gram(&points, &params, &space, KernelChoice::Categorical)
        .expect("full categorical gram always well formed");

    let e_l = lengthscale.exp();
    let large = e_l + T::of(n as f64) - T::one();
    let small = e_l - T::one();

    let mut max_residual = T::zero();
    // Uniform eigenvector for the large eigenvalue.
    for i in 0..n {
        let mut row_sum = T::zero();
        for j in 0..n {
            row_sum = row_sum + k[(i, j)];
        }
        max_residual = max_residual.max((row_sum - large).abs());
    }
    // Difference vectors e0 − ek for the small eigenvalue.
    for target in 1..n {
        for i in 0..n {
            let kv = k[(i, 0)] - k[(i, target)];
            let v_i = if i == 0 {
                T::one()
            } else if i == target {
                -T::one()
            } else {
                T::zero()
            };
            max_residual = max_residual.max((kv - small * v_i).abs());
        }
    }
    SpectrumCheck {
        large,
        small,
        max_residual,
    }
}
