//! Exact Gaussian-process regression on mixed inputs.
//!
//! The surrogate keeps raw targets plus frozen standardization constants;
//! all posterior quantities are computed on the standardized scale
//! `y~ = (y - mean)/std` with raw-scale accessors layered on top. Posterior
//! formulas are the usual exact-GP ones with prior mean zero:
//! `mu(z) = k*^T (K + s2 I)^-1 y~` and `var(z) = k(z,z) - ||L^-1 k*||^2`.
//!
//! Hyperparameters (lengthscales, output scale, noise variance) are fitted by
//! maximizing the log marginal likelihood with a multi-start first-order
//! optimizer in log-parameter space; gradients are analytic via
//! `dL/dtheta = 1/2 tr((aa^T - K^-1) dK/dtheta)`.

use rand::Rng;

use crate::error::GpError;
use crate::kernels::{
    combine, gram, pair_gradients, pair_parts, KernelChoice, KernelParams, ParamBounds,
};
use crate::linalg::{cholesky_with_jitter, chol_inverse, solve_lower, solve_lower_transpose, Mat};
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// Standardize targets: `y~ = (y - mean)/std` with the population standard
/// deviation; a zero std degenerates to 1 so constant targets map to zeros.
pub fn standardize<T: Real>(y_raw: &[T]) -> Result<(Vec<T>, T, T), GpError> {
    if y_raw.is_empty() {
        return Err(GpError::EmptyTargets);
    }
    let n = T::of(y_raw.len() as f64);
    let mean = y_raw.iter().copied().sum::<T>() / n;
    let var = y_raw
        .iter()
        .map(|&y| (y - mean) * (y - mean))
        .sum::<T>()
        / n;
    let mut std = var.sqrt();
    if !(std > T::zero()) {
        std = T::one();
    }
    let y_tilde = y_raw.iter().map(|&y| (y - mean) / std).collect();
    Ok((y_tilde, mean, std))
}

/// Relative jitter ladder for repairing near-singular covariance matrices.
const JITTER_START_REL: f64 = 1e-8;
const JITTER_MAX_REL: f64 = 1e-2;

/// Multi-start likelihood-fitting schedule.
const FIT_RESTARTS: usize = 5;
const FIT_MAX_STEPS: usize = 100;
const FIT_LEARNING_RATE: f64 = 0.03;
const FIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
struct Fitted<T> {
    chol: Mat<T>,
    alpha: Vec<T>,
    #[allow(dead_code)]
    jitter: T,
}

/// Exact GP surrogate over a mixed search space.
#[derive(Clone, Debug)]
pub struct SurrogateModel<T: Real> {
    space: SearchSpace<T>,
    kernel_choice: KernelChoice,
    params: KernelParams<T>,
    bounds: ParamBounds<T>,
    noise_variance: T,
    train_x: Vec<MixedPoint<T>>,
    train_y_raw: Vec<T>,
    y_mean: T,
    y_std: T,
    fitted: Option<Fitted<T>>,
}

impl<T: Real> SurrogateModel<T> {
    /// Build an empty model. The kernel choice must suit the space: the
    /// categorical and ordinal kernels ignore continuous inputs, so they are
    /// rejected on spaces that have any, and the ordinal choice additionally
    /// requires at least one dimension with an ordinal metric.
    pub fn new(
        space: SearchSpace<T>,
        kernel_choice: KernelChoice,
        ard_enabled: bool,
    ) -> Result<Self, GpError> {
        match kernel_choice {
            KernelChoice::Categorical | KernelChoice::Ordinal => {
                if space.d_h() == 0 {
                    return Err(GpError::Kernel(
                        "categorical/ordinal kernel needs categorical dimensions".into(),
                    ));
                }
                if space.d_x() > 0 {
                    return Err(GpError::Kernel(
                        "categorical/ordinal kernel cannot see continuous dimensions; use the mixed kernel".into(),
                    ));
                }
                if kernel_choice == KernelChoice::Ordinal && !space.has_ordinal_metrics() {
                    return Err(GpError::Kernel(
                        "ordinal kernel requires at least one ordinal metric".into(),
                    ));
                }
            }
            KernelChoice::Mixed => {}
        }
        let params = KernelParams::defaults(space.d_h(), space.d_x(), ard_enabled);
        Ok(SurrogateModel {
            space,
            kernel_choice,
            params,
            bounds: ParamBounds::default(),
            noise_variance: T::of(0.01),
            train_x: Vec::new(),
            train_y_raw: Vec::new(),
            y_mean: T::zero(),
            y_std: T::one(),
            fitted: None,
        })
    }

    pub fn space(&self) -> &SearchSpace<T> {
        &self.space
    }

    pub fn kernel_choice(&self) -> KernelChoice {
        self.kernel_choice
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn bounds(&self) -> &ParamBounds<T> {
        &self.bounds
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    /// Install hyperparameters directly (clamped into bounds); caches drop.
    pub fn set_params(&mut self, mut params: KernelParams<T>, noise_variance: T) {
        params.clamp_to(&self.bounds);
        self.params = params;
        self.noise_variance = noise_variance
            .max(self.bounds.noise_variance.0)
            .min(self.bounds.noise_variance.1);
        self.fitted = None;
    }

    pub fn n_train(&self) -> usize {
        self.train_x.len()
    }

    pub fn train_x(&self) -> &[MixedPoint<T>] {
        &self.train_x
    }

    pub fn train_y_raw(&self) -> &[T] {
        &self.train_y_raw
    }

    pub fn standardization(&self) -> (T, T) {
        (self.y_mean, self.y_std)
    }

    /// Freeze standardization constants computed from `sample` (typically the
    /// initial random evaluations of a restart).
    pub fn set_standardization_from(&mut self, sample: &[T]) -> Result<(), GpError> {
        let (_, mean, std) = standardize(sample)?;
        self.y_mean = mean;
        self.y_std = std;
        self.fitted = None;
        Ok(())
    }

    pub fn set_standardization(&mut self, mean: T, std: T) {
        self.y_mean = mean;
        self.y_std = if std > T::zero() { std } else { T::one() };
        self.fitted = None;
    }

    /// Replace the training set; caches drop.
    pub fn set_data(&mut self, xs: Vec<MixedPoint<T>>, ys_raw: Vec<T>) -> Result<(), GpError> {
        if xs.len() != ys_raw.len() {
            return Err(GpError::LengthMismatch {
                inputs: xs.len(),
                targets: ys_raw.len(),
            });
        }
        self.train_x = xs;
        self.train_y_raw = ys_raw;
        self.fitted = None;
        Ok(())
    }

    /// Append one observation; caches drop.
    pub fn push(&mut self, x: MixedPoint<T>, y_raw: T) {
        self.train_x.push(x);
        self.train_y_raw.push(y_raw);
        self.fitted = None;
    }

    /// Append a fantasized observation given on the standardized scale (used
    /// by batch proposal); the stored raw value de-standardizes it so the
    /// model round-trips back to `mu_std` exactly up to float error.
    pub fn hallucinate(&mut self, x: MixedPoint<T>, mu_std: T) {
        let raw = mu_std * self.y_std + self.y_mean;
        self.push(x, raw);
    }

    /// Standardized targets under the frozen constants.
    pub fn y_tilde(&self) -> Vec<T> {
        self.train_y_raw
            .iter()
            .map(|&y| (y - self.y_mean) / self.y_std)
            .collect()
    }

    /// Largest standardized target (the incumbent on the model scale).
    pub fn best_y_tilde(&self) -> Option<T> {
        self.train_y_raw
            .iter()
            .map(|&y| (y - self.y_mean) / self.y_std)
            .fold(None, |acc: Option<T>, v| match acc {
                Some(a) if a >= v => Some(a),
                _ => Some(v),
            })
    }

    fn factorize(&self, params: &KernelParams<T>, noise: T) -> Result<(Mat<T>, T), GpError> {
        let mut k = gram(&self.train_x, params, &self.space, self.kernel_choice)?;
        let n = k.rows();
        for i in 0..n {
            k[(i, i)] = k[(i, i)] + noise;
        }
        cholesky_with_jitter(&k, T::of(JITTER_START_REL), T::of(JITTER_MAX_REL)).map_err(
            |pivot| GpError::Cholesky {
                pivot,
                max_jitter: JITTER_MAX_REL * k.mean_diag().as_f64(),
            },
        )
    }

    /// Recompute the Cholesky factor and `alpha` at the current parameters.
    pub fn refresh(&mut self) -> Result<(), GpError> {
        if self.train_x.is_empty() {
            self.fitted = None;
            return Ok(());
        }
        let (chol, jitter) = self.factorize(&self.params, self.noise_variance)?;
        let y = self.y_tilde();
        let tmp = solve_lower(&chol, &y);
        let alpha = solve_lower_transpose(&chol, &tmp);
        self.fitted = Some(Fitted { chol, alpha, jitter });
        Ok(())
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Posterior mean and variance on the standardized scale. With no
    /// training data this is the prior `(0, k(z,z))`; otherwise requires a
    /// cached factorization (`fit` or `refresh`).
    pub fn posterior(&self, z: &MixedPoint<T>) -> Result<(T, T), GpError> {
        let kzz = combine(
            &pair_parts(z, z, &self.params, &self.space, self.kernel_choice)?,
            &self.params,
            &self.space,
            self.kernel_choice,
        );
        if self.train_x.is_empty() {
            return Ok((T::zero(), kzz));
        }
        let fitted = self.fitted.as_ref().ok_or(GpError::NotFitted)?;
        let n = self.train_x.len();
        let mut kstar = vec![T::zero(); n];
        for (i, xi) in self.train_x.iter().enumerate() {
            kstar[i] = combine(
                &pair_parts(z, xi, &self.params, &self.space, self.kernel_choice)?,
                &self.params,
                &self.space,
                self.kernel_choice,
            );
        }
        let mu = kstar
            .iter()
            .zip(fitted.alpha.iter())
            .map(|(&a, &b)| a * b)
            .sum::<T>();
        let v = solve_lower(&fitted.chol, &kstar);
        let quad = v.iter().map(|&x| x * x).sum::<T>();
        let var = (kzz - quad).max(T::zero());
        Ok((mu, var))
    }

    /// Posterior on the raw target scale.
    pub fn posterior_raw(&self, z: &MixedPoint<T>) -> Result<(T, T), GpError> {
        let (mu, var) = self.posterior(z)?;
        Ok((mu * self.y_std + self.y_mean, var * self.y_std * self.y_std))
    }

    /// Log marginal likelihood at the current hyperparameters.
    pub fn log_marginal_likelihood(&self) -> Result<T, GpError> {
        let y = self.y_tilde();
        self.lml_value(&self.params, self.noise_variance, &y)
    }

    /// Log marginal likelihood and its gradient with respect to the log of
    /// every hyperparameter, packed `[cat ls..., cont ls..., outputscale,
    /// noise]`, evaluated at the supplied values instead of the stored ones.
    pub fn lml_with_gradient(
        &self,
        params: &KernelParams<T>,
        noise: T,
    ) -> Result<(T, Vec<T>), GpError> {
        let y = self.y_tilde();
        if y.is_empty() {
            return Err(GpError::EmptyTargets);
        }
        self.lml_and_grad(params, noise, &y)
    }

    fn lml_value(&self, params: &KernelParams<T>, noise: T, y: &[T]) -> Result<T, GpError> {
        let n = y.len();
        if n == 0 {
            return Err(GpError::EmptyTargets);
        }
        let (chol, _) = self.factorize(params, noise)?;
        let tmp = solve_lower(&chol, y);
        let alpha = solve_lower_transpose(&chol, &tmp);
        let fit_term = y
            .iter()
            .zip(alpha.iter())
            .map(|(&a, &b)| a * b)
            .sum::<T>();
        let half = T::of(0.5);
        let mut logdet_half = T::zero();
        for i in 0..n {
            logdet_half = logdet_half + chol[(i, i)].ln();
        }
        let two_pi = T::of(std::f64::consts::TAU);
        Ok(-half * fit_term - logdet_half - half * T::of(n as f64) * two_pi.ln())
    }

    /// Log marginal likelihood and its gradient with respect to the log of
    /// every hyperparameter, packed `[cat ls..., cont ls..., outputscale,
    /// noise]`. One fused pass accumulates all kernel-parameter gradients.
    fn lml_and_grad(
        &self,
        params: &KernelParams<T>,
        noise: T,
        y: &[T],
    ) -> Result<(T, Vec<T>), GpError> {
        let n = y.len();
        let (chol, _) = self.factorize(params, noise)?;
        let tmp = solve_lower(&chol, y);
        let alpha = solve_lower_transpose(&chol, &tmp);
        let half = T::of(0.5);
        let fit_term = y
            .iter()
            .zip(alpha.iter())
            .map(|(&a, &b)| a * b)
            .sum::<T>();
        let mut logdet_half = T::zero();
        for i in 0..n {
            logdet_half = logdet_half + chol[(i, i)].ln();
        }
        let two_pi = T::of(std::f64::consts::TAU);
        let lml = -half * fit_term - logdet_half - half * T::of(n as f64) * two_pi.ln();

        // M = alpha alpha^T - K^-1; dL/dtheta = 1/2 tr(M dK/dtheta).
        let kinv = chol_inverse(&chol);
        let n_kernel = params.cat_lengthscales.len() + params.cont_lengthscales.len() + 1;
        let mut grad = vec![T::zero(); n_kernel + 1];
        let mut pair = vec![T::zero(); n_kernel];
        let two = T::of(2.0);
        for i in 0..n {
            for j in 0..=i {
                let m_ij = alpha[i] * alpha[j] - kinv[(i, j)];
                let weight = if i == j { half } else { half * two };
                pair_gradients(
                    &self.train_x[i],
                    &self.train_x[j],
                    params,
                    &self.space,
                    self.kernel_choice,
                    &mut pair,
                )?;
                for (g, &p) in grad[..n_kernel].iter_mut().zip(pair.iter()) {
                    *g = *g + weight * m_ij * p;
                }
            }
            // dK/d(noise) = I.
            grad[n_kernel] = grad[n_kernel] + half * (alpha[i] * alpha[i] - kinv[(i, i)]);
        }

        // Chain rule to log-space: dL/dlog(theta) = theta * dL/dtheta.
        let theta = pack(params, noise);
        for (g, &t) in grad.iter_mut().zip(theta.iter()) {
            *g = *g * t;
        }
        Ok((lml, grad))
    }

    /// Fit hyperparameters by multi-start gradient ascent on the log marginal
    /// likelihood. Start 0 warm-starts from the current parameters; the best
    /// parameters over every iterate of every start win, so the fitted
    /// likelihood never falls below the warm-start value.
    pub fn fit<R: Rng>(&mut self, rng: &mut R) -> Result<(), GpError> {
        if self.train_x.len() < 2 {
            return Err(GpError::TooFewPoints {
                needed: 2,
                have: self.train_x.len(),
            });
        }
        let y = self.y_tilde();
        let (lo, hi) = self.log_bounds();
        let warm = pack(&self.params, self.noise_variance);

        let mut best: Option<(T, Vec<T>)> = None;
        let mut last_err = None;
        for start in 0..FIT_RESTARTS {
            let mut theta: Vec<T> = if start == 0 {
                warm.iter().map(|&t| t.ln()).collect()
            } else {
                lo.iter()
                    .zip(hi.iter())
                    .map(|(&l, &h)| l + (h - l) * T::of(rng.gen::<f64>()))
                    .collect()
            };
            clamp_vec(&mut theta, &lo, &hi);
            if let Err(e) = self.ascend(&mut theta, &lo, &hi, &y, &mut best) {
                last_err = Some(e);
            }
        }
        match best {
            Some((_, theta)) => {
                let (params, noise) = unpack(&self.params, &theta);
                self.params = params;
                self.noise_variance = noise;
                self.refresh()
            }
            None => Err(last_err.unwrap_or(GpError::FitFailed)),
        }
    }

    /// One Adam ascent from `theta` (log-space, already clamped), tracking the
    /// best evaluated iterate in `best`.
    fn ascend(
        &self,
        theta: &mut Vec<T>,
        lo: &[T],
        hi: &[T],
        y: &[T],
        best: &mut Option<(T, Vec<T>)>,
    ) -> Result<(), GpError> {
        let dim = theta.len();
        let mut m = vec![T::zero(); dim];
        let mut v = vec![T::zero(); dim];
        let beta1 = T::of(0.9);
        let beta2 = T::of(0.999);
        let eps = T::of(1e-8);
        let lr = T::of(FIT_LEARNING_RATE);
        let tol = T::of(FIT_TOL);
        let mut prev_l: Option<T> = None;
        for step in 1..=FIT_MAX_STEPS {
            let raw: Vec<T> = theta.iter().map(|&t| t.exp()).collect();
            let (params, noise) = unpack(&self.params, &raw);
            let (l, grad) = self.lml_and_grad(&params, noise, y)?;
            if best.as_ref().map_or(true, |(b, _)| l > *b) {
                *best = Some((l, raw.clone()));
            }
            if let Some(p) = prev_l {
                if (l - p).abs() < tol {
                    return Ok(());
                }
            }
            prev_l = Some(l);
            let t = T::of(step as f64);
            for k in 0..dim {
                m[k] = beta1 * m[k] + (T::one() - beta1) * grad[k];
                v[k] = beta2 * v[k] + (T::one() - beta2) * grad[k] * grad[k];
                let m_hat = m[k] / (T::one() - beta1.powf(t));
                let v_hat = v[k] / (T::one() - beta2.powf(t));
                theta[k] = theta[k] + lr * m_hat / (v_hat.sqrt() + eps);
            }
            clamp_vec(theta, lo, hi);
        }
        Ok(())
    }

    fn log_bounds(&self) -> (Vec<T>, Vec<T>) {
        let b = &self.bounds;
        let n_cat = self.params.cat_lengthscales.len();
        let n_cont = self.params.cont_lengthscales.len();
        let mut lo = Vec::with_capacity(n_cat + n_cont + 2);
        let mut hi = Vec::with_capacity(n_cat + n_cont + 2);
        for _ in 0..n_cat {
            lo.push(b.cat_lengthscale.0.ln());
            hi.push(b.cat_lengthscale.1.ln());
        }
        for _ in 0..n_cont {
            lo.push(b.cont_lengthscale.0.ln());
            hi.push(b.cont_lengthscale.1.ln());
        }
        lo.push(b.outputscale.0.ln());
        hi.push(b.outputscale.1.ln());
        lo.push(b.noise_variance.0.ln());
        hi.push(b.noise_variance.1.ln());
        (lo, hi)
    }
}

fn clamp_vec<T: Real>(theta: &mut [T], lo: &[T], hi: &[T]) {
    for ((t, &l), &h) in theta.iter_mut().zip(lo.iter()).zip(hi.iter()) {
        *t = (*t).max(l).min(h);
    }
}

/// Raw parameter vector `[cat ls..., cont ls..., outputscale, noise]`.
fn pack<T: Real>(params: &KernelParams<T>, noise: T) -> Vec<T> {
    let mut v = Vec::with_capacity(
        params.cat_lengthscales.len() + params.cont_lengthscales.len() + 2,
    );
    v.extend_from_slice(&params.cat_lengthscales);
    v.extend_from_slice(&params.cont_lengthscales);
    v.push(params.outputscale);
    v.push(noise);
    v
}

fn unpack<T: Real>(template: &KernelParams<T>, raw: &[T]) -> (KernelParams<T>, T) {
    let n_cat = template.cat_lengthscales.len();
    let n_cont = template.cont_lengthscales.len();
    let params = KernelParams {
        cat_lengthscales: raw[..n_cat].to_vec(),
        cont_lengthscales: raw[n_cat..n_cat + n_cont].to_vec(),
        outputscale: raw[n_cat + n_cont],
        lambda: template.lambda,
        ard_enabled: template.ard_enabled,
    };
    (params, raw[n_cat + n_cont + 1])
}
