//! Covariance functions for categorical, ordinal, continuous and mixed inputs.
//!
//! The categorical kernel is an exponentiated mean of per-dimension overlap
//! indicators, `k_h(h,h') = exp( (1/d_h) sum_i l_i * delta(h_i,h'_i) )`, with
//! per-dimension lengthscales `l_i` when ARD is enabled. The ordinal variant
//! replaces the indicator with `1 - |h_i-h'_i| / max|h_i-h'_i|`. Continuous
//! dimensions use Matern-5/2 with ARD. Mixed inputs combine the two as
//! `lambda * (k_h * k_x) + (1-lambda) * (k_h + k_x)`, and a single output
//! scale multiplies whichever combination is in effect.

use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// Box constraints for all kernel hyperparameters plus the noise variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds<T> {
    pub cat_lengthscale: (T, T),
    pub cont_lengthscale: (T, T),
    pub outputscale: (T, T),
    pub noise_variance: (T, T),
}

impl<T: Real> Default for ParamBounds<T> {
    fn default() -> Self {
        ParamBounds {
            cat_lengthscale: (T::of(1e-3), T::of(5.0)),
            cont_lengthscale: (T::of(0.01), T::of(0.5)),
            outputscale: (T::of(0.5), T::of(5.0)),
            noise_variance: (T::of(1e-5), T::of(0.1)),
        }
    }
}

/// Which covariance structure the surrogate uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    /// Kronecker overlap on every categorical dimension (continuous part ignored
    /// only if absent; requires a purely categorical space).
    Categorical,
    /// Ordinal similarity on dimensions that carry a metric, Kronecker elsewhere.
    Ordinal,
    /// Product/sum mixture for mixed spaces; degenerates to the categorical or
    /// Matern kernel when one side is absent.
    Mixed,
}

/// Kernel hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<T> {
    /// One per categorical dimension when `ard_enabled`, otherwise a single
    /// shared lengthscale (empty for purely continuous spaces).
    pub cat_lengthscales: Vec<T>,
    /// One per continuous dimension, always ARD.
    pub cont_lengthscales: Vec<T>,
    /// Single variance multiplying the combined kernel.
    pub outputscale: T,
    /// Mixed-kernel trade-off in `[0,1]`.
    pub lambda: T,
    pub ard_enabled: bool,
}

impl<T: Real> KernelParams<T> {
    /// Mid-of-bounds defaults for a given space.
    pub fn defaults(d_h: usize, d_x: usize, ard_enabled: bool) -> Self {
        let b = ParamBounds::<T>::default();
        let n_cat = if d_h == 0 {
            0
        } else if ard_enabled {
            d_h
        } else {
            1
        };
        let half = T::of(0.5);
        KernelParams {
            cat_lengthscales: vec![(b.cat_lengthscale.0 + b.cat_lengthscale.1) * half; n_cat],
            cont_lengthscales: vec![(b.cont_lengthscale.0 + b.cont_lengthscale.1) * half; d_x],
            outputscale: (b.outputscale.0 + b.outputscale.1) * half,
            lambda: half,
            ard_enabled,
        }
    }

    /// Lengthscale for categorical dimension `dim` (shared or ARD).
    pub fn cat_ls(&self, dim: usize) -> T {
        if self.ard_enabled {
            self.cat_lengthscales[dim]
        } else {
            self.cat_lengthscales[0]
        }
    }

    pub fn clamp_to(&mut self, bounds: &ParamBounds<T>) {
        for l in &mut self.cat_lengthscales {
            *l = l.max(bounds.cat_lengthscale.0).min(bounds.cat_lengthscale.1);
        }
        for l in &mut self.cont_lengthscales {
            *l = l
                .max(bounds.cont_lengthscale.0)
                .min(bounds.cont_lengthscale.1);
        }
        self.outputscale = self
            .outputscale
            .max(bounds.outputscale.0)
            .min(bounds.outputscale.1);
        self.lambda = self.lambda.max(T::zero()).min(T::one());
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), SpaceError> {
    if expected == got {
        Ok(())
    } else {
        Err(SpaceError::DimensionMismatch { expected, got })
    }
}

/// Per-dimension similarity: Kronecker indicator, or `1 - d/d_max` where an
/// ordinal metric applies.
fn similarity<T: Real>(
    space: Option<&SearchSpace<T>>,
    use_ordinal: bool,
    dim: usize,
    a: usize,
    b: usize,
) -> T {
    if use_ordinal {
        if let Some(metric) = space.and_then(|s| s.ordinal_metric(dim)) {
            let card = space.expect("space present").card(dim);
            let dmax = metric.max_distance(card);
            return T::one() - metric.distance(a, b) / dmax;
        }
    }
    if a == b {
        T::one()
    } else {
        T::zero()
    }
}

fn k_cat_core<T: Real>(
    h: &[usize],
    h2: &[usize],
    params: &KernelParams<T>,
    space: Option<&SearchSpace<T>>,
    use_ordinal: bool,
) -> Result<T, SpaceError> {
    check_len(h.len(), h2.len())?;
    let d_h = h.len();
    let mut acc = T::zero();
    for i in 0..d_h {
        acc = acc + params.cat_ls(i) * similarity(space, use_ordinal, i, h[i], h2[i]);
    }
    Ok((acc / T::of(d_h as f64)).exp())
}

/// Exponentiated-overlap categorical kernel (no output scale).
pub fn k_categorical<T: Real>(
    h: &[usize],
    h2: &[usize],
    params: &KernelParams<T>,
) -> Result<T, SpaceError> {
    k_cat_core(h, h2, params, None, false)
}

/// Ordinal kernel: dimensions with a metric use `1 - d/d_max`, others fall
/// back to the Kronecker indicator (no output scale).
pub fn k_ordinal<T: Real>(
    h: &[usize],
    h2: &[usize],
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
) -> Result<T, SpaceError> {
    k_cat_core(h, h2, params, Some(space), true)
}

/// Matern-5/2 with ARD lengthscales (no output scale); `k(x,x) = 1`.
pub fn k_matern52<T: Real>(
    x: &[T],
    x2: &[T],
    params: &KernelParams<T>,
) -> Result<T, SpaceError> {
    check_len(x.len(), x2.len())?;
    let r = matern_r(x, x2, params);
    Ok(matern_of_r(r))
}

fn matern_r<T: Real>(x: &[T], x2: &[T], params: &KernelParams<T>) -> T {
    let mut r2 = T::zero();
    for j in 0..x.len() {
        let d = (x[j] - x2[j]) / params.cont_lengthscales[j];
        r2 = r2 + d * d;
    }
    r2.sqrt()
}

fn matern_of_r<T: Real>(r: T) -> T {
    let sqrt5 = T::of(5.0).sqrt();
    let five_thirds = T::of(5.0 / 3.0);
    (T::one() + sqrt5 * r + five_thirds * r * r) * (-sqrt5 * r).exp()
}

/// Mixed kernel, including the output scale:
/// `outputscale * (lambda * k_h * k_x + (1-lambda) * (k_h + k_x))`.
/// Purely categorical or purely continuous spaces bypass the combination and
/// return `outputscale * k_h` or `outputscale * k_x`.
pub fn k_mixed<T: Real>(
    z: &MixedPoint<T>,
    z2: &MixedPoint<T>,
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
) -> Result<T, SpaceError> {
    kernel_value(z, z2, params, space, KernelChoice::Mixed)
}

/// Full kernel dispatch; applies the output scale exactly once.
pub fn kernel_value<T: Real>(
    z: &MixedPoint<T>,
    z2: &MixedPoint<T>,
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
) -> Result<T, SpaceError> {
    let parts = pair_parts(z, z2, params, space, choice)?;
    Ok(combine(&parts, params, space, choice))
}

/// Raw sub-kernel values for one pair, shared by value and gradient paths.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairParts<T> {
    /// Categorical part (1 when the space has no categorical dimensions).
    pub k_h: T,
    /// Continuous part (1 when the space has no continuous dimensions).
    pub k_x: T,
    /// Matern radius for the continuous part.
    pub r: T,
}

pub(crate) fn pair_parts<T: Real>(
    z: &MixedPoint<T>,
    z2: &MixedPoint<T>,
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
) -> Result<PairParts<T>, SpaceError> {
    let use_ordinal = matches!(choice, KernelChoice::Ordinal | KernelChoice::Mixed);
    let k_h = if space.d_h() > 0 {
        k_cat_core(&z.cats, &z2.cats, params, Some(space), use_ordinal)?
    } else {
        T::one()
    };
    let (k_x, r) = if space.d_x() > 0 {
        check_len(z.conts.len(), z2.conts.len())?;
        let r = matern_r(&z.conts, &z2.conts, params);
        (matern_of_r(r), r)
    } else {
        (T::one(), T::zero())
    };
    Ok(PairParts { k_h, k_x, r })
}

pub(crate) fn combine<T: Real>(
    parts: &PairParts<T>,
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
) -> T {
    let s = params.outputscale;
    match choice {
        KernelChoice::Categorical | KernelChoice::Ordinal => s * parts.k_h,
        KernelChoice::Mixed => {
            if space.d_h() == 0 {
                s * parts.k_x
            } else if space.d_x() == 0 {
                s * parts.k_h
            } else {
                let lam = params.lambda;
                s * (lam * parts.k_h * parts.k_x
                    + (T::one() - lam) * (parts.k_h + parts.k_x))
            }
        }
    }
}

/// Identifies one scalar hyperparameter of the kernel (the noise variance is
/// handled by the GP layer, whose gradient is the identity matrix).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperParam {
    CatLengthscale(usize),
    ContLengthscale(usize),
    Outputscale,
}

/// Gram matrix of `points`, exactly symmetric by construction (the lower
/// triangle is computed and mirrored).
pub fn gram<T: Real>(
    points: &[MixedPoint<T>],
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
) -> Result<Mat<T>, SpaceError> {
    let n = points.len();
    let mut k = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            k[(i, j)] = kernel_value(&points[i], &points[j], params, space, choice)?;
        }
    }
    k.symmetrize_from_lower();
    Ok(k)
}

/// Analytic `dK/dtheta` for every kernel hyperparameter, in the order
/// `[cat lengthscales..., cont lengthscales..., outputscale]`.
pub fn gram_gradients<T: Real>(
    points: &[MixedPoint<T>],
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
) -> Result<Vec<(HyperParam, Mat<T>)>, SpaceError> {
    let n = points.len();
    let n_cat = params.cat_lengthscales.len();
    let n_cont = params.cont_lengthscales.len();
    let mut out: Vec<(HyperParam, Mat<T>)> = Vec::with_capacity(n_cat + n_cont + 1);
    for i in 0..n_cat {
        out.push((HyperParam::CatLengthscale(i), Mat::zeros(n, n)));
    }
    for j in 0..n_cont {
        out.push((HyperParam::ContLengthscale(j), Mat::zeros(n, n)));
    }
    out.push((HyperParam::Outputscale, Mat::zeros(n, n)));

    let mut grads_at = vec![T::zero(); n_cat + n_cont + 1];
    for a in 0..n {
        for b in 0..=a {
            pair_gradients(
                &points[a],
                &points[b],
                params,
                space,
                choice,
                &mut grads_at,
            )?;
            for (slot, &g) in out.iter_mut().zip(grads_at.iter()) {
                slot.1[(a, b)] = g;
            }
        }
    }
    for slot in &mut out {
        slot.1.symmetrize_from_lower();
    }
    Ok(out)
}

/// Gradients of the full kernel value for one pair with respect to raw (not
/// log) hyperparameters, written into `grads` in gram_gradients order.
pub(crate) fn pair_gradients<T: Real>(
    z: &MixedPoint<T>,
    z2: &MixedPoint<T>,
    params: &KernelParams<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
    grads: &mut [T],
) -> Result<(), SpaceError> {
    let parts = pair_parts(z, z2, params, space, choice)?;
    let value = combine(&parts, params, space, choice);
    let s = params.outputscale;
    let d_h = space.d_h();
    let d_x = space.d_x();
    let n_cat = params.cat_lengthscales.len();
    let lam = params.lambda;

    // Factor multiplying dk_h/dtheta and dk_x/dtheta in the combined kernel.
    let (cat_factor, cont_factor) = match choice {
        KernelChoice::Categorical | KernelChoice::Ordinal => (s, T::zero()),
        KernelChoice::Mixed => {
            if d_h == 0 {
                (T::zero(), s)
            } else if d_x == 0 {
                (s, T::zero())
            } else {
                (
                    s * (lam * parts.k_x + (T::one() - lam)),
                    s * (lam * parts.k_h + (T::one() - lam)),
                )
            }
        }
    };

    let use_ordinal = matches!(choice, KernelChoice::Ordinal | KernelChoice::Mixed);
    // dk_h/dl_i = k_h * sim_i / d_h; shared lengthscales accumulate over dims.
    for g in grads[..n_cat].iter_mut() {
        *g = T::zero();
    }
    if d_h > 0 && cat_factor != T::zero() {
        let inv_dh = T::one() / T::of(d_h as f64);
        for i in 0..d_h {
            let sim = similarity(Some(space), use_ordinal, i, z.cats[i], z2.cats[i]);
            let slot = if params.ard_enabled { i } else { 0 };
            grads[slot] = grads[slot] + cat_factor * parts.k_h * sim * inv_dh;
        }
    }

    // dk_x/dls_j = (5/3)(1 + sqrt5 r) exp(-sqrt5 r) * d_j^2 / ls_j^3.
    if d_x > 0 {
        let sqrt5 = T::of(5.0).sqrt();
        let common = T::of(5.0 / 3.0) * (T::one() + sqrt5 * parts.r) * (-sqrt5 * parts.r).exp();
        for j in 0..d_x {
            let ls = params.cont_lengthscales[j];
            let d = z.conts[j] - z2.conts[j];
            grads[n_cat + j] = cont_factor * common * d * d / (ls * ls * ls);
        }
    }

    // d(value)/d(outputscale) = value / s.
    grads[n_cat + d_x] = value / s;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn params_cat(ls: Vec<f64>) -> KernelParams<f64> {
        KernelParams {
            cat_lengthscales: ls,
            cont_lengthscales: vec![],
            outputscale: 1.0,
            lambda: 0.5,
            ard_enabled: true,
        }
    }

    #[test]
    fn categorical_kernel_hand_values() {
        let p = params_cat(vec![0.7, 0.7, 0.7]);
        let k_same = k_categorical(&[1, 2, 0], &[1, 2, 0], &p).unwrap();
        assert_relative_eq!(k_same, 0.7f64.exp(), epsilon = 1e-15);
        let k_disjoint = k_categorical(&[0, 0, 0], &[1, 1, 1], &p).unwrap();
        assert_relative_eq!(k_disjoint, 1.0, epsilon = 1e-15);
        // d_h = 2, lengthscales ln4 and ln9, matching only dimension 0.
        let p2 = params_cat(vec![4.0f64.ln(), 9.0f64.ln()]);
        let k = k_categorical(&[0, 0], &[0, 1], &p2).unwrap();
        assert_relative_eq!(k, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn categorical_kernel_range_and_diagonal_dominance() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let p = params_cat(vec![2.0, 0.3, 1.1, 0.05]);
        let max_l = 2.0f64;
        for _ in 0..500 {
            let h: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            let h2: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            let k = k_categorical(&h, &h2, &p).unwrap();
            assert!(k >= 1.0 && k <= max_l.exp() + 1e-12);
            let kd = k_categorical(&h, &h, &p).unwrap();
            assert!(kd >= k);
        }
    }

    #[test]
    fn ordinal_kernel_hand_values() {
        let space = SearchSpace::<f64>::ordinal(vec![5]).unwrap();
        let p = params_cat(vec![1.0]);
        let same = k_ordinal(&[2], &[2], &p, &space).unwrap();
        assert_relative_eq!(same, 1.0f64.exp(), epsilon = 1e-15);
        let extreme = k_ordinal(&[0], &[4], &p, &space).unwrap();
        assert_relative_eq!(extreme, 1.0, epsilon = 1e-15);
        // 5 levels, l = 1, values 1 and 3, max distance 4.
        let mid = k_ordinal(&[1], &[3], &p, &space).unwrap();
        assert_relative_eq!(mid, 0.5f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn ordinal_reduces_to_categorical_on_extreme_distances() {
        // Binary ordinal dims: distances are only 0 or max, so the two kernels
        // agree on every input pair.
        let space = SearchSpace::<f64>::ordinal(vec![2, 2, 2]).unwrap();
        let p = params_cat(vec![1.3, 0.4, 2.2]);
        for a in space.enumerate_categorical() {
            for b in space.enumerate_categorical() {
                let ko = k_ordinal(&a, &b, &p, &space).unwrap();
                let kc = k_categorical(&a, &b, &p).unwrap();
                assert_relative_eq!(ko, kc, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn matern52_hand_values() {
        let p = KernelParams {
            cat_lengthscales: vec![],
            cont_lengthscales: vec![1.0],
            outputscale: 1.0,
            lambda: 0.5,
            ard_enabled: true,
        };
        assert_relative_eq!(k_matern52(&[0.3], &[0.3], &p).unwrap(), 1.0);
        // Frozen closed-form value at r = 1.
        assert_relative_eq!(
            k_matern52(&[0.0], &[1.0], &p).unwrap(),
            0.5239941088318203,
            epsilon = 1e-15
        );
        // Monotone decay along a grid.
        let mut prev = 1.0;
        for step in 1..=20 {
            let x = step as f64 * 0.3;
            let k = k_matern52(&[0.0], &[x], &p).unwrap();
            assert!(k < prev);
            prev = k;
        }
    }

    #[test]
    fn mixed_kernel_limits_and_arithmetic() {
        // Space with 1 categorical + 1 continuous dim; engineer k_h = 2, k_x = 0.5.
        let space =
            SearchSpace::new(vec![2], vec![None], vec![(0.0, 1.0)]).unwrap();
        let ls = 2.0f64.ln(); // k_h(h,h) = exp(l/1) = 2
        let mut p = KernelParams {
            cat_lengthscales: vec![ls],
            cont_lengthscales: vec![0.2],
            outputscale: 1.0,
            lambda: 0.5,
            ard_enabled: true,
        };
        // Choose a continuous separation giving k_x = 0.5 by solving on a grid.
        let target = 0.5f64;
        let mut dist = 0.0;
        for i in 0..100_000 {
            let d = i as f64 * 1e-5;
            if k_matern52(&[0.0], &[d], &p).unwrap() <= target {
                dist = d;
                break;
            }
        }
        let kx = k_matern52(&[0.0], &[dist], &p).unwrap();
        let a = MixedPoint::new(vec![0], vec![0.0]);
        let b = MixedPoint::new(vec![0], vec![dist]);

        p.lambda = 0.0;
        let sum = k_mixed(&a, &b, &p, &space).unwrap();
        assert_relative_eq!(sum, 2.0 + kx, epsilon = 1e-12);
        p.lambda = 1.0;
        let prod = k_mixed(&a, &b, &p, &space).unwrap();
        assert_relative_eq!(prod, 2.0 * kx, epsilon = 1e-12);
        p.lambda = 0.5;
        let half = k_mixed(&a, &b, &p, &space).unwrap();
        assert_relative_eq!(half, 0.5 * 2.0 * kx + 0.5 * (2.0 + kx), epsilon = 1e-12);
        // The printed example: lambda=0.5, k_h=2, k_x=0.5 -> 1.75.
        assert_relative_eq!(
            0.5 * (2.0 * 0.5) + 0.5 * (2.0 + 0.5),
            1.75,
            epsilon = 1e-15
        );
        assert!((kx - 0.5).abs() < 1e-3, "grid solve found k_x near 0.5");
    }

    #[test]
    fn mixed_kernel_symmetry() {
        let space = SearchSpace::new(
            vec![3, 4],
            vec![None, None],
            vec![(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let p = KernelParams::defaults(2, 2, true);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = space.sample_uniform(&mut rng);
            let b = space.sample_uniform(&mut rng);
            let kab = k_mixed(&a, &b, &p, &space).unwrap();
            let kba = k_mixed(&b, &a, &p, &space).unwrap();
            assert_eq!(kab, kba);
        }
    }

    #[test]
    fn gram_trivial_cases() {
        let space = SearchSpace::<f64>::categorical(vec![3, 3]).unwrap();
        let p = KernelParams::defaults(2, 0, true);
        let z = MixedPoint::categorical(vec![1, 2]);
        let g1 = gram(&[z.clone()], &p, &space, KernelChoice::Categorical).unwrap();
        assert_eq!(g1.rows(), 1);
        assert_relative_eq!(
            g1[(0, 0)],
            p.outputscale * k_categorical(&z.cats, &z.cats, &p).unwrap()
        );
        let g2 = gram(
            &[z.clone(), z.clone()],
            &p,
            &space,
            KernelChoice::Categorical,
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g2[(i, j)], g2[(0, 0)]);
            }
        }
    }

    #[test]
    fn gram_exactly_symmetric() {
        let space = SearchSpace::new(
            vec![4, 2, 6],
            vec![None, None, None],
            vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let p = KernelParams {
            cat_lengthscales: vec![1.7, 0.2, 3.3],
            cont_lengthscales: vec![0.11, 0.37, 0.49],
            outputscale: 2.4,
            lambda: 0.5,
            ard_enabled: true,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let pts: Vec<_> = (0..17).map(|_| space.sample_uniform(&mut rng)).collect();
        let g = gram(&pts, &p, &space, KernelChoice::Mixed).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                assert_eq!(g[(i, j)], g[(j, i)], "exact symmetry at ({i},{j})");
            }
        }
    }

    #[test]
    fn gram_gradients_match_finite_differences() {
        let space = SearchSpace::new(
            vec![3, 5],
            vec![Some(crate::space::OrdinalMetric::EquallySpaced), None],
            vec![(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let pts: Vec<_> = (0..6).map(|_| space.sample_uniform(&mut rng)).collect();
        for choice in [KernelChoice::Mixed, KernelChoice::Ordinal] {
            let space = if choice == KernelChoice::Ordinal {
                SearchSpace::ordinal(vec![3, 5]).unwrap()
            } else {
                space.clone()
            };
            let pts: Vec<MixedPoint<f64>> = if choice == KernelChoice::Ordinal {
                pts.iter()
                    .map(|p| MixedPoint::categorical(p.cats.clone()))
                    .collect()
            } else {
                pts.clone()
            };
            let params = KernelParams {
                cat_lengthscales: vec![0.9, 1.8],
                cont_lengthscales: if choice == KernelChoice::Ordinal {
                    vec![]
                } else {
                    vec![0.21, 0.34]
                },
                outputscale: 1.6,
                lambda: 0.5,
                ard_enabled: true,
            };
            let grads = gram_gradients(&pts, &params, &space, choice).unwrap();
            let h = 1e-5;
            for (hp, g) in &grads {
                let mut plus = params.clone();
                let mut minus = params.clone();
                match *hp {
                    HyperParam::CatLengthscale(i) => {
                        plus.cat_lengthscales[i] += h;
                        minus.cat_lengthscales[i] -= h;
                    }
                    HyperParam::ContLengthscale(j) => {
                        plus.cont_lengthscales[j] += h;
                        minus.cont_lengthscales[j] -= h;
                    }
                    HyperParam::Outputscale => {
                        plus.outputscale += h;
                        minus.outputscale -= h;
                    }
                }
                let gp = gram(&pts, &plus, &space, choice).unwrap();
                let gm = gram(&pts, &minus, &space, choice).unwrap();
                for a in 0..pts.len() {
                    for b in 0..pts.len() {
                        let fd = (gp[(a, b)] - gm[(a, b)]) / (2.0 * h);
                        let an = g[(a, b)];
                        let denom = an.abs().max(fd.abs()).max(1e-6);
                        assert!(
                            (an - fd).abs() / denom <= 1e-5,
                            "{hp:?} at ({a},{b}): analytic {an} vs fd {fd}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let p = KernelParams::<f32>::defaults(2, 1, true);
        let k = k_categorical(&[0, 1], &[0, 1], &p).unwrap();
        assert!(k > 1.0f32);
    }
}
