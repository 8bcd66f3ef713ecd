//! Search spaces and candidate points.
//!
//! A space is a list of categorical dimensions (each with a cardinality and
//! an optional ordinal metric) plus an axis-aligned continuous box. Points
//! keep continuous coordinates normalized to `[0,1]`; denormalization happens
//! only where objectives are evaluated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::scalar::Real;

/// Distance structure for an ordinal categorical dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrdinalMetric<T> {
    /// Levels `0..card` are equally spaced: distance `|i - j|`, maximum `card - 1`.
    EquallySpaced,
    /// Explicit level values; distance `|v_i - v_j|`, maximum over all pairs.
    Levels(Vec<T>),
}

impl<T: Real> OrdinalMetric<T> {
    pub fn distance(&self, a: usize, b: usize) -> T {
        match self {
            OrdinalMetric::EquallySpaced => T::of((a as f64 - b as f64).abs()),
            OrdinalMetric::Levels(v) => (v[a] - v[b]).abs(),
        }
    }

    pub fn max_distance(&self, card: usize) -> T {
        match self {
            OrdinalMetric::EquallySpaced => T::of((card - 1) as f64),
            OrdinalMetric::Levels(v) => {
                let mut lo = v[0];
                let mut hi = v[0];
                for &x in v {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                hi - lo
            }
        }
    }
}

/// A mixed categorical/continuous search space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace<T> {
    categorical_cards: Vec<usize>,
    ordinal_metrics: Vec<Option<OrdinalMetric<T>>>,
    continuous_bounds: Vec<(T, T)>,
}

impl<T: Real> SearchSpace<T> {
    pub fn new(
        categorical_cards: Vec<usize>,
        ordinal_metrics: Vec<Option<OrdinalMetric<T>>>,
        continuous_bounds: Vec<(T, T)>,
    ) -> Result<Self, SpaceError> {
        if categorical_cards.is_empty() && continuous_bounds.is_empty() {
            return Err(SpaceError::EmptySpace);
        }
        if ordinal_metrics.len() != categorical_cards.len() {
            return Err(SpaceError::DimensionMismatch {
                expected: categorical_cards.len(),
                got: ordinal_metrics.len(),
            });
        }
        for (dim, &card) in categorical_cards.iter().enumerate() {
            if card < 2 {
                return Err(SpaceError::CardinalityTooSmall { dim, card });
            }
            if let Some(OrdinalMetric::Levels(v)) = &ordinal_metrics[dim] {
                if v.len() != card {
                    return Err(SpaceError::BadOrdinalLevels { dim });
                }
            }
        }
        for (dim, &(lo, hi)) in continuous_bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(SpaceError::InvalidBounds { dim });
            }
        }
        Ok(SearchSpace {
            categorical_cards,
            ordinal_metrics,
            continuous_bounds,
        })
    }

    /// Purely categorical space without ordinal structure.
    pub fn categorical(cards: Vec<usize>) -> Result<Self, SpaceError> {
        let metrics = vec![None; cards.len()];
        SearchSpace::new(cards, metrics, Vec::new())
    }

    /// Purely ordinal space with equally spaced levels on every dimension.
    pub fn ordinal(cards: Vec<usize>) -> Result<Self, SpaceError> {
        let metrics = vec![Some(OrdinalMetric::EquallySpaced); cards.len()];
        SearchSpace::new(cards, metrics, Vec::new())
    }

    pub fn d_h(&self) -> usize {
        self.categorical_cards.len()
    }

    pub fn d_x(&self) -> usize {
        self.continuous_bounds.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.categorical_cards
    }

    pub fn card(&self, dim: usize) -> usize {
        self.categorical_cards[dim]
    }

    pub fn ordinal_metric(&self, dim: usize) -> Option<&OrdinalMetric<T>> {
        self.ordinal_metrics[dim].as_ref()
    }

    pub fn has_ordinal_metrics(&self) -> bool {
        self.ordinal_metrics.iter().any(|m| m.is_some())
    }

    pub fn continuous_bounds(&self) -> &[(T, T)] {
        &self.continuous_bounds
    }

    /// Number of distinct categorical configurations, `None` on u128 overflow.
    pub fn config_count(&self) -> Option<u128> {
        self.categorical_cards
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
    }

    /// Natural log of the configuration count (finite even for huge spaces).
    pub fn ln_config_count(&self) -> f64 {
        self.categorical_cards.iter().map(|&c| (c as f64).ln()).sum()
    }

    /// Maps a normalized coordinate to the raw bounds of dimension `dim`.
    pub fn denormalize(&self, dim: usize, t: T) -> T {
        let (lo, hi) = self.continuous_bounds[dim];
        lo + t * (hi - lo)
    }

    /// True iff the point's shape and entries are admissible for this space.
    pub fn validate(&self, p: &MixedPoint<T>) -> bool {
        p.cats.len() == self.d_h()
            && p.conts.len() == self.d_x()
            && p.cats
                .iter()
                .zip(&self.categorical_cards)
                .all(|(&v, &card)| v < card)
            && p.conts
                .iter()
                .all(|&x| x >= T::zero() && x <= T::one() && x.is_finite())
    }

    pub fn sample_uniform(&self, rng: &mut impl Rng) -> MixedPoint<T> {
        let cats = self
            .categorical_cards
            .iter()
            .map(|&card| rng.gen_range(0..card))
            .collect();
        let conts = (0..self.d_x()).map(|_| T::of(rng.gen::<f64>())).collect();
        MixedPoint { cats, conts }
    }

    /// Samples inside the trust region around `center`.
    ///
    /// Categorical part: a subset size `k` is drawn uniformly from
    /// `0..=min(l_h, d_h)`, `k` distinct coordinates are chosen uniformly and
    /// each is resampled to a value different from the center's. Continuous
    /// part: uniform in the box of side `l_x` around the center, clipped to
    /// `[0,1]` (`None` means unconstrained).
    pub fn sample_in_tr(
        &self,
        center: &MixedPoint<T>,
        l_h: usize,
        l_x: Option<T>,
        rng: &mut impl Rng,
    ) -> MixedPoint<T> {
        debug_assert!(self.validate(center));
        let d_h = self.d_h();
        let mut cats = center.cats.clone();
        let radius = l_h.min(d_h);
        if radius > 0 && d_h > 0 {
            let k = rng.gen_range(0..=radius);
            let dims = sample_distinct(d_h, k, rng);
            for dim in dims {
                let card = self.categorical_cards[dim];
                let mut v = rng.gen_range(0..card - 1);
                if v >= cats[dim] {
                    v += 1; // skip the current value
                }
                cats[dim] = v;
            }
        }
        let conts = match l_x {
            None => (0..self.d_x()).map(|_| T::of(rng.gen::<f64>())).collect(),
            Some(l) => {
                // The box is pulled inward by a relative 1e-12 so that samples
                // at its faces still pass the exact membership predicate after
                // floating-point rounding.
                let half = l / T::of(2.0) * (T::one() - T::of(1e-12));
                center
                    .conts
                    .iter()
                    .map(|&c| {
                        let lo = (c - half).max(T::zero());
                        let hi = (c + half).min(T::one());
                        lo + T::of(rng.gen::<f64>()) * (hi - lo)
                    })
                    .collect()
            }
        };
        MixedPoint { cats, conts }
    }

    /// All categorical assignments of a purely categorical space.
    ///
    /// Intended for small, exhaustively enumerable spaces (tests, oracles);
    /// panics if the space has continuous dimensions.
    pub fn enumerate_categorical(&self) -> Vec<Vec<usize>> {
        assert_eq!(self.d_x(), 0, "enumeration requires a categorical space");
        let mut out = vec![Vec::new()];
        for &card in &self.categorical_cards {
            let mut next = Vec::with_capacity(out.len() * card);
            for prefix in &out {
                for v in 0..card {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

/// Draws `k` distinct values from `0..n` (Floyd's algorithm, order randomized
/// implicitly by the draw order).
fn sample_distinct(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for j in n - k..n {
        let t = rng.gen_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen
}

/// One candidate: categorical assignment plus normalized continuous vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint<T> {
    pub cats: Vec<usize>,
    pub conts: Vec<T>,
}

impl<T: Real> MixedPoint<T> {
    pub fn categorical(cats: Vec<usize>) -> Self {
        MixedPoint {
            cats,
            conts: Vec::new(),
        }
    }

    pub fn new(cats: Vec<usize>, conts: Vec<T>) -> Self {
        MixedPoint { cats, conts }
    }
}

/// Number of positions at which two categorical vectors differ.
pub fn hamming(a: &[usize], b: &[usize]) -> Result<usize, SpaceError> {
    if a.len() != b.len() {
        return Err(SpaceError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Trust-region membership for the categorical part: at most `l_h` mismatches.
pub fn in_categorical_tr(
    center: &[usize],
    candidate: &[usize],
    l_h: usize,
) -> Result<bool, SpaceError> {
    Ok(hamming(center, candidate)? <= l_h)
}

/// Trust-region membership for the continuous part: inside the axis-aligned
/// box of side `l_x` centered at `center` (each `|c_j - x_j| <= l_x / 2`).
pub fn in_continuous_tr<T: Real>(
    center: &[T],
    candidate: &[T],
    l_x: T,
) -> Result<bool, SpaceError> {
    if center.len() != candidate.len() {
        return Err(SpaceError::DimensionMismatch {
            expected: center.len(),
            got: candidate.len(),
        });
    }
    let half = l_x / T::of(2.0);
    Ok(center
        .iter()
        .zip(candidate)
        .all(|(&c, &x)| (x - c).abs() <= half))
}
