//! Restart-center selection from an archive of per-restart local maxima.
//!
//! Each completed restart contributes its best point and raw value to an
//! archive; a fresh auxiliary GP fitted on the archive scores the whole space
//! with an upper confidence bound, and the maximizer seeds the next trust
//! region. Duplicate local maxima are replaced by uniform random points so
//! the auxiliary Gram matrix stays non-degenerate; the replacement must be
//! evaluated by the caller (one charged objective evaluation) before it is
//! inserted.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{maximize_with, AcquisitionSpec, SEARCH_BUDGET, SEARCH_RESTARTS};
use crate::gp::SurrogateModel;
use crate::kernels::KernelChoice;
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// One archived local maximum (raw objective scale).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry<T> {
    pub point: MixedPoint<T>,
    pub value: T,
}

/// Record of a duplicate local maximum that was replaced by a random point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuplicateResolution<T> {
    pub original: MixedPoint<T>,
    pub replacement: MixedPoint<T>,
}

/// Archive of per-restart local maxima, ordered by restart index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RestartArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
    resolutions: Vec<DuplicateResolution<T>>,
}

/// Result of offering a local maximum to the archive.
#[derive(Clone, Debug, PartialEq)]
pub enum RecordOutcome<T> {
    /// The point was new and has been appended.
    Inserted,
    /// The point duplicated an entry; evaluate `replacement` and hand the
    /// value to [`RestartArchive::insert_replacement`].
    NeedsReplacement { replacement: MixedPoint<T> },
}

impl<T: Real> RestartArchive<T> {
    pub fn new() -> Self {
        RestartArchive {
            entries: Vec::new(),
            resolutions: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn resolutions(&self) -> &[DuplicateResolution<T>] {
        &self.resolutions
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn contains(&self, point: &MixedPoint<T>) -> bool {
        self.entries.iter().any(|e| &e.point == point)
    }

    /// Append a pre-built entry verbatim (record deserialization).
    pub(crate) fn push_entry(&mut self, entry: ArchiveEntry<T>) {
        self.entries.push(entry);
    }

    /// Append a resolution pair verbatim (record deserialization).
    pub(crate) fn push_resolution(&mut self, original: MixedPoint<T>, replacement: MixedPoint<T>) {
        self.resolutions.push(DuplicateResolution {
            original,
            replacement,
        });
    }

    /// Offer a restart's local maximum. New points are appended verbatim;
    /// duplicates yield a uniform random replacement point, distinct from all
    /// entries, whose evaluation the caller owes.
    pub fn record_local_maximum<R: Rng>(
        &mut self,
        point: MixedPoint<T>,
        value: T,
        space: &SearchSpace<T>,
        rng: &mut R,
    ) -> RecordOutcome<T> {
        if !self.contains(&point) {
            self.entries.push(ArchiveEntry { point, value });
            return RecordOutcome::Inserted;
        }
        let mut replacement = space.sample_uniform(rng);
        for _ in 0..10_000 {
            if !self.contains(&replacement) {
                break;
            }
            replacement = space.sample_uniform(rng);
        }
        RecordOutcome::NeedsReplacement { replacement }
    }

    /// Insert the evaluated replacement for a duplicate local maximum.
    pub fn insert_replacement(
        &mut self,
        original: MixedPoint<T>,
        replacement: MixedPoint<T>,
        value: T,
    ) {
        self.resolutions.push(DuplicateResolution {
            original,
            replacement: replacement.clone(),
        });
        self.entries.push(ArchiveEntry {
            point: replacement,
            value,
        });
    }
}

/// Exploration-weight schedule for center selection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BetaSchedule<T> {
    /// Fixed weight, 1.96 by default.
    Constant { sqrt_beta: T },
    /// `beta_i = 2 ln(|H| i^2 pi^2 / (6 zeta))`, growing with the restart
    /// index; `|H|` enters through the log so huge spaces stay finite.
    Theory { zeta: T },
}

impl<T: Real> Default for BetaSchedule<T> {
    fn default() -> Self {
        BetaSchedule::Constant {
            sqrt_beta: T::of(1.96),
        }
    }
}

impl<T: Real> BetaSchedule<T> {
    /// `sqrt(beta)` for 1-based restart index `i` on a space with
    /// `ln_config_count` log-cardinality.
    pub fn sqrt_beta_at(&self, ln_config_count: T, i: usize) -> T {
        match *self {
            BetaSchedule::Constant { sqrt_beta } => sqrt_beta,
            BetaSchedule::Theory { zeta } => {
                let i = T::of(i.max(1) as f64);
                let pi2_over_6 = T::of(std::f64::consts::PI * std::f64::consts::PI / 6.0);
                let beta = T::of(2.0)
                    * (ln_config_count + T::of(2.0) * i.ln() + pi2_over_6.ln() - zeta.ln());
                beta.max(T::zero()).sqrt()
            }
        }
    }
}

/// How the returned center was produced, for run logging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterSource {
    /// Empty archive: uniform random point.
    Uniform,
    /// Too few entries to fit; default hyperparameters were used.
    Defaults,
    /// Auxiliary GP fitted and maximized.
    Fitted,
    /// Fit failed; fell back to a uniform random point.
    FitFallback,
}

/// Build the auxiliary global GP over the archive. With fewer than 3 entries
/// hyperparameters stay at their defaults; otherwise they are fitted fresh.
pub fn fit_aux_model<T: Real, R: Rng>(
    archive: &RestartArchive<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
    rng: &mut R,
) -> Result<SurrogateModel<T>, crate::error::GpError> {
    let mut model = SurrogateModel::new(space.clone(), choice, true)?;
    let xs: Vec<_> = archive.entries().iter().map(|e| e.point.clone()).collect();
    let ys: Vec<_> = archive.entries().iter().map(|e| e.value).collect();
    model.set_standardization_from(&ys)?;
    model.set_data(xs, ys)?;
    if archive.len() < 3 {
        model.refresh()?;
    } else {
        model.fit(rng)?;
    }
    Ok(model)
}

/// Pick the next restart center: UCB argmax of the auxiliary GP over the full
/// space (no trust-region constraint). Degenerate archives fall back to a
/// uniform random point, as does an auxiliary fit failure.
pub fn select_restart_center<T: Real, R: Rng>(
    archive: &RestartArchive<T>,
    space: &SearchSpace<T>,
    choice: KernelChoice,
    sqrt_beta: T,
    rng: &mut R,
) -> (MixedPoint<T>, CenterSource) {
    if archive.is_empty() {
        return (space.sample_uniform(rng), CenterSource::Uniform);
    }
    let source = if archive.len() < 3 {
        CenterSource::Defaults
    } else {
        CenterSource::Fitted
    };
    let model = match fit_aux_model(archive, space, choice, rng) {
        Ok(m) => m,
        Err(_) => return (space.sample_uniform(rng), CenterSource::FitFallback),
    };
    let spec = AcquisitionSpec::ucb(sqrt_beta);
    let center = maximize_with(
        space,
        None,
        SEARCH_BUDGET,
        SEARCH_RESTARTS,
        rng,
        |z| {
            let (mu, var) = model
                .posterior(z)
                .expect("aux model is fitted before the UCB search");
            crate::acquisition::eval_acq(&spec, mu, var)
        },
    );
    (center, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::eval_acq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn space_3x3x3() -> SearchSpace<f64> {
        SearchSpace::<f64>::categorical(vec![3, 3, 3]).unwrap()
    }

    #[test]
    fn new_points_append_verbatim() {
        let space = space_3x3x3();
        let mut archive = RestartArchive::new();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for i in 0..3 {
            let p = MixedPoint::categorical(vec![i, i, i]);
            let out = archive.record_local_maximum(p.clone(), i as f64, &space, &mut rng);
            assert_eq!(out, RecordOutcome::Inserted);
            assert_eq!(archive.len(), i + 1);
            assert_eq!(archive.entries()[i].point, p);
        }
        assert!(archive.resolutions().is_empty());
    }

    #[test]
    fn duplicates_request_distinct_replacements() {
        let space = space_3x3x3();
        let mut archive = RestartArchive::new();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let p = MixedPoint::categorical(vec![1, 1, 1]);
        archive.record_local_maximum(p.clone(), 5.0, &space, &mut rng);
        match archive.record_local_maximum(p.clone(), 6.0, &space, &mut rng) {
            RecordOutcome::NeedsReplacement { replacement } => {
                assert_ne!(replacement, p);
                assert!(!archive.contains(&replacement));
                archive.insert_replacement(p.clone(), replacement.clone(), 6.5);
                assert_eq!(archive.len(), 2);
                assert_eq!(archive.entries()[1].point, replacement);
                assert_eq!(archive.resolutions().len(), 1);
                assert_eq!(archive.resolutions()[0].original, p);
            }
            other => panic!("expected replacement, got {other:?}"),
        }
        // All entries distinct.
        for i in 0..archive.len() {
            for j in 0..i {
                assert_ne!(archive.entries()[i].point, archive.entries()[j].point);
            }
        }
    }

    #[test]
    fn empty_archive_selects_uniformly() {
        let space = space_3x3x3();
        let archive = RestartArchive::<f64>::new();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut replay = rng.clone();
        let (center, source) =
            select_restart_center(&archive, &space, KernelChoice::Mixed, 1.96, &mut rng);
        assert_eq!(source, CenterSource::Uniform);
        assert_eq!(center, space.sample_uniform(&mut replay));
    }

    #[test]
    fn single_entry_ucb_dominates_archived_point() {
        let space = space_3x3x3();
        let mut archive = RestartArchive::new();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let p = MixedPoint::categorical(vec![2, 0, 1]);
        archive.record_local_maximum(p.clone(), 10.0, &space, &mut rng);

        let mut model_rng = rng.clone();
        let (center, source) =
            select_restart_center(&archive, &space, KernelChoice::Mixed, 1.96, &mut rng);
        assert_eq!(source, CenterSource::Defaults);

        let model = fit_aux_model(&archive, &space, KernelChoice::Mixed, &mut model_rng).unwrap();
        let spec = AcquisitionSpec::ucb(1.96);
        let ucb = |z: &MixedPoint<f64>| {
            let (mu, var) = model.posterior(z).unwrap();
            eval_acq(&spec, mu, var)
        };
        assert!(
            ucb(&center) >= ucb(&p),
            "selected center must score at least the archived point"
        );
    }

    #[test]
    fn selection_tracks_exhaustive_ucb_maximum() {
        let space = space_3x3x3(); // 27 points, far below the brute-force cap
        let mut seed_rng = ChaCha12Rng::seed_from_u64(5);
        let mut archive = RestartArchive::new();
        for _ in 0..4 {
            let p = space.sample_uniform(&mut seed_rng);
            let v = p.cats.iter().map(|&c| c as f64).sum::<f64>() + seed_rng.gen::<f64>();
            if let RecordOutcome::NeedsReplacement { replacement } =
                archive.record_local_maximum(p.clone(), v, &space, &mut seed_rng)
            {
                archive.insert_replacement(p, replacement, v);
            }
        }

        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = ChaCha12Rng::seed_from_u64(9000 + seed);
            let mut model_rng = rng.clone();
            let (center, _) =
                select_restart_center(&archive, &space, KernelChoice::Mixed, 1.96, &mut rng);
            let model =
                fit_aux_model(&archive, &space, KernelChoice::Mixed, &mut model_rng).unwrap();
            let spec = AcquisitionSpec::ucb(1.96);
            let ucb = |z: &MixedPoint<f64>| {
                let (mu, var) = model.posterior(z).unwrap();
                eval_acq(&spec, mu, var)
            };
            let brute = space
                .enumerate_categorical()
                .into_iter()
                .map(|cats| ucb(&MixedPoint::categorical(cats)))
                .fold(f64::NEG_INFINITY, f64::max);
            // UCB values here are positive (standardized scale, sqrt_beta ~ 2).
            if ucb(&center) >= 0.95 * brute {
                hits += 1;
            }
        }
        assert!(hits >= 90, "only {hits}/100 selections reached 95% of max UCB");
    }

    #[test]
    fn selection_invariant_to_constant_value_shift() {
        let space = space_3x3x3();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let points: Vec<_> = (0..5).map(|_| space.sample_uniform(&mut rng)).collect();
        let values: Vec<f64> = (0..5).map(|i| (i as f64) * 1.3 - 2.0).collect();

        let select = |shift: f64| {
            let mut archive = RestartArchive::new();
            let mut r = ChaCha12Rng::seed_from_u64(7);
            for (p, &v) in points.iter().zip(values.iter()) {
                if let RecordOutcome::NeedsReplacement { replacement } =
                    archive.record_local_maximum(p.clone(), v + shift, &space, &mut r)
                {
                    archive.insert_replacement(p.clone(), replacement, v + shift);
                }
            }
            let mut r = ChaCha12Rng::seed_from_u64(8);
            select_restart_center(&archive, &space, KernelChoice::Mixed, 1.96, &mut r).0
        };
        let base = select(0.0);
        for shift in [1.0, -50.0, 1234.5] {
            assert_eq!(
                select(shift),
                base,
                "standardization must absorb the shift {shift}"
            );
        }
    }

    #[test]
    fn theory_beta_grows_with_restart_index() {
        let schedule = BetaSchedule::Theory { zeta: 0.1 };
        let ln_h = 53.0 * 2f64.ln();
        let b1 = schedule.sqrt_beta_at(ln_h, 1);
        let b2 = schedule.sqrt_beta_at(ln_h, 2);
        let b9 = schedule.sqrt_beta_at(ln_h, 9);
        assert!(b1 > 0.0 && b2 > b1 && b9 > b2);
        // Closed form at i=1: beta = 2 (ln|H| + ln(pi^2/6) - ln zeta).
        let expected = (2.0
            * (ln_h + (std::f64::consts::PI.powi(2) / 6.0).ln() - 0.1f64.ln()))
        .sqrt();
        approx::assert_relative_eq!(b1, expected, epsilon = 1e-12);
        let constant = BetaSchedule::Constant { sqrt_beta: 1.96 };
        assert_eq!(constant.sqrt_beta_at(ln_h, 5), 1.96);
    }
}
