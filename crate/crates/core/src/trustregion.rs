//! Trust-region state machine for mixed spaces.
//!
//! One categorical length `L_h` (a Hamming radius) and one continuous length
//! `L_x` (a box edge) shrink and expand together: `succ_tol` consecutive
//! improvements expand both, `fail_tol` consecutive non-improvements shrink
//! both. A restart is signalled when `L_h` reaches 0 or `L_x` falls below its
//! floor. Expansion uses a ceiling so integer growth is strict; shrinkage
//! floors, so small categorical regions collapse to the restart trigger.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// Tunables for the trust-region schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionConfig<T> {
    /// Consecutive improvements before expanding.
    pub succ_tol: usize,
    /// Consecutive non-improvements before shrinking.
    pub fail_tol: usize,
    /// Shrink factor in (0,1); the expand factor is its reciprocal.
    pub alpha_s: T,
    /// Initial Hamming radius; `None` means `max(1, round(0.8 * d_h))`.
    pub l_h0: Option<usize>,
    /// Initial continuous edge length.
    pub l_x0: T,
    /// Restart floor for the continuous length (exclusive).
    pub l_x_min: T,
    /// Cap for the continuous length.
    pub l_x_max: T,
}

impl<T: Real> Default for TrustRegionConfig<T> {
    fn default() -> Self {
        TrustRegionConfig {
            succ_tol: 2,
            fail_tol: 40,
            alpha_s: T::of(0.667),
            l_h0: None,
            l_x0: T::of(0.8),
            l_x_min: T::of(0.5f64.powi(7)),
            l_x_max: T::of(1.6),
        }
    }
}

impl<T: Real> TrustRegionConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha_s > T::zero() && self.alpha_s < T::one()) {
            return Err(ConfigError::TrustRegion(
                "alpha_s must lie in (0,1)".into(),
            ));
        }
        if self.succ_tol == 0 || self.fail_tol == 0 {
            return Err(ConfigError::TrustRegion(
                "succ_tol and fail_tol must be >= 1".into(),
            ));
        }
        if self.l_h0 == Some(0) {
            return Err(ConfigError::TrustRegion("l_h0 must be >= 1".into()));
        }
        if !(self.l_x_min > T::zero()) {
            return Err(ConfigError::TrustRegion("l_x_min must be > 0".into()));
        }
        if !(self.l_x0 > self.l_x_min && self.l_x0 <= self.l_x_max) {
            return Err(ConfigError::TrustRegion(
                "l_x0 must lie in (l_x_min, l_x_max]".into(),
            ));
        }
        Ok(())
    }

    pub fn alpha_e(&self) -> T {
        T::one() / self.alpha_s
    }

    fn initial_l_h(&self, d_h: usize) -> usize {
        let default = ((0.8 * d_h as f64).round() as usize).max(1);
        self.l_h0.unwrap_or(default).min(d_h)
    }
}

/// What a `record_result` call did to the lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrChange {
    None,
    Expanded,
    Shrunk,
}

/// Outcome of recording one improvement flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordOutcome {
    pub change: TrChange,
    pub restart_needed: bool,
}

/// Mutable trust-region state around a center point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionState<T> {
    config: TrustRegionConfig<T>,
    d_h: usize,
    l_h: Option<usize>,
    l_x: Option<T>,
    succ_count: usize,
    fail_count: usize,
    center: MixedPoint<T>,
}

impl<T: Real> TrustRegionState<T> {
    pub fn new(
        space: &SearchSpace<T>,
        config: TrustRegionConfig<T>,
        center: MixedPoint<T>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let d_h = space.d_h();
        let l_h = (d_h > 0).then(|| config.initial_l_h(d_h));
        let l_x = (space.d_x() > 0).then(|| config.l_x0.min(config.l_x_max));
        Ok(TrustRegionState {
            config,
            d_h,
            l_h,
            l_x,
            succ_count: 0,
            fail_count: 0,
            center,
        })
    }

    pub fn l_h(&self) -> Option<usize> {
        self.l_h
    }

    pub fn l_x(&self) -> Option<T> {
        self.l_x
    }

    pub fn center(&self) -> &MixedPoint<T> {
        &self.center
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.succ_count, self.fail_count)
    }

    pub fn config(&self) -> &TrustRegionConfig<T> {
        &self.config
    }

    /// Install a new center (called when the incumbent improves); lengths and
    /// counters are untouched.
    pub fn set_center(&mut self, center: MixedPoint<T>) {
        self.center = center;
    }

    /// Whether the current lengths demand a restart.
    pub fn restart_needed(&self) -> bool {
        let cat = matches!(self.l_h, Some(0));
        let cont = matches!(self.l_x, Some(l) if l < self.config.l_x_min);
        cat || cont
    }

    /// Record one batch outcome. An improvement bumps the success streak and
    /// clears the failure streak (and vice versa); hitting a tolerance
    /// expands or shrinks both lengths and clears that streak.
    pub fn record_result(&mut self, improved: bool) -> RecordOutcome {
        let mut change = TrChange::None;
        if improved {
            self.succ_count += 1;
            self.fail_count = 0;
            if self.succ_count == self.config.succ_tol {
                self.expand();
                self.succ_count = 0;
                change = TrChange::Expanded;
            }
        } else {
            self.fail_count += 1;
            self.succ_count = 0;
            if self.fail_count == self.config.fail_tol {
                self.shrink();
                self.fail_count = 0;
                change = TrChange::Shrunk;
            }
        }
        RecordOutcome {
            change,
            restart_needed: self.restart_needed(),
        }
    }

    fn expand(&mut self) {
        let alpha_e = self.config.alpha_e();
        if let Some(l) = self.l_h {
            let grown = (alpha_e * T::of(l as f64)).ceil().as_f64() as usize;
            self.l_h = Some(grown.min(self.d_h));
        }
        if let Some(l) = self.l_x {
            self.l_x = Some((alpha_e * l).min(self.config.l_x_max));
        }
    }

    fn shrink(&mut self) {
        if let Some(l) = self.l_h {
            self.l_h = Some((self.config.alpha_s * T::of(l as f64)).floor().as_f64() as usize);
        }
        if let Some(l) = self.l_x {
            self.l_x = Some(self.config.alpha_s * l);
        }
    }

    /// Reset to the initial lengths around a new center, counters zeroed.
    pub fn reset(&mut self, new_center: MixedPoint<T>) {
        self.l_h = (self.d_h > 0).then(|| self.config.initial_l_h(self.d_h));
        self.l_x = self.l_x.map(|_| self.config.l_x0.min(self.config.l_x_max));
        self.succ_count = 0;
        self.fail_count = 0;
        self.center = new_center;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mixed_state(d_h: usize, l_h0: usize) -> TrustRegionState<f64> {
        let space = SearchSpace::new(
            vec![3; d_h],
            vec![None; d_h],
            vec![(0.0, 1.0)],
        )
        .unwrap();
        let config = TrustRegionConfig {
            l_h0: Some(l_h0),
            ..TrustRegionConfig::default()
        };
        let center = MixedPoint::new(vec![0; d_h], vec![0.5]);
        TrustRegionState::new(&space, config, center).unwrap()
    }

    fn cat_state(d_h: usize, l_h0: usize, fail_tol: usize) -> TrustRegionState<f64> {
        let space = SearchSpace::<f64>::categorical(vec![3; d_h]).unwrap();
        let config = TrustRegionConfig {
            l_h0: Some(l_h0),
            fail_tol,
            ..TrustRegionConfig::default()
        };
        TrustRegionState::new(&space, config, MixedPoint::categorical(vec![0; d_h])).unwrap()
    }

    #[test]
    fn forty_failures_shrink_twenty_to_thirteen() {
        let mut state = cat_state(25, 20, 40);
        for i in 0..40 {
            let out = state.record_result(false);
            if i < 39 {
                assert_eq!(out.change, TrChange::None);
            } else {
                assert_eq!(out.change, TrChange::Shrunk);
                assert!(!out.restart_needed);
            }
        }
        assert_eq!(state.l_h(), Some(13), "floor(0.667*20) = 13");
    }

    #[test]
    fn shrink_from_one_triggers_restart() {
        let mut state = cat_state(4, 1, 3);
        let mut restarted = false;
        for _ in 0..3 {
            restarted = state.record_result(false).restart_needed;
        }
        assert_eq!(state.l_h(), Some(0));
        assert!(restarted, "floor(0.667*1) = 0 must signal restart");
    }

    #[test]
    fn two_successes_expand_thirteen_to_twenty() {
        let mut state = cat_state(25, 13, 40);
        assert_eq!(state.record_result(true).change, TrChange::None);
        let out = state.record_result(true);
        assert_eq!(out.change, TrChange::Expanded);
        assert_eq!(state.l_h(), Some(20), "min(ceil(13/0.667), 25) = 20");
        assert_eq!(state.counts(), (0, 0));
    }

    #[test]
    fn expansion_caps_at_dimension_and_l_x_max() {
        let mut state = mixed_state(4, 4);
        for _ in 0..20 {
            state.record_result(true);
        }
        assert_eq!(state.l_h(), Some(4));
        assert!(state.l_x().unwrap() <= 1.6 + 1e-12);
    }

    #[test]
    fn reset_restores_initial_lengths_and_counters() {
        let mut state = mixed_state(10, 8);
        for _ in 0..85 {
            state.record_result(false);
        }
        assert!(state.l_h().unwrap() < 8);
        let c = MixedPoint::new(vec![1; 10], vec![0.25]);
        state.reset(c.clone());
        assert_eq!(state.l_h(), Some(8));
        assert_eq!(state.l_x(), Some(0.8));
        assert_eq!(state.counts(), (0, 0));
        assert_eq!(state.center(), &c);
        let snapshot = state.clone();
        state.reset(c.clone());
        assert_eq!(state, snapshot, "reset is idempotent for a fixed center");
        let out = state.record_result(true);
        assert!(!out.restart_needed, "fresh region must not restart");
    }

    #[test]
    fn default_initial_radius_tracks_dimension() {
        let space = SearchSpace::<f64>::categorical(vec![2; 25]).unwrap();
        let state = TrustRegionState::new(
            &space,
            TrustRegionConfig::default(),
            MixedPoint::categorical(vec![0; 25]),
        )
        .unwrap();
        assert_eq!(state.l_h(), Some(20), "round(0.8*25)");
        let space = SearchSpace::<f64>::categorical(vec![2; 50]).unwrap();
        let state = TrustRegionState::new(
            &space,
            TrustRegionConfig::default(),
            MixedPoint::categorical(vec![0; 50]),
        )
        .unwrap();
        assert_eq!(state.l_h(), Some(40), "round(0.8*50)");
    }

    #[test]
    fn center_changes_only_via_set_center_or_reset() {
        let mut state = mixed_state(5, 4);
        let original = state.center().clone();
        for i in 0..10 {
            state.record_result(i % 2 == 0);
        }
        assert_eq!(state.center(), &original);
        let c = MixedPoint::new(vec![2; 5], vec![0.9]);
        state.set_center(c.clone());
        assert_eq!(state.center(), &c);
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        let ok = TrustRegionConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.alpha_s = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.succ_tol = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.l_x0 = 2.0;
        assert!(bad.validate().is_err(), "l_x0 above l_x_max");
        let mut bad = ok;
        bad.l_h0 = Some(0);
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn counters_and_lengths_stay_in_range(flags in proptest::collection::vec(any::<bool>(), 0..600)) {
            let mut state = mixed_state(12, 10);
            for f in flags {
                let before_center = state.center().clone();
                state.record_result(f);
                prop_assert!(state.counts().0 == 0 || state.counts().1 == 0,
                    "streak counters must not both be positive");
                prop_assert!(state.counts().0 < state.config().succ_tol);
                prop_assert!(state.counts().1 < state.config().fail_tol);
                prop_assert!(state.l_h().unwrap() <= 12);
                prop_assert!(state.l_x().unwrap() <= state.config().l_x_max);
                prop_assert_eq!(state.center(), &before_center);
            }
        }

        #[test]
        fn bounded_failure_run_always_restarts(l_h0 in 1usize..30, fail_tol in 1usize..6) {
            let mut state = cat_state(30, l_h0, fail_tol);
            let alpha_e = state.config().alpha_e();
            let shrinks = ((l_h0 as f64).ln() / alpha_e.ln()).ceil().max(1.0) as usize;
            let mut restarted = false;
            for _ in 0..(fail_tol * (shrinks + 1)) {
                if state.record_result(false).restart_needed {
                    restarted = true;
                    break;
                }
            }
            prop_assert!(restarted, "L_h0={} should collapse within {} shrinks", l_h0, shrinks + 1);
        }
    }
}
