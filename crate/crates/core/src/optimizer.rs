//! The optimization engine: a restart-driven trust-region loop over a GP
//! surrogate, exposed both as a blocking `run` and as an incremental
//! ask/tell protocol.
//!
//! One run proceeds in restarts. Restart 0 opens with a uniform initial
//! design; the trust region is then centered on the best initial point.
//! Each later iteration refits the surrogate on the data gathered since the
//! restart began, proposes a batch inside the region, and widens or shrinks
//! the region on strict improvement of the restart-local incumbent. When a
//! region collapses, the restart's best point is archived, a new center is
//! chosen by upper-confidence-bound selection over an auxiliary model of the
//! archive, and the surrogate, standardization and region are reset with a
//! fresh initial design drawn inside the new region.
//!
//! `run` is implemented on top of `ask`/`tell`, so driving the engine
//! externally produces bit-identical results. Engine state (including the
//! RNG) serializes with serde; a restored engine continues exactly where it
//! stopped. Minimization is handled by negating values at this boundary:
//! everything inside the engine maximizes.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acquisition::{propose_batch_impl, AcqKind, AcquisitionSpec};
use crate::error::{ConfigError, ProtocolError};
use crate::gp::SurrogateModel;
use crate::kernels::{KernelChoice, KernelParams};
use crate::record::{EvalKind, RestartEvent, RunRecord};
use crate::restart::{select_restart_center, BetaSchedule, RecordOutcome};
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};
use crate::trustregion::{TrustRegionConfig, TrustRegionState};

/// Noise variance a fresh surrogate starts from (mirrors the model default).
const DEFAULT_NOISE: f64 = 0.01;

/// Full configuration of one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig<T> {
    /// Initial design size per restart.
    pub n_init: usize,
    /// Total evaluation budget for the run.
    pub max_evals: usize,
    /// Proposals per iteration (Kriging-believer batch).
    pub batch_size: usize,
    pub acquisition: AcqKind,
    pub kernel: KernelChoice,
    /// Mixing weight between product and sum kernel combinations.
    pub lambda: T,
    /// Per-dimension lengthscales when true, shared ones when false.
    pub ard: bool,
    /// `None` disables the trust region entirely: proposals search the whole
    /// space and no restarts occur.
    pub trust_region: Option<TrustRegionConfig<T>>,
    /// Exploration-weight schedule for restart center selection and UCB.
    pub beta: BetaSchedule<T>,
    /// Refit hyperparameters every this many proposal iterations.
    pub fit_every: usize,
    /// Negate objective values at the boundary.
    pub minimize: bool,
    pub seed: u64,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        OptimizerConfig {
            n_init: 20,
            max_evals: 100,
            batch_size: 1,
            acquisition: AcqKind::Ei,
            kernel: KernelChoice::Mixed,
            lambda: T::of(0.5),
            ard: true,
            trust_region: Some(TrustRegionConfig::default()),
            beta: BetaSchedule::Constant {
                sqrt_beta: T::of(1.96),
            },
            fit_every: 1,
            minimize: false,
            seed: 0,
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn validate(&self, space: &SearchSpace<T>) -> Result<(), ConfigError> {
        if self.n_init < 2 {
            return Err(ConfigError::NInitTooSmall(self.n_init));
        }
        if self.max_evals < self.n_init {
            return Err(ConfigError::BudgetTooSmall {
                max_evals: self.max_evals,
                n_init: self.n_init,
            });
        }
        if self.batch_size == 0 {
            return Err(ConfigError::ZeroBatch);
        }
        if self.fit_every == 0 {
            return Err(ConfigError::ZeroFitEvery);
        }
        if !(self.lambda >= T::zero() && self.lambda <= T::one()) {
            return Err(ConfigError::LambdaOutOfRange);
        }
        if let Some(tr) = &self.trust_region {
            tr.validate()?;
        }
        // The surrogate constructor owns the kernel/space compatibility
        // rules; borrow them.
        SurrogateModel::new(space.clone(), self.kernel, self.ard).map_err(|e| {
            ConfigError::KernelMismatch {
                choice: format!("{:?}", self.kernel).to_lowercase(),
                reason: e.to_string(),
            }
        })?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex-printed.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Where the engine is in its protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Phase<T> {
    /// Collecting the initial design of the current restart.
    Init,
    /// Normal acquisition-driven iterations.
    Propose,
    /// Evaluating a random replacement for a duplicate archive entry.
    Replacement {
        original: MixedPoint<T>,
        replacement: MixedPoint<T>,
    },
    /// Budget exhausted.
    Done,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Pending<T> {
    points: Vec<MixedPoint<T>>,
    kind: EvalKind,
}

/// A run aborted by a protocol error; carries the partial record.
#[derive(Debug)]
pub struct AbortedRun<T> {
    pub error: ProtocolError,
    pub record: RunRecord<T>,
}

impl<T: Real> std::fmt::Display for AbortedRun<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run aborted after {} evaluations: {}",
            self.record.len(),
            self.error
        )
    }
}

impl<T: Real> std::error::Error for AbortedRun<T> {}

/// Incremental optimization engine. See the module docs for the protocol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Optimizer<T> {
    space: SearchSpace<T>,
    config: OptimizerConfig<T>,
    rng: ChaCha12Rng,
    phase: Phase<T>,
    pending: Option<Pending<T>>,
    restart_index: usize,
    /// Proposal iterations since the restart began (drives `fit_every`).
    proposal_iter: usize,
    /// Observations since the current restart began (internal scale).
    data_x: Vec<MixedPoint<T>>,
    data_y: Vec<T>,
    /// Frozen (mean, std) of the restart's initial design.
    standardization: Option<(T, T)>,
    /// Warm-start kernel hyperparameters carried between iterations.
    params: KernelParams<T>,
    noise: T,
    tr: Option<TrustRegionState<T>>,
    best_point: Option<MixedPoint<T>>,
    best_value: Option<T>,
    record: RunRecord<T>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(space: SearchSpace<T>, config: OptimizerConfig<T>) -> Result<Self, ConfigError> {
        config.validate(&space)?;
        let mut params = KernelParams::defaults(space.d_h(), space.d_x(), config.ard);
        params.lambda = config.lambda;
        let record = RunRecord::new(
            config.seed,
            config.hash(),
            "bo".into(),
            config.minimize,
        );
        Ok(Optimizer {
            rng: ChaCha12Rng::seed_from_u64(config.seed),
            space,
            config,
            phase: Phase::Init,
            pending: None,
            restart_index: 0,
            proposal_iter: 0,
            data_x: Vec::new(),
            data_y: Vec::new(),
            standardization: None,
            params,
            noise: T::of(DEFAULT_NOISE),
            tr: None,
            best_point: None,
            best_value: None,
            record,
        })
    }

    pub fn space(&self) -> &SearchSpace<T> {
        &self.space
    }

    pub fn config(&self) -> &OptimizerConfig<T> {
        &self.config
    }

    pub fn record(&self) -> &RunRecord<T> {
        &self.record
    }

    pub fn into_record(self) -> RunRecord<T> {
        self.record
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done) || self.record.len() >= self.config.max_evals
    }

    /// Points awaiting values from the last `ask`, if any.
    pub fn pending_points(&self) -> Option<&[MixedPoint<T>]> {
        self.pending.as_ref().map(|p| p.points.as_slice())
    }

    #[cfg(test)]
    fn training_size(&self) -> usize {
        self.data_x.len()
    }

    /// Request the next batch of points to evaluate.
    pub fn ask(&mut self) -> Result<Vec<MixedPoint<T>>, ProtocolError> {
        if self.pending.is_some() {
            return Err(ProtocolError::AskedTwice);
        }
        let remaining = self.config.max_evals.saturating_sub(self.record.len());
        if remaining == 0 || matches!(self.phase, Phase::Done) {
            self.phase = Phase::Done;
            return Err(ProtocolError::BudgetExhausted);
        }
        let (points, kind) = match self.phase.clone() {
            Phase::Done => unreachable!("handled above"),
            Phase::Init => {
                let k = self.config.n_init.min(remaining);
                let mut pts = Vec::with_capacity(k);
                for _ in 0..k {
                    // Restart 0 draws uniformly; later restarts draw inside
                    // the freshly reset region around the selected center.
                    let p = match (&self.tr, self.restart_index) {
                        (Some(tr), i) if i > 0 => self.space.sample_in_tr(
                            tr.center(),
                            tr.l_h().unwrap_or(0),
                            tr.l_x(),
                            &mut self.rng,
                        ),
                        _ => self.space.sample_uniform(&mut self.rng),
                    };
                    pts.push(p);
                }
                (pts, EvalKind::Init)
            }
            Phase::Replacement { replacement, .. } => {
                (vec![replacement], EvalKind::Replacement)
            }
            Phase::Propose => {
                let k = self.config.batch_size.min(remaining);
                (self.propose(k), EvalKind::Proposal)
            }
        };
        self.pending = Some(Pending {
            points: points.clone(),
            kind,
        });
        Ok(points)
    }

    /// Report objective values for the exact points of the last `ask`.
    /// On any error the engine state is untouched, so the caller may retry.
    pub fn tell(&mut self, points: &[MixedPoint<T>], values: &[T]) -> Result<(), ProtocolError> {
        let pending = self.pending.as_ref().ok_or(ProtocolError::TellWithoutAsk)?;
        if values.len() != pending.points.len() {
            return Err(ProtocolError::ArityMismatch {
                expected: pending.points.len(),
                got: values.len(),
            });
        }
        if points != pending.points.as_slice() {
            return Err(ProtocolError::PointMismatch);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProtocolError::NonFiniteValue { index });
        }

        let Pending { points, kind } = self.pending.take().expect("checked above");
        let internal: Vec<T> = values
            .iter()
            .map(|&v| if self.config.minimize { -v } else { v })
            .collect();
        let (l_h, l_x) = match &self.tr {
            Some(tr) => (tr.l_h(), tr.l_x()),
            None => (None, None),
        };
        for (p, &v) in points.iter().zip(&internal) {
            self.record
                .push_evaluation(self.restart_index, kind, p.clone(), v, l_h, l_x);
        }

        match kind {
            EvalKind::Init => self.absorb_init(points, internal),
            EvalKind::Proposal => self.absorb_proposals(points, internal),
            EvalKind::Replacement => {
                let Phase::Replacement { original, .. } =
                    std::mem::replace(&mut self.phase, Phase::Done)
                else {
                    unreachable!("replacement tell outside replacement phase");
                };
                self.record
                    .archive
                    .insert_replacement(original, points[0].clone(), internal[0]);
                self.finish_restart();
            }
            EvalKind::Random => unreachable!("the engine never asks for random points"),
        }
        Ok(())
    }

    /// Drive the engine to completion against `objective`. Built directly on
    /// `ask`/`tell`, so external loops reproduce it bit for bit.
    pub fn run<F>(mut self, mut objective: F) -> Result<RunRecord<T>, Box<AbortedRun<T>>>
    where
        F: FnMut(&MixedPoint<T>) -> T,
    {
        loop {
            let points = match self.ask() {
                Ok(points) => points,
                Err(ProtocolError::BudgetExhausted) => return Ok(self.into_record()),
                Err(error) => {
                    return Err(Box::new(AbortedRun {
                        error,
                        record: self.into_record(),
                    }))
                }
            };
            let values: Vec<T> = points.iter().map(&mut objective).collect();
            if let Err(error) = self.tell(&points, &values) {
                return Err(Box::new(AbortedRun {
                    error,
                    record: self.into_record(),
                }));
            }
        }
    }

    fn absorb_init(&mut self, points: Vec<MixedPoint<T>>, values: Vec<T>) {
        self.data_x.extend(points);
        self.data_y.extend(values);
        let (mean, std) = match crate::gp::standardize(&self.data_y) {
            Ok((_, mean, std)) => (mean, std),
            Err(_) => (T::zero(), T::one()),
        };
        self.standardization = Some((mean, std));

        let (bi, bv) = argmax(&self.data_y).expect("init design is nonempty");
        self.best_point = Some(self.data_x[bi].clone());
        self.best_value = Some(bv);

        let center = self.data_x[bi].clone();
        match (&mut self.tr, &self.config.trust_region) {
            // Restart 0: the region is born centered on the best initial point.
            (tr @ None, Some(cfg)) => {
                *tr = Some(
                    TrustRegionState::new(&self.space, cfg.clone(), center)
                        .expect("config was validated at construction"),
                );
            }
            // Later restarts: recenter the freshly reset region.
            (Some(tr), _) => tr.set_center(center),
            (None, None) => {}
        }
        self.phase = Phase::Propose;
        self.proposal_iter = 0;
    }

    fn absorb_proposals(&mut self, points: Vec<MixedPoint<T>>, values: Vec<T>) {
        self.data_x.extend(points.iter().cloned());
        self.data_y.extend(values.iter().cloned());
        self.proposal_iter += 1;

        let incumbent = self.best_value.expect("propose phase implies data");
        let improved = match argmax(&values) {
            Some((bi, bv)) if bv > incumbent => {
                self.best_point = Some(points[bi].clone());
                self.best_value = Some(bv);
                true
            }
            _ => false,
        };
        if let Some(tr) = &mut self.tr {
            if improved {
                tr.set_center(self.best_point.clone().expect("just updated"));
            }
            let outcome = tr.record_result(improved);
            if outcome.restart_needed {
                self.trigger_restart();
            }
        }
    }

    /// The current region collapsed: archive the restart's best point and
    /// either transition directly to the next restart or detour through a
    /// replacement evaluation when the point duplicates an archive entry.
    fn trigger_restart(&mut self) {
        let point = self.best_point.clone().expect("restart implies data");
        let value = self.best_value.expect("restart implies data");
        match self
            .record
            .archive
            .record_local_maximum(point.clone(), value, &self.space, &mut self.rng)
        {
            RecordOutcome::Inserted => self.finish_restart(),
            RecordOutcome::NeedsReplacement { replacement } => {
                if self.record.len() >= self.config.max_evals {
                    // No budget left to evaluate the replacement: the entry
                    // is dropped and the run ends.
                    self.phase = Phase::Done;
                } else {
                    self.phase = Phase::Replacement {
                        original: point,
                        replacement,
                    };
                }
            }
        }
    }

    /// Open the next restart: pick a center from the archive, log the event,
    /// and reset surrogate data, standardization, hyperparameters and region.
    fn finish_restart(&mut self) {
        self.restart_index += 1;
        if self.record.len() >= self.config.max_evals {
            self.phase = Phase::Done;
            return;
        }
        let sqrt_beta = self
            .config
            .beta
            .sqrt_beta_at(T::of(self.space.ln_config_count()), self.restart_index);
        let (center, source) = select_restart_center(
            &self.record.archive,
            &self.space,
            self.config.kernel,
            sqrt_beta,
            &mut self.rng,
        );
        self.record.restarts.push(RestartEvent {
            at_evaluation: self.record.len(),
            restart_index: self.restart_index,
            center: center.clone(),
            source,
        });

        self.data_x.clear();
        self.data_y.clear();
        self.standardization = None;
        self.params = KernelParams::defaults(self.space.d_h(), self.space.d_x(), self.config.ard);
        self.params.lambda = self.config.lambda;
        self.noise = T::of(DEFAULT_NOISE);
        self.best_point = None;
        self.best_value = None;
        self.proposal_iter = 0;
        if let Some(tr) = &mut self.tr {
            tr.reset(center);
        }
        self.phase = Phase::Init;
    }

    /// Fit (or refresh) the surrogate on the restart's data and run the
    /// acquisition search. Numerical failure falls back to region sampling so
    /// the engine stays total.
    fn propose(&mut self, k: usize) -> Vec<MixedPoint<T>> {
        let mut model = match SurrogateModel::new(self.space.clone(), self.config.kernel, self.config.ard)
        {
            Ok(m) => m,
            Err(_) => return self.fallback_samples(k),
        };
        let (mean, std) = self.standardization.expect("propose phase implies init");
        model.set_standardization(mean, std);
        if model
            .set_data(self.data_x.clone(), self.data_y.clone())
            .is_err()
        {
            return self.fallback_samples(k);
        }
        model.set_params(self.params.clone(), self.noise);

        let refit = (self.proposal_iter % self.config.fit_every) == 0;
        let ready = if refit {
            model.fit(&mut self.rng)
        } else {
            model.refresh()
        };
        if ready.is_err() {
            return self.fallback_samples(k);
        }
        self.params = model.params().clone();
        self.noise = model.noise_variance();

        let spec = match self.config.acquisition {
            AcqKind::Ei => {
                AcquisitionSpec::ei(model.best_y_tilde().expect("training data is nonempty"))
            }
            AcqKind::Ucb => {
                // The schedule indexes UCB by the upcoming 1-based evaluation.
                let i = self.record.len() + 1;
                AcquisitionSpec::ucb(
                    self.config
                        .beta
                        .sqrt_beta_at(T::of(self.space.ln_config_count()), i),
                )
            }
        };
        propose_batch_impl(&model, &spec, self.tr.as_ref(), k, &mut self.rng)
    }

    fn fallback_samples(&mut self, k: usize) -> Vec<MixedPoint<T>> {
        (0..k)
            .map(|_| match &self.tr {
                Some(tr) => self.space.sample_in_tr(
                    tr.center(),
                    tr.l_h().unwrap_or(0),
                    tr.l_x(),
                    &mut self.rng,
                ),
                None => self.space.sample_uniform(&mut self.rng),
            })
            .collect()
    }
}

fn argmax<T: Real>(values: &[T]) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, bv)) if bv >= v => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
