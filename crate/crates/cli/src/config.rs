//! Declarative experiment configuration, read from TOML.
//!
//! A config names either a registered benchmark (the harness evaluates it)
//! or, with `external = true`, a bare `[space]` for sessions whose objective
//! lives outside this process. Every optimizer knob is optional and falls
//! back to the engine default; unknown keys are rejected so typos fail loud.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use mixbo::acquisition::AcqKind;
use mixbo::benchmarks::BenchmarkProblem;
use mixbo::kernels::KernelChoice;
use mixbo::optimizer::OptimizerConfig;
use mixbo::restart::BetaSchedule;
use mixbo::space::{OrdinalMetric, SearchSpace};
use mixbo::trustregion::TrustRegionConfig;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered benchmark name; required unless `external` is set.
    pub benchmark: Option<String>,
    /// WCNF instance path (relative to the config file) for `maxsat`.
    pub wcnf: Option<PathBuf>,
    /// The objective is evaluated outside this process (session mode only).
    #[serde(default)]
    pub external: bool,
    /// Explicit search space for external mode.
    pub space: Option<SpaceSection>,
    /// One engine run per seed; sessions use the first entry.
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Also run the uniform random-search baseline at the same budget.
    #[serde(default)]
    pub random_search: bool,
    #[serde(default)]
    pub optimizer: OptimizerSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// Cardinality of each categorical dimension.
    pub cards: Vec<usize>,
    /// Per-dimension flag: levels are equally spaced ordinals. Empty means
    /// all plain categorical.
    #[serde(default)]
    pub ordinal: Vec<bool>,
    /// `(lower, upper)` per continuous dimension.
    #[serde(default)]
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub n_init: Option<usize>,
    pub max_evals: Option<usize>,
    pub batch_size: Option<usize>,
    pub acquisition: Option<AcqKind>,
    pub kernel: Option<KernelChoice>,
    pub lambda: Option<f64>,
    pub ard: Option<bool>,
    /// `false` disables the region; a table overrides individual knobs.
    pub trust_region: Option<TrustRegionField>,
    /// A bare number is a constant sqrt(beta); `{ zeta = ... }` selects the
    /// growing theory schedule.
    pub beta: Option<BetaField>,
    pub fit_every: Option<usize>,
    pub minimize: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TrustRegionField {
    Enabled(bool),
    Overrides(TrOverrides),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrOverrides {
    pub succ_tol: Option<usize>,
    pub fail_tol: Option<usize>,
    pub alpha_s: Option<f64>,
    pub l_h0: Option<usize>,
    pub l_x0: Option<f64>,
    pub l_x_min: Option<f64>,
    pub l_x_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BetaField {
    SqrtBeta(f64),
    Theory { zeta: f64 },
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must be nonempty".into()));
        }
        if self.external {
            if self.benchmark.is_some() {
                return Err(CliError::Config(
                    "external = true conflicts with a benchmark name; pick one".into(),
                ));
            }
            if self.space.is_none() {
                return Err(CliError::Config(
                    "external = true requires a [space] section".into(),
                ));
            }
        } else if self.benchmark.is_none() {
            return Err(CliError::Config(
                "either name a benchmark or set external = true".into(),
            ));
        } else if self.space.is_some() {
            return Err(CliError::Config(
                "[space] is only for external mode; benchmarks define their own".into(),
            ));
        }
        if self.wcnf.is_some() && self.benchmark.as_deref() != Some("maxsat") {
            return Err(CliError::Config(
                "wcnf is only meaningful with benchmark = \"maxsat\"".into(),
            ));
        }
        if self.benchmark.is_some() && self.optimizer.minimize.is_some() {
            return Err(CliError::Config(
                "the benchmark fixes the optimization direction; drop `minimize`".into(),
            ));
        }
        Ok(())
    }

    /// Resolve the benchmark named by the config; `config_dir` anchors the
    /// WCNF path. Errors before any output exists.
    pub fn resolve_benchmark(&self, config_dir: &Path) -> Result<BenchmarkProblem<f64>, CliError> {
        let name = self
            .benchmark
            .as_deref()
            .ok_or_else(|| CliError::Config("no benchmark in an external config".into()))?;
        let wcnf_text = match &self.wcnf {
            Some(rel) => {
                let path = config_dir.join(rel);
                Some(std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read wcnf {}: {e}", path.display()))
                })?)
            }
            None => None,
        };
        BenchmarkProblem::by_name(name, wcnf_text.as_deref())
            .map_err(|e| CliError::Config(format!("benchmark {name:?}: {e}")))
    }

    /// The search space a session optimizes over and the natural direction:
    /// the benchmark's, or in external mode the explicit `[space]` with the
    /// `minimize` key (default: maximize).
    pub fn resolve_space(&self, config_dir: &Path) -> Result<(SearchSpace<f64>, bool), CliError> {
        if let Some(section) = &self.space {
            return Ok((section.build()?, self.optimizer.minimize.unwrap_or(false)));
        }
        let problem = self.resolve_benchmark(config_dir)?;
        Ok((problem.space().clone(), problem.minimize()))
    }

    /// Engine configuration for one seed of this experiment. `minimize` is
    /// resolved by the caller: benchmarks dictate it, external mode reads it
    /// from the config.
    pub fn optimizer_config(&self, seed: u64, minimize: bool) -> OptimizerConfig<f64> {
        let defaults = OptimizerConfig::<f64>::default();
        let section = &self.optimizer;
        OptimizerConfig {
            n_init: section.n_init.unwrap_or(defaults.n_init),
            max_evals: section.max_evals.unwrap_or(defaults.max_evals),
            batch_size: section.batch_size.unwrap_or(defaults.batch_size),
            acquisition: section.acquisition.unwrap_or(defaults.acquisition),
            kernel: section.kernel.unwrap_or(defaults.kernel),
            lambda: section.lambda.unwrap_or(defaults.lambda),
            ard: section.ard.unwrap_or(defaults.ard),
            trust_region: match &section.trust_region {
                None | Some(TrustRegionField::Enabled(true)) => defaults.trust_region,
                Some(TrustRegionField::Enabled(false)) => None,
                Some(TrustRegionField::Overrides(o)) => {
                    let base = TrustRegionConfig::<f64>::default();
                    Some(TrustRegionConfig {
                        succ_tol: o.succ_tol.unwrap_or(base.succ_tol),
                        fail_tol: o.fail_tol.unwrap_or(base.fail_tol),
                        alpha_s: o.alpha_s.unwrap_or(base.alpha_s),
                        l_h0: o.l_h0.or(base.l_h0),
                        l_x0: o.l_x0.unwrap_or(base.l_x0),
                        l_x_min: o.l_x_min.unwrap_or(base.l_x_min),
                        l_x_max: o.l_x_max.unwrap_or(base.l_x_max),
                    })
                }
            },
            beta: match section.beta {
                None => defaults.beta,
                Some(BetaField::SqrtBeta(sqrt_beta)) => BetaSchedule::Constant { sqrt_beta },
                Some(BetaField::Theory { zeta }) => BetaSchedule::Theory { zeta },
            },
            fit_every: section.fit_every.unwrap_or(defaults.fit_every),
            minimize,
            seed,
        }
    }
}

impl SpaceSection {
    fn build(&self) -> Result<SearchSpace<f64>, CliError> {
        if !self.ordinal.is_empty() && self.ordinal.len() != self.cards.len() {
            return Err(CliError::Config(format!(
                "ordinal flags ({}) must match cards ({})",
                self.ordinal.len(),
                self.cards.len()
            )));
        }
        let metrics: Vec<Option<OrdinalMetric<f64>>> = if self.ordinal.is_empty() {
            vec![None; self.cards.len()]
        } else {
            self.ordinal
                .iter()
                .map(|&o| o.then_some(OrdinalMetric::EquallySpaced))
                .collect()
        };
        SearchSpace::new(self.cards.clone(), metrics, self.bounds.clone())
            .map_err(|e| CliError::Config(format!("invalid [space]: {e}")))
    }
}
