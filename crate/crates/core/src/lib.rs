//! Trust-region Bayesian optimization for categorical, ordinal and mixed
//! search spaces.
//!
//! The engine localizes a Gaussian-process surrogate inside an adaptive
//! trust region (a Hamming ball over the categorical dimensions crossed with
//! a box over the continuous ones), proposes points by acquisition search,
//! and restarts from an upper-confidence-bound choice over the archive of
//! past local maxima once a region collapses. Benchmarks, a random-search
//! baseline, theory diagnostics and a line-oriented run-record format ship
//! alongside the engine.
//!
//! Every numeric layer is generic over the scalar type via [`scalar::Real`];
//! `f64` is the working default and the aliases below pin it for callers
//! that don't need the generics.

pub mod acquisition;
pub mod benchmarks;
pub mod diagnostics;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod optimizer;
pub mod record;
pub mod restart;
pub mod scalar;
pub mod space;
pub mod trustregion;

pub use acquisition::{AcqKind, AcquisitionSpec};
pub use benchmarks::BenchmarkProblem;
pub use error::{
    BenchmarkError, ConfigError, GpError, ProtocolError, RecordError, SpaceError, WcnfError,
};
pub use kernels::{KernelChoice, KernelParams};
pub use optimizer::{AbortedRun, Optimizer, OptimizerConfig};
pub use record::{EvalKind, RunRecord};
pub use restart::{BetaSchedule, CenterSource, RestartArchive};
pub use scalar::Real;
pub use space::{MixedPoint, SearchSpace};
pub use trustregion::{TrustRegionConfig, TrustRegionState};

/// `f64` search space.
pub type Space = space::SearchSpace<f64>;
/// `f64` point.
pub type Point = space::MixedPoint<f64>;
/// `f64` surrogate model.
pub type Surrogate = gp::SurrogateModel<f64>;
/// `f64` engine configuration.
pub type Config = optimizer::OptimizerConfig<f64>;
/// `f64` optimization engine.
pub type Engine = optimizer::Optimizer<f64>;
/// `f64` run record.
pub type Record = record::RunRecord<f64>;
