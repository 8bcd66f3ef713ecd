//! Benchmark objectives, a name-based registry, and the random-search
//! baseline.

pub mod synthetic;
pub mod wcnf;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use synthetic::{
    ackley53, ackley53_space, bea, branin51_space, branin_discretized, cam, func2c, func2c_space,
    func3c, func3c_space, ros,
};
pub use wcnf::{brute_force_optimum, maxsat_value, parse_wcnf, serialize_wcnf, WcnfInstance};

use crate::error::BenchmarkError;
use crate::record::{EvalKind, RunRecord};
use crate::scalar::Real;
use crate::space::{MixedPoint, SearchSpace};

/// A named benchmark bundled with its search space and sign convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProblem<T> {
    id: BenchmarkId,
    space: SearchSpace<T>,
    /// True when the natural objective is minimized; the optimizer then
    /// negates values at its boundary.
    minimize: bool,
    /// Known optimum on the natural scale, when available.
    known_best: Option<T>,
    wcnf: Option<WcnfInstance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BenchmarkId {
    Ackley53,
    Func2C,
    Func3C,
    Branin51,
    MaxSat,
}

impl<T: Real> BenchmarkProblem<T> {
    /// Look a problem up by its registry name. `wcnf_text` supplies the
    /// instance for `maxsat` and is ignored otherwise.
    pub fn by_name(name: &str, wcnf_text: Option<&str>) -> Result<Self, BenchmarkError> {
        let (id, space, minimize, known_best, wcnf) = match name {
            "ackley53" => (
                BenchmarkId::Ackley53,
                ackley53_space(),
                true,
                Some(T::zero()),
                None,
            ),
            "func2c" => (BenchmarkId::Func2C, func2c_space(), false, None, None),
            "func3c" => (BenchmarkId::Func3C, func3c_space(), false, None, None),
            "branin51" => (
                BenchmarkId::Branin51,
                branin51_space(),
                true,
                Some(T::of(0.40377012092497644)),
                None,
            ),
            "maxsat" => {
                let text = wcnf_text.ok_or_else(|| BenchmarkError::MissingWcnf(name.into()))?;
                let instance = parse_wcnf(text)?;
                let space = instance.space();
                (BenchmarkId::MaxSat, space, false, None, Some(instance))
            }
            other => return Err(BenchmarkError::Unknown(other.into())),
        };
        Ok(BenchmarkProblem {
            id,
            space,
            minimize,
            known_best,
            wcnf,
        })
    }

    /// All registry names accepted by [`BenchmarkProblem::by_name`].
    pub fn names() -> &'static [&'static str] {
        &["ackley53", "func2c", "func3c", "branin51", "maxsat"]
    }

    pub fn space(&self) -> &SearchSpace<T> {
        &self.space
    }

    pub fn minimize(&self) -> bool {
        self.minimize
    }

    pub fn known_best(&self) -> Option<T> {
        self.known_best
    }

    pub fn wcnf(&self) -> Option<&WcnfInstance> {
        self.wcnf.as_ref()
    }

    /// Evaluate the natural-scale objective.
    pub fn evaluate(&self, z: &MixedPoint<T>) -> Result<T, BenchmarkError> {
        match self.id {
            BenchmarkId::Ackley53 => ackley53(z),
            BenchmarkId::Func2C => func2c(z),
            BenchmarkId::Func3C => func3c(z),
            BenchmarkId::Branin51 => branin_discretized(z),
            BenchmarkId::MaxSat => {
                let instance = self.wcnf.as_ref().expect("maxsat carries its instance");
                if z.cats.len() != instance.num_vars || !z.conts.is_empty() {
                    return Err(BenchmarkError::Shape {
                        expected_h: instance.num_vars,
                        expected_x: 0,
                        got_h: z.cats.len(),
                        got_x: z.conts.len(),
                    });
                }
                let assignment: Vec<bool> = z.cats.iter().map(|&c| c == 1).collect();
                Ok(maxsat_value(instance, &assignment))
            }
        }
    }
}

/// Uniform random search: `t` independent draws from the space, logged in
/// the common run-record schema (kind `random`, restart 0, no trust region).
///
/// Values are recorded exactly as the objective returns them; callers that
/// minimize pass a negating closure and flip the record's `minimize` flag.
/// The record's seed and config hash likewise belong to the caller.
pub fn random_search<T, R, F>(
    mut objective: F,
    space: &SearchSpace<T>,
    t: usize,
    rng: &mut R,
) -> RunRecord<T>
where
    T: Real,
    R: Rng,
    F: FnMut(&MixedPoint<T>) -> T,
{
    let mut record = RunRecord::new(0, String::new(), "random".into(), false);
    for _ in 0..t {
        let z = space.sample_uniform(rng);
        let value = objective(&z);
        record.push_evaluation(0, EvalKind::Random, z, value, None, None);
    }
    record
}
