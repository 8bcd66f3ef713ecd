//! Run records: the evaluation-by-evaluation log of an optimization run.
//!
//! A record stores every objective evaluation with its restart ordinal, the
//! trust-region lengths at proposal time, and the running incumbent, plus
//! restart transition events and the final restart archive. Values are kept
//! on the internal maximization scale; the `minimize` flag says whether the
//! user-facing objective was negated at the boundary.
//!
//! The text serialization is line-delimited: `#`-prefixed header, restart,
//! and archive lines frame one tab-separated row per evaluation, so records
//! are greppable and diffable. Floats print via the shortest round-trip
//! representation, making serialize/parse lossless.

use serde::{Deserialize, Serialize};

use crate::error::RecordError;
use crate::restart::{ArchiveEntry, CenterSource, RestartArchive};
use crate::scalar::Real;
use crate::space::MixedPoint;

/// Why a point was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    /// Initial design of a restart.
    Init,
    /// Acquisition-driven proposal.
    Proposal,
    /// Random replacement for a duplicate archive entry.
    Replacement,
    /// Random-search baseline draw.
    Random,
}

impl EvalKind {
    fn as_str(self) -> &'static str {
        match self {
            EvalKind::Init => "init",
            EvalKind::Proposal => "proposal",
            EvalKind::Replacement => "replacement",
            EvalKind::Random => "random",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "init" => EvalKind::Init,
            "proposal" => EvalKind::Proposal,
            "replacement" => EvalKind::Replacement,
            "random" => EvalKind::Random,
            _ => return None,
        })
    }
}

/// One objective evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation<T> {
    /// 1-based position in the run.
    pub index: usize,
    /// 0-based restart ordinal the evaluation belongs to.
    pub restart_index: usize,
    pub kind: EvalKind,
    pub point: MixedPoint<T>,
    /// Raw value on the internal maximization scale.
    pub value: T,
    /// Running maximum up to and including this evaluation.
    pub incumbent: T,
    /// Categorical trust-region length at proposal time, if a region existed.
    pub l_h: Option<usize>,
    /// Continuous trust-region length at proposal time, if applicable.
    pub l_x: Option<T>,
}

/// A restart transition: a new trust region was opened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent<T> {
    /// Number of evaluations completed when the restart began.
    pub at_evaluation: usize,
    /// Ordinal of the restart being opened (1-based: restart 0 is implicit).
    pub restart_index: usize,
    pub center: MixedPoint<T>,
    pub source: CenterSource,
}

/// Complete log of one optimization or baseline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<T> {
    pub seed: u64,
    /// Hash of the originating configuration (hex).
    pub config_hash: String,
    /// Producing method, e.g. `bo` or `random`.
    pub method: String,
    /// Whether user-facing values were negated into the internal scale.
    pub minimize: bool,
    pub evaluations: Vec<Evaluation<T>>,
    pub restarts: Vec<RestartEvent<T>>,
    pub archive: RestartArchive<T>,
}

impl<T: Real> RunRecord<T> {
    pub fn new(seed: u64, config_hash: String, method: String, minimize: bool) -> Self {
        RunRecord {
            seed,
            config_hash,
            method,
            minimize,
            evaluations: Vec::new(),
            restarts: Vec::new(),
            archive: RestartArchive::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    /// Append an evaluation, maintaining the monotone incumbent.
    #[allow(clippy::too_many_arguments)]
    pub fn push_evaluation(
        &mut self,
        restart_index: usize,
        kind: EvalKind,
        point: MixedPoint<T>,
        value: T,
        l_h: Option<usize>,
        l_x: Option<T>,
    ) {
        let incumbent = match self.evaluations.last() {
            Some(prev) if prev.incumbent > value => prev.incumbent,
            _ => value,
        };
        self.evaluations.push(Evaluation {
            index: self.evaluations.len() + 1,
            restart_index,
            kind,
            point,
            value,
            incumbent,
            l_h,
            l_x,
        });
    }

    /// Running incumbent per evaluation (internal maximization scale).
    pub fn incumbent_trajectory(&self) -> Vec<T> {
        self.evaluations.iter().map(|e| e.incumbent).collect()
    }

    /// Best evaluation of the run, if any.
    pub fn best(&self) -> Option<&Evaluation<T>> {
        self.evaluations
            .iter()
            .fold(None, |acc: Option<&Evaluation<T>>, e| match acc {
                Some(b) if b.value >= e.value => Some(b),
                _ => Some(e),
            })
    }

    /// Final incumbent translated back to the user-facing objective scale.
    pub fn final_objective_value(&self) -> Option<T> {
        self.evaluations.last().map(|e| {
            if self.minimize {
                -e.incumbent
            } else {
                e.incumbent
            }
        })
    }

    /// Serialize to the line-delimited text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# run seed={} method={} minimize={} config={}\n",
            self.seed, self.method, self.minimize, self.config_hash
        ));
        out.push_str("# columns: iter\trestart\tkind\tpoint\tvalue\tincumbent\tl_h\tl_x\n");
        for e in &self.evaluations {
            let l_h = e.l_h.map_or("-".to_string(), |v| v.to_string());
            let l_x = e.l_x.map_or("-".to_string(), |v| format!("{v}"));
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.index,
                e.restart_index,
                e.kind.as_str(),
                format_point(&e.point),
                e.value,
                e.incumbent,
                l_h,
                l_x
            ));
        }
        for r in &self.restarts {
            out.push_str(&format!(
                "# restart at={} index={} source={} center={}\n",
                r.at_evaluation,
                r.restart_index,
                source_str(r.source),
                format_point(&r.center)
            ));
        }
        for e in self.archive.entries() {
            out.push_str(&format!(
                "# archive {}\t{}\n",
                format_point(&e.point),
                e.value
            ));
        }
        for d in self.archive.resolutions() {
            out.push_str(&format!(
                "# resolution {} -> {}\n",
                format_point(&d.original),
                format_point(&d.replacement)
            ));
        }
        out
    }

    /// Parse the text format back into a record.
    pub fn from_text(text: &str) -> Result<Self, RecordError> {
        let mut record: Option<RunRecord<T>> = None;
        let mut archive = RestartArchive::new();
        let mut archive_rows: Vec<ArchiveEntry<T>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let fail = |msg: &str| RecordError::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# run ") {
                let mut seed = None;
                let mut method = None;
                let mut minimize = None;
                let mut config = None;
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| fail("bad header pair"))?;
                    match k {
                        "seed" => seed = Some(v.parse().map_err(|_| fail("bad seed"))?),
                        "method" => method = Some(v.to_string()),
                        "minimize" => {
                            minimize = Some(v.parse().map_err(|_| fail("bad minimize flag"))?)
                        }
                        "config" => config = Some(v.to_string()),
                        _ => return Err(fail("unknown header key")),
                    }
                }
                record = Some(RunRecord::new(
                    seed.ok_or(RecordError::MissingField("seed"))?,
                    config.ok_or(RecordError::MissingField("config"))?,
                    method.ok_or(RecordError::MissingField("method"))?,
                    minimize.ok_or(RecordError::MissingField("minimize"))?,
                ));
                continue;
            }
            if let Some(rest) = line.strip_prefix("# restart ") {
                let rec = record.as_mut().ok_or_else(|| fail("restart before header"))?;
                let mut at = None;
                let mut index = None;
                let mut source = None;
                let mut center = None;
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| fail("bad restart pair"))?;
                    match k {
                        "at" => at = Some(v.parse().map_err(|_| fail("bad at"))?),
                        "index" => index = Some(v.parse().map_err(|_| fail("bad index"))?),
                        "source" => {
                            source = Some(parse_source(v).ok_or_else(|| fail("bad source"))?)
                        }
                        "center" => {
                            center = Some(parse_point(v).ok_or_else(|| fail("bad center"))?)
                        }
                        _ => return Err(fail("unknown restart key")),
                    }
                }
                rec.restarts.push(RestartEvent {
                    at_evaluation: at.ok_or(RecordError::MissingField("at"))?,
                    restart_index: index.ok_or(RecordError::MissingField("index"))?,
                    center: center.ok_or(RecordError::MissingField("center"))?,
                    source: source.ok_or(RecordError::MissingField("source"))?,
                });
                continue;
            }
            if let Some(rest) = line.strip_prefix("# archive ") {
                let mut parts = rest.split('\t');
                let point = parts
                    .next()
                    .and_then(parse_point)
                    .ok_or_else(|| fail("bad archive point"))?;
                let value: T = parts
                    .next()
                    .and_then(|v| v.parse::<f64>().ok())
                    .map(T::of)
                    .ok_or_else(|| fail("bad archive value"))?;
                archive_rows.push(ArchiveEntry { point, value });
                continue;
            }
            if let Some(rest) = line.strip_prefix("# resolution ") {
                let (a, b) = rest.split_once(" -> ").ok_or_else(|| fail("bad resolution"))?;
                let original = parse_point(a).ok_or_else(|| fail("bad resolution original"))?;
                let replacement =
                    parse_point(b).ok_or_else(|| fail("bad resolution replacement"))?;
                archive.push_resolution(original, replacement);
                continue;
            }
            if line.starts_with('#') {
                continue; // comments, including the column header
            }

            let rec = record.as_mut().ok_or_else(|| fail("row before header"))?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 8 {
                return Err(fail("expected 8 tab-separated columns"));
            }
            let index: usize = cols[0].parse().map_err(|_| fail("bad iteration"))?;
            let restart_index: usize = cols[1].parse().map_err(|_| fail("bad restart index"))?;
            let kind = EvalKind::parse(cols[2]).ok_or_else(|| fail("bad kind"))?;
            let point = parse_point(cols[3]).ok_or_else(|| fail("bad point"))?;
            let value: f64 = cols[4].parse().map_err(|_| fail("bad value"))?;
            let incumbent: f64 = cols[5].parse().map_err(|_| fail("bad incumbent"))?;
            let l_h = match cols[6] {
                "-" => None,
                s => Some(s.parse().map_err(|_| fail("bad l_h"))?),
            };
            let l_x = match cols[7] {
                "-" => None,
                s => Some(T::of(s.parse::<f64>().map_err(|_| fail("bad l_x"))?)),
            };
            if index != rec.evaluations.len() + 1 {
                return Err(fail("iteration indices must be 1-based and consecutive"));
            }
            rec.evaluations.push(Evaluation {
                index,
                restart_index,
                kind,
                point,
                value: T::of(value),
                incumbent: T::of(incumbent),
                l_h,
                l_x,
            });
        }
        let mut rec = record.ok_or(RecordError::MissingField("header"))?;
        for row in archive_rows {
            archive.push_entry(row);
        }
        rec.archive = archive;
        Ok(rec)
    }
}

fn source_str(s: CenterSource) -> &'static str {
    match s {
        CenterSource::Uniform => "uniform",
        CenterSource::Defaults => "defaults",
        CenterSource::Fitted => "fitted",
        CenterSource::FitFallback => "fit-fallback",
    }
}

fn parse_source(s: &str) -> Option<CenterSource> {
    Some(match s {
        "uniform" => CenterSource::Uniform,
        "defaults" => CenterSource::Defaults,
        "fitted" => CenterSource::Fitted,
        "fit-fallback" => CenterSource::FitFallback,
        _ => return None,
    })
}

/// `cats|conts`, e.g. `2,0,1|0.5,0.25`; either side may be empty.
pub fn format_point<T: Real>(p: &MixedPoint<T>) -> String {
    let cats: Vec<String> = p.cats.iter().map(|c| c.to_string()).collect();
    let conts: Vec<String> = p.conts.iter().map(|x| format!("{x}")).collect();
    format!("{}|{}", cats.join(","), conts.join(","))
}

/// Inverse of [`format_point`].
pub fn parse_point<T: Real>(s: &str) -> Option<MixedPoint<T>> {
    let (cat_part, cont_part) = s.split_once('|')?;
    let cats = if cat_part.is_empty() {
        Vec::new()
    } else {
        cat_part
            .split(',')
            .map(|c| c.parse::<usize>().ok())
            .collect::<Option<Vec<_>>>()?
    };
    let conts = if cont_part.is_empty() {
        Vec::new()
    } else {
        cont_part
            .split(',')
            .map(|x| x.parse::<f64>().ok().map(T::of))
            .collect::<Option<Vec<_>>>()?
    };
    Some(MixedPoint { cats, conts })
}
