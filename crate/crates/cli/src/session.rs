//! `session`: drive one optimizer incrementally across process boundaries.
//!
//! The full engine (RNG included) lives in `state.json`; a sha-256 of the
//! file's exact bytes sits next to it and is verified before every command,
//! so a corrupted or hand-edited state is refused instead of silently
//! producing garbage. Commands rewrite the state only after they succeed:
//! a rejected `tell` leaves the session exactly as it was.
//!
//! `ask` prints one proposal per line in the record point syntax
//! (`cats|conts`, e.g. `2,0|0.5,0.25`) and mirrors them to `pending.tsv`
//! for the external evaluator; `tell` takes the matching values in order.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use mixbo::optimizer::Optimizer;
use mixbo::record::format_point;

use crate::config::ExperimentConfig;
use crate::CliError;

const STATE_FILE: &str = "state.json";
const CHECKSUM_FILE: &str = "state.json.sha256";
const PENDING_FILE: &str = "pending.tsv";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn state_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join(STATE_FILE), dir.join(CHECKSUM_FILE))
}

fn save_state(dir: &Path, engine: &Optimizer<f64>) -> Result<(), CliError> {
    let json = serde_json::to_string(engine)
        .map_err(|e| CliError::Runtime(format!("cannot serialize engine state: {e}")))?;
    let (state, checksum) = state_paths(dir);
    std::fs::write(&state, &json)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", state.display())))?;
    std::fs::write(&checksum, format!("{}\n", sha256_hex(json.as_bytes())))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", checksum.display())))?;
    Ok(())
}

fn load_state(dir: &Path) -> Result<Optimizer<f64>, CliError> {
    let (state, checksum) = state_paths(dir);
    let bytes = std::fs::read(&state)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", state.display())))?;
    let stored = std::fs::read_to_string(&checksum)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", checksum.display())))?;
    let actual = sha256_hex(&bytes);
    if stored.trim() != actual {
        return Err(CliError::Runtime(format!(
            "state checksum mismatch in {}: stored {} but the file hashes to {actual}; \
             refusing to act on a corrupted session",
            dir.display(),
            stored.trim()
        )));
    }
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Runtime(format!("cannot parse {}: {e}", state.display())))
}

/// Create a session directory holding a fresh engine built from the config
/// (seeded by the first entry of `seeds`).
pub fn init(config_path: &Path, dir: &Path) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let (space, minimize) = config.resolve_space(config_dir)?;
    let engine_config = config.optimizer_config(config.seeds[0], minimize);
    let engine = Optimizer::new(space, engine_config)
        .map_err(|e| CliError::Config(format!("optimizer config: {e}")))?;

    if state_paths(dir).0.exists() {
        return Err(CliError::Config(format!(
            "{} already holds a session; refusing to overwrite it",
            dir.display()
        )));
    }
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    save_state(dir, &engine)?;
    println!("session initialized in {}", dir.display());
    Ok(())
}

/// Advance to the next batch of proposals and print them, one per line.
pub fn ask(dir: &Path) -> Result<(), CliError> {
    let mut engine = load_state(dir)?;
    let points = engine
        .ask()
        .map_err(|e| CliError::Runtime(format!("protocol error: {e}")))?;
    let mut lines = String::new();
    for p in &points {
        lines.push_str(&format_point(p));
        lines.push('\n');
    }
    std::fs::write(dir.join(PENDING_FILE), &lines)
        .map_err(|e| CliError::Runtime(format!("cannot write pending proposals: {e}")))?;
    save_state(dir, &engine)?;
    print!("{lines}");
    Ok(())
}

/// Report objective values for the pending proposals, in `ask` order.
pub fn tell(dir: &Path, values: &[f64]) -> Result<(), CliError> {
    let mut engine = load_state(dir)?;
    let points = engine.pending_points().map(<[_]>::to_vec).unwrap_or_default();
    engine
        .tell(&points, values)
        .map_err(|e| CliError::Runtime(format!("protocol error: {e}")))?;
    save_state(dir, &engine)?;
    let _ = std::fs::remove_file(dir.join(PENDING_FILE));
    if engine.is_done() {
        println!(
            "recorded {} value(s); budget exhausted after {} evaluations",
            values.len(),
            engine.record().len()
        );
    } else {
        println!(
            "recorded {} value(s); {} of {} evaluations used",
            values.len(),
            engine.record().len(),
            engine.config().max_evals
        );
    }
    Ok(())
}

/// Print the session's run record so far (read-only).
pub fn record(dir: &Path) -> Result<(), CliError> {
    let engine = load_state(dir)?;
    print!("{}", engine.record().to_text());
    Ok(())
}
