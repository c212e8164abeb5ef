//! Running the engine over prepared inputs and writing its outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use factual_core::swarm::{batches_by_time, ClusterTimelineEntry, Engine, EngineError};
use thiserror::Error;

use crate::inputs::{load, Finding, Prepared};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const CLUSTERS_FILE: &str = "clusters.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{} validation finding(s)", .0.len())]
    Invalid(Vec<Finding>),
    #[error("engine fault: {0}")]
    Engine(#[from] EngineError),
    #[error("writing outputs: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 1 for bad inputs, 2 for everything that went wrong afterwards.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Invalid(_) => 1,
            RunError::Engine(e) if e.is_input_error() => 1,
            RunError::Engine(_) | RunError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub ticks: u64,
    pub agents: usize,
    pub events: u64,
    pub final_clusters: usize,
}

/// Validates the manifest's inputs, then runs. `output_dir` overrides the
/// manifest's directory.
pub fn run_manifest(manifest: &Path, output_dir: Option<&Path>) -> Result<RunSummary, RunError> {
    let prepared = load(manifest).map_err(RunError::Invalid)?;
    let out = output_dir.map(Path::to_path_buf).unwrap_or_else(|| prepared.manifest.output_dir.clone());
    run_prepared(prepared, &out)
}

pub fn run_prepared(prepared: Prepared, out: &Path) -> Result<RunSummary, RunError> {
    let adapter = prepared.adapter();
    let mut engine = Engine::new(prepared.setup, adapter)?;

    fs::create_dir_all(out)?;
    let mut trace = BufWriter::new(File::create(out.join(TRACE_FILE))?);
    let mut clusters = BufWriter::new(File::create(out.join(CLUSTERS_FILE))?);
    let mut events = 0u64;
    let mut final_clusters = 0;
    for batch in batches_by_time(prepared.features) {
        let report = engine.step_batch(batch)?;
        for e in &report.events {
            writeln!(trace, "{}", e.to_json_line())?;
        }
        events += report.events.len() as u64;
        final_clusters = report.clusters.len();
        let entry = ClusterTimelineEntry { tick: report.tick, clusters: report.clusters };
        writeln!(clusters, "{}", serde_json::to_string(&entry).expect("timeline serializes"))?;
    }
    trace.flush()?;
    clusters.flush()?;

    let snapshot = engine.snapshot()?;
    let mut text = serde_json::to_string(&snapshot).expect("snapshot serializes");
    text.push('\n');
    fs::write(out.join(SNAPSHOT_FILE), text)?;

    Ok(RunSummary {
        output_dir: out.to_path_buf(),
        ticks: engine.tick_count(),
        agents: engine.population(),
        events,
        final_clusters,
    })
}
