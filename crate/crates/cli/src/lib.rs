//! Library side of the `factual` command: manifests, input validation,
//! runs, and trace reports.

pub mod inputs;
pub mod manifest;
pub mod report;
pub mod run;

pub use inputs::{load, Finding, Prepared};
pub use manifest::{Domain, Mode, RunManifest};
pub use report::{summarize, Report};
pub use run::{run_manifest, RunError, RunSummary, CLUSTERS_FILE, SNAPSHOT_FILE, TRACE_FILE};
