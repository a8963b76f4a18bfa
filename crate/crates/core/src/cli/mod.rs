//! Config-driven scenario runner with provenance manifests.

pub mod config;
pub mod manifest;
pub mod output;
mod scenarios;

pub use config::{Resolved, RunConfig, Scenario};
pub use manifest::{FileDigest, RunManifest, MANIFEST_FILE};
pub use scenarios::{execute, run_scenario};
