use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lrr_core::data::LabeledDataset;
use serde::Serialize;

use crate::failure::{Failure, Outcome};

/// Record of one run: enough to reproduce its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub tool_version: &'static str,
    /// Fully resolved configuration, including defaults.
    pub config: serde_json::Value,
    pub dataset: Option<DatasetSummary>,
    pub seed: Option<u64>,
    pub artifacts: BTreeMap<&'static str, PathBuf>,
    pub wall_clock_secs: f64,
    pub diagnostics: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub provenance: String,
    pub dim: usize,
    pub samples: usize,
    pub classes: Option<usize>,
}

impl DatasetSummary {
    pub fn of(ds: &LabeledDataset) -> Self {
        DatasetSummary {
            name: ds.name.clone(),
            provenance: ds.provenance.clone(),
            dim: ds.dim(),
            samples: ds.len(),
            classes: ds.labels.as_ref().map(|l| l.distinct()),
        }
    }
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Outcome {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Failure::io(path, e))
    }
}

/// Config serialized for a manifest.
pub fn config_value(cfg: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}
