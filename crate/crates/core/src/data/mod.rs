//! Dataset ingestion, synthetic generation and preprocessing.
//!
//! Every dataset stores one sample per column.

mod delimited;
mod idx;
mod native;
mod preprocess;
mod synthetic;

use nalgebra::DMatrix;

pub use delimited::{load_csv_matrix, write_csv_matrix};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, write_idx};
pub use native::{load_native, read_native, write_native, NATIVE_MAGIC};
pub use preprocess::{downsample_images, normalize_columns, subsample_per_class};
pub use synthetic::{generate_union_of_subspaces, SubspaceGenSpec};

use crate::error::{Error, Result};
use crate::linalg::ensure_finite;
use crate::spectral::ClusterLabels;

pub type DataMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DataMatrix,
    pub labels: Option<ClusterLabels>,
    pub name: String,
    /// File path or generator parameters the data came from.
    pub provenance: String,
}

impl LabeledDataset {
    pub fn new(
        x: DataMatrix,
        labels: Option<ClusterLabels>,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        ensure_finite(&x, "dataset")?;
        if let Some(l) = &labels {
            if l.len() != x.ncols() {
                return Err(Error::domain(format!(
                    "{} labels for {} samples",
                    l.len(),
                    x.ncols()
                )));
            }
        }
        Ok(LabeledDataset {
            x,
            labels,
            name: name.into(),
            provenance: provenance.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }
}

/// On-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Native,
    Idx,
}

impl Format {
    /// Guesses the format from a file extension, also recognizing the
    /// extension-less `*-ubyte` names the digit datasets ship with.
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        let file_name = path.file_name()?.to_str()?.to_ascii_lowercase();
        if file_name.ends_with("-ubyte") {
            return Some(Format::Idx);
        }
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "csv" | "txt" => Some(Format::Csv),
            "bin" | "lrrm" => Some(Format::Native),
            "idx" | "idx3-ubyte" | "idx1-ubyte" | "ubyte" => Some(Format::Idx),
            _ => None,
        }
    }
}
