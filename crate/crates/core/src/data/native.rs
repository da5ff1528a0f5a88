//! Native binary matrix format.
//!
//! ```text
//! "LRRM"  u32 rows  u32 cols  rows·cols × f64 (row-major)
//! ["LBLS" u32 count count × u32]      optional label block
//! ```
//! All integers and floats are little-endian.

use std::path::Path;

use nalgebra::DMatrix;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::spectral::ClusterLabels;

pub const NATIVE_MAGIC: &[u8; 4] = b"LRRM";
pub const LABEL_MAGIC: &[u8; 4] = b"LBLS";

pub fn write_native(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let (m, n) = ds.x.shape();
    let mut out = Vec::with_capacity(12 + 8 * m * n);
    out.extend_from_slice(NATIVE_MAGIC);
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for row in ds.x.row_iter() {
        for v in row.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(labels) = &ds.labels {
        out.extend_from_slice(LABEL_MAGIC);
        out.extend_from_slice(&(labels.len() as u32).to_le_bytes());
        for &l in labels.as_slice() {
            out.extend_from_slice(&(l as u32).to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
    source: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.at + len;
        let slice = self.bytes.get(self.at..end).ok_or_else(|| {
            Error::parse(
                self.source,
                format!(
                    "truncated {what} at byte {}: expected {end} bytes, file has {}",
                    self.at,
                    self.bytes.len()
                ),
            )
        })?;
        self.at = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Parses the native format from memory.
pub fn read_native(bytes: &[u8], source: &str) -> Result<LabeledDataset> {
    let mut cur = Cursor { bytes, at: 0, source };
    if cur.take(4, "magic")? != NATIVE_MAGIC {
        return Err(Error::parse(source, "bad magic at byte 0: expected \"LRRM\""));
    }
    let m = cur.u32("row count")? as usize;
    let n = cur.u32("column count")? as usize;
    let payload = cur.take(8 * m * n, "matrix payload")?;
    let mut values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut x = DMatrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            x[(r, c)] = values.next().unwrap();
        }
    }

    let labels = if cur.at == bytes.len() {
        None
    } else {
        let at = cur.at;
        if cur.take(4, "label magic")? != LABEL_MAGIC {
            return Err(Error::parse(source, format!("bad label block magic at byte {at}")));
        }
        let count = cur.u32("label count")? as usize;
        if count != n {
            return Err(Error::parse(source, format!("label block holds {count} labels for {n} columns")));
        }
        let raw = cur.take(4 * count, "labels")?;
        let labels = raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        if cur.at != bytes.len() {
            return Err(Error::parse(
                source,
                format!("{} trailing bytes after byte {}", bytes.len() - cur.at, cur.at),
            ));
        }
        Some(ClusterLabels::from_labels(labels)?)
    };
    LabeledDataset::new(x, labels, "native", format!("native:{source}"))
}

pub fn load_native(path: &Path) -> Result<LabeledDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut ds = read_native(&bytes, &path.display().to_string())?;
    if let Some(stem) = path.file_stem() {
        ds.name = stem.to_string_lossy().into_owned();
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            m in 0usize..5,
            n in 1usize..6,
            seed in proptest::collection::vec(-1e6..1e6f64, 30),
            labelled: bool,
        ) {
            let x = DMatrix::from_fn(m, n, |i, j| seed[(i * n + j) % seed.len()]);
            let labels = labelled.then(|| ClusterLabels::from_labels((0..n).map(|i| i % 3).collect()).unwrap());
            let ds = LabeledDataset::new(x, labels, "t", "t").unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("d.bin");
            write_native(&ds, &p).unwrap();
            let back = load_native(&p).unwrap();
            prop_assert_eq!(back.x.shape(), ds.x.shape());
            for (a, b) in back.x.iter().zip(ds.x.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.labels, ds.labels);
        }
    }

    #[test]
    fn rejects_truncation_and_bad_magic() {
        let ds = LabeledDataset::new(DMatrix::from_element(2, 2, 1.5), None, "t", "t").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.bin");
        write_native(&ds, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let err = read_native(&bytes[..20], "d").unwrap_err().to_string();
        assert!(err.contains("expected 44 bytes"), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_native(&bad, "d").is_err());
        let mut trailing = bytes;
        trailing.extend_from_slice(b"JUNK");
        assert!(read_native(&trailing, "d").is_err());
    }
}
