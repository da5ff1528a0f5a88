//! IDX files as used by the MNIST distribution: a big-endian header
//! (`0x0000_08_dd` magic, `dd` = number of dimensions, then one u32 per
//! dimension) followed by unsigned bytes.

use std::path::Path;

use nalgebra::DMatrix;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::spectral::ClusterLabels;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, source: &str) -> Result<u32> {
    let slice = bytes.get(offset..offset + 4).ok_or_else(|| {
        Error::parse(
            source,
            format!("truncated header at byte {offset}: expected {} bytes, file has {}", offset + 4, bytes.len()),
        )
    })?;
    Ok(u32::from_be_bytes(slice.try_into().unwrap()))
}

fn check_magic(bytes: &[u8], expected: u32, source: &str) -> Result<()> {
    let magic = read_u32(bytes, 0, source)?;
    if magic != expected {
        return Err(Error::parse(
            source,
            format!("bad magic number at byte 0: expected {expected:#010x}, found {magic:#010x}"),
        ));
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], header: usize, len: usize, source: &str) -> Result<&'a [u8]> {
    let expected = header + len;
    if bytes.len() != expected {
        return Err(Error::parse(
            source,
            format!("payload at byte {header}: expected total length {expected} bytes, found {}", bytes.len()),
        ));
    }
    Ok(&bytes[header..])
}

/// Decoded image file: `count` images of `rows × cols` bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

pub fn parse_idx_images(bytes: &[u8], source: &str) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC, source)?;
    let count = read_u32(bytes, 4, source)? as usize;
    let rows = read_u32(bytes, 8, source)? as usize;
    let cols = read_u32(bytes, 12, source)? as usize;
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::parse(source, "image dimensions at byte 4 overflow"))?;
    let pixels = payload(bytes, 16, len, source)?.to_vec();
    Ok(IdxImages { count, rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8], source: &str) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC, source)?;
    let count = read_u32(bytes, 4, source)? as usize;
    Ok(payload(bytes, 8, count, source)?.to_vec())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads an image/label pair. Each image becomes one column, flattened
/// column-major (pixel `(r, c)` at row `c·rows + r`) and scaled to `[0, 1]`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let images = parse_idx_images(&read(images_path)?, &images_path.display().to_string())?;
    let labels = parse_idx_labels(&read(labels_path)?, &labels_path.display().to_string())?;
    if images.count != labels.len() {
        return Err(Error::domain(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let (h, w) = (images.rows, images.cols);
    let m = h * w;
    let x = DMatrix::from_fn(m, images.count, |i, j| {
        let (r, c) = (i % h, i / h);
        images.pixels[j * m + r * w + c] as f64 / 255.0
    });
    let labels = if labels.is_empty() {
        None
    } else {
        Some(ClusterLabels::from_labels(labels.into_iter().map(usize::from).collect())?)
    };
    LabeledDataset::new(
        x,
        labels,
        images_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        format!("idx:{}+{}", images_path.display(), labels_path.display()),
    )
}

/// Writes a dataset of `rows × cols` images in `[0, 1]` (column-major) as an
/// IDX pair, quantizing to bytes.
pub fn write_idx(
    ds: &LabeledDataset,
    rows: usize,
    cols: usize,
    images_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    let m = rows * cols;
    if ds.dim() != m {
        return Err(Error::domain(format!("{rows}×{cols} images need {m} rows, dataset has {}", ds.dim())));
    }
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::domain("IDX output requires labels"))?;
    if labels.k() > 256 {
        return Err(Error::domain("IDX labels must fit in a byte"));
    }
    let n = ds.len();
    let mut img = Vec::with_capacity(16 + n * m);
    for v in [IMAGES_MAGIC, n as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    for j in 0..n {
        for r in 0..rows {
            for c in 0..cols {
                let v = ds.x[(c * rows + r, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::domain(format!("pixel value {v} outside [0, 1]")));
                }
                img.push((v * 255.0).round() as u8);
            }
        }
    }
    let mut lab = Vec::with_capacity(8 + n);
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(n as u32).to_be_bytes());
    lab.extend(labels.as_slice().iter().map(|&l| l as u8));
    std::fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;
    std::fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Four 2×3 images; pixel (r, c) of image j is 10·j + 3·r + c.
    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let mut img = Vec::new();
        for v in [IMAGES_MAGIC, 4, 2, 3] {
            img.extend_from_slice(&v.to_be_bytes());
        }
        for j in 0..4u8 {
            for r in 0..2u8 {
                for c in 0..3u8 {
                    img.push(10 * j + 3 * r + c);
                }
            }
        }
        let mut lab = Vec::new();
        lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        lab.extend_from_slice(&4u32.to_be_bytes());
        lab.extend_from_slice(&[1, 0, 1, 2]);
        (img, lab)
    }

    #[test]
    fn loads_hand_built_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = fixture();
        let (ip, lp) = (dir.path().join("img.idx"), dir.path().join("lab.idx"));
        std::fs::write(&ip, &img).unwrap();
        std::fs::write(&lp, &lab).unwrap();
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.x.shape(), (6, 4));
        assert_eq!(ds.x[(0, 0)], 0.0);
        // column-major: (r=1, c=0) is row 1, (r=0, c=1) is row 2
        assert_eq!(ds.x[(1, 2)], 23.0 / 255.0);
        assert_eq!(ds.x[(2, 2)], 21.0 / 255.0);
        assert_eq!(ds.labels.unwrap().as_slice(), &[1, 0, 1, 2]);
    }

    #[test]
    fn write_then_parse_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = fixture();
        let (ip, lp) = (dir.path().join("img.idx"), dir.path().join("lab.idx"));
        std::fs::write(&ip, &img).unwrap();
        std::fs::write(&lp, &lab).unwrap();
        let ds = load_idx(&ip, &lp).unwrap();
        let (ip2, lp2) = (dir.path().join("img2.idx"), dir.path().join("lab2.idx"));
        write_idx(&ds, 2, 3, &ip2, &lp2).unwrap();
        assert_eq!(std::fs::read(&ip2).unwrap(), img);
        assert_eq!(std::fs::read(&lp2).unwrap(), lab);
    }

    #[test]
    fn truncated_file_names_lengths() {
        let (img, _) = fixture();
        let err = parse_idx_images(&img[..img.len() - 5], "img").unwrap_err().to_string();
        assert!(err.contains("expected total length 40"), "{err}");
        assert!(err.contains("found 35"), "{err}");
        let err = parse_idx_images(&img[..6], "img").unwrap_err().to_string();
        assert!(err.contains("byte 4"), "{err}");
    }

    #[test]
    fn bad_magic_is_reported_at_offset_zero() {
        let (_, lab) = fixture();
        let err = parse_idx_images(&lab, "lab").unwrap_err().to_string();
        assert!(err.contains("byte 0") && err.contains("0x00000801"), "{err}");
    }

    #[test]
    fn count_mismatch_is_domain_error() {
        let dir = tempfile::tempdir().unwrap();
        let (img, mut lab) = fixture();
        lab[7] = 3;
        lab.pop();
        let (ip, lp) = (dir.path().join("img.idx"), dir.path().join("lab.idx"));
        std::fs::write(&ip, &img).unwrap();
        std::fs::write(&lp, &lab).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::Domain(_))));
    }
}
