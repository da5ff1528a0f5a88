use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::spectral::ClusterLabels;

/// Draws `per_class` samples from every class, classes in ascending label
/// order and samples in their original order within a class.
pub fn subsample_per_class(ds: &LabeledDataset, per_class: usize, seed: u64) -> Result<LabeledDataset> {
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::domain("per-class subsampling needs labels"))?;
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.as_slice().iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(per_class * classes.len());
    for (class, members) in &classes {
        if members.len() < per_class {
            return Err(Error::domain(format!(
                "class {class} has {} samples, {per_class} requested",
                members.len()
            )));
        }
        let mut chosen: Vec<usize> = sample(&mut rng, members.len(), per_class)
            .into_iter()
            .map(|i| members[i])
            .collect();
        chosen.sort_unstable();
        picked.extend(chosen);
    }
    let new_labels: Vec<usize> = picked.iter().map(|&i| labels.as_slice()[i]).collect();
    LabeledDataset::new(
        ds.x.select_columns(&picked),
        Some(ClusterLabels::new(new_labels, labels.k())?),
        ds.name.clone(),
        format!("{} | per_class={per_class},seed={seed}", ds.provenance),
    )
}

/// Area-average weights mapping `from` input cells onto `to` output cells.
fn overlap_weights(from: usize, to: usize) -> DMatrix<f64> {
    // Output cell i covers [i·from/to, (i+1)·from/to) in input coordinates.
    let scale = from as f64 / to as f64;
    DMatrix::from_fn(to, from, |i, j| {
        let lo = (i as f64 * scale).max(j as f64);
        let hi = ((i + 1) as f64 * scale).min((j + 1) as f64);
        ((hi - lo).max(0.0)) / scale
    })
}

/// Box-filter downsampling of column-major `from_h × from_w` images.
pub fn downsample_images(
    ds: &LabeledDataset,
    from_h: usize,
    from_w: usize,
    to_h: usize,
    to_w: usize,
) -> Result<LabeledDataset> {
    if ds.dim() != from_h * from_w {
        return Err(Error::domain(format!(
            "{from_h}×{from_w} images need {} rows, dataset has {}",
            from_h * from_w,
            ds.dim()
        )));
    }
    if to_h == 0 || to_w == 0 || to_h > from_h || to_w > from_w {
        return Err(Error::domain(format!(
            "cannot downsample {from_h}×{from_w} to {to_h}×{to_w}"
        )));
    }
    let rows = overlap_weights(from_h, to_h);
    let cols = overlap_weights(from_w, to_w).transpose();
    let mut out = DMatrix::zeros(to_h * to_w, ds.len());
    for (j, sample) in ds.x.column_iter().enumerate() {
        let image = DMatrix::from_column_slice(from_h, from_w, sample.as_slice());
        let small = &rows * image * &cols;
        out.column_mut(j).copy_from_slice(small.as_slice());
    }
    LabeledDataset::new(
        out,
        ds.labels.clone(),
        ds.name.clone(),
        format!("{} | downsample {from_h}x{from_w}->{to_h}x{to_w}", ds.provenance),
    )
}

/// Scales every non-zero column to unit Euclidean norm.
pub fn normalize_columns(ds: &LabeledDataset) -> LabeledDataset {
    let mut x = ds.x.clone();
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    LabeledDataset {
        x,
        labels: ds.labels.clone(),
        name: ds.name.clone(),
        provenance: format!("{} | unit columns", ds.provenance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn labelled(n_per: usize, classes: usize) -> LabeledDataset {
        let n = n_per * classes;
        let x = DMatrix::from_fn(3, n, |i, j| (i * n + j) as f64);
        let labels = (0..n).map(|j| (j * 7) % classes).collect();
        LabeledDataset::new(x, Some(ClusterLabels::from_labels(labels).unwrap()), "t", "t").unwrap()
    }

    #[test]
    fn subsample_counts_and_order() {
        let ds = labelled(30, 10);
        let sub = subsample_per_class(&ds, 10, 5).unwrap();
        assert_eq!(sub.len(), 100);
        let l = sub.labels.as_ref().unwrap().as_slice();
        for c in 0..10 {
            assert_eq!(l[c * 10..(c + 1) * 10], [c; 10]);
        }
        assert_eq!(subsample_per_class(&ds, 10, 5).unwrap(), sub);
        assert_ne!(subsample_per_class(&ds, 10, 6).unwrap().x, sub.x);
    }

    #[test]
    fn full_class_is_kept_intact() {
        let ds = labelled(4, 3);
        let sub = subsample_per_class(&ds, 4, 9).unwrap();
        for c in 0..3 {
            let orig: Vec<usize> = (0..12).filter(|&j| ds.labels.as_ref().unwrap().as_slice()[j] == c).collect();
            assert_eq!(sub.x.columns(c * 4, 4), ds.x.select_columns(&orig));
        }
    }

    #[test]
    fn subsample_errors() {
        let ds = labelled(4, 3);
        let err = subsample_per_class(&ds, 5, 0).unwrap_err().to_string();
        assert!(err.contains("class 0"), "{err}");
        let unlabelled = LabeledDataset::new(ds.x.clone(), None, "t", "t").unwrap();
        assert!(subsample_per_class(&unlabelled, 1, 0).is_err());
    }

    #[test]
    fn downsample_face_size() {
        let x = DMatrix::from_fn(192 * 168, 2, |i, j| (i % 17) as f64 + j as f64);
        let ds = LabeledDataset::new(x, None, "f", "f").unwrap();
        let out = downsample_images(&ds, 192, 168, 48, 42).unwrap();
        assert_eq!(out.dim(), 2016);
        for j in 0..2 {
            let before = ds.x.column(j).mean();
            let after = out.x.column(j).mean();
            assert!((before - after).abs() <= 1e-10);
        }
    }

    #[test]
    fn downsample_identity_constant_and_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = DMatrix::from_fn(12, 3, |_, _| rng.random_range(0.0..1.0));
        let ds = LabeledDataset::new(x, None, "t", "t").unwrap();
        let same = downsample_images(&ds, 4, 3, 4, 3).unwrap();
        assert!((same.x - &ds.x).amax() <= 1e-15);

        let c = LabeledDataset::new(DMatrix::from_element(35, 1, 0.7), None, "c", "c").unwrap();
        let out = downsample_images(&c, 7, 5, 3, 2).unwrap();
        assert!(out.x.iter().all(|v| (v - 0.7).abs() <= 1e-12));

        assert!(downsample_images(&ds, 5, 3, 2, 2).is_err());
    }

    #[test]
    fn downsample_averages_blocks() {
        // 2×2 image, column-major [a, b, c, d] → mean
        let ds = LabeledDataset::new(DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 6.0]), None, "t", "t").unwrap();
        let out = downsample_images(&ds, 2, 2, 1, 1).unwrap();
        assert_eq!(out.x[(0, 0)], 3.0);
        // 4×2 image → 2×1: rows pooled in pairs
        let ds = LabeledDataset::new(
            DMatrix::from_column_slice(8, 1, &[1.0, 3.0, 5.0, 7.0, 1.0, 3.0, 5.0, 7.0]),
            None,
            "t",
            "t",
        )
        .unwrap();
        let out = downsample_images(&ds, 4, 2, 2, 1).unwrap();
        assert_eq!(out.x.as_slice(), &[2.0, 6.0]);
    }

    #[test]
    fn normalize_columns_unit_norm() {
        let ds = LabeledDataset::new(DMatrix::from_column_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]), None, "t", "t").unwrap();
        let out = normalize_columns(&ds);
        assert_eq!(out.x.as_slice(), &[0.6, 0.8, 0.0, 0.0]);
    }
}
