use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::spectral::ClusterLabels;

/// Parameters of a union-of-subspaces sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceGenSpec {
    pub ambient_dim: usize,
    pub num_subspaces: usize,
    pub subspace_dim: usize,
    pub points_per_subspace: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SubspaceGenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim > self.ambient_dim {
            return Err(Error::domain(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                self.subspace_dim, self.ambient_dim
            )));
        }
        if self.subspace_dim == 0 || self.num_subspaces == 0 || self.points_per_subspace == 0 {
            return Err(Error::domain("subspace dimension, count and size must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::domain(format!("noise sigma must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    /// `m=50,k=5,d=4,pts=20,sigma=0,seed=7`
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SubspaceGenSpec {
            ambient_dim: 0,
            num_subspaces: 0,
            subspace_dim: 0,
            points_per_subspace: 0,
            noise_sigma: 0.0,
            seed: 0,
        };
        let mut seen = [false; 4];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("expected key=value, got `{part}`")))?;
            let bad = |_: std::num::ParseIntError| Error::domain(format!("invalid value for `{key}`: `{value}`"));
            let bad_f = |_: std::num::ParseFloatError| Error::domain(format!("invalid value for `{key}`: `{value}`"));
            match key.trim() {
                "m" => (spec.ambient_dim, seen[0]) = (value.parse().map_err(bad)?, true),
                "k" => (spec.num_subspaces, seen[1]) = (value.parse().map_err(bad)?, true),
                "d" => (spec.subspace_dim, seen[2]) = (value.parse().map_err(bad)?, true),
                "pts" => (spec.points_per_subspace, seen[3]) = (value.parse().map_err(bad)?, true),
                "sigma" => spec.noise_sigma = value.parse().map_err(bad_f)?,
                "seed" => spec.seed = value.parse().map_err(bad)?,
                other => return Err(Error::domain(format!("unknown generator key `{other}`"))),
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::domain("generator spec needs m, k, d and pts"));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn describe(&self) -> String {
        format!(
            "m={},k={},d={},pts={},sigma={},seed={}",
            self.ambient_dim,
            self.num_subspaces,
            self.subspace_dim,
            self.points_per_subspace,
            self.noise_sigma,
            self.seed
        )
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // Column-major fill order fixes the stream consumption.
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Samples unit-norm points from `k` random `d`-dimensional subspaces plus
/// entrywise Gaussian noise. Columns are grouped by subspace.
///
/// When `k·d ≤ m` all bases come from one orthogonalized Gaussian draw, so
/// the subspaces are mutually orthogonal and hence independent.
pub fn generate_union_of_subspaces(spec: &SubspaceGenSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let (m, k, d, per) = (
        spec.ambient_dim,
        spec.num_subspaces,
        spec.subspace_dim,
        spec.points_per_subspace,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let bases: Vec<DMatrix<f64>> = if k * d <= m {
        let q = gaussian(m, k * d, &mut rng).qr().q();
        (0..k).map(|i| q.columns(i * d, d).into_owned()).collect()
    } else {
        log::warn!("k·d = {} exceeds m = {m}; subspaces are not guaranteed independent", k * d);
        (0..k).map(|_| gaussian(m, d, &mut rng).qr().q()).collect()
    };

    let n = k * per;
    let mut x = DMatrix::<f64>::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    for (s, basis) in bases.iter().enumerate() {
        let coeffs = gaussian(d, per, &mut rng);
        let mut points = basis * coeffs;
        for mut col in points.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        x.columns_mut(s * per, per).copy_from(&points);
        labels.extend(std::iter::repeat_n(s, per));
    }
    if spec.noise_sigma > 0.0 {
        x += gaussian(m, n, &mut rng) * spec.noise_sigma;
    }

    LabeledDataset::new(
        x,
        Some(ClusterLabels::new(labels, k)?),
        "union-of-subspaces",
        spec.describe(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sigma: f64, seed: u64) -> SubspaceGenSpec {
        SubspaceGenSpec::parse(&format!("m=50,k=5,d=4,pts=20,sigma={sigma},seed={seed}")).unwrap()
    }

    #[test]
    fn noise_free_columns_lie_in_their_subspace() {
        let ds = generate_union_of_subspaces(&spec(0.0, 7)).unwrap();
        assert_eq!(ds.x.shape(), (50, 100));
        let labels = ds.labels.as_ref().unwrap().as_slice();
        for s in 0..5 {
            let block: Vec<usize> = (0..100).filter(|&i| labels[i] == s).collect();
            assert_eq!(block.len(), 20);
            // basis of the class from its own columns
            let cols = ds.x.select_columns(&block);
            let svd = crate::linalg::SingularTriplet::decompose(&cols);
            let u = svd.left_vectors.columns(0, 4);
            for c in cols.column_iter() {
                let residual = c - u * (u.transpose() * c);
                assert!(residual.norm() <= 1e-10);
                assert!((c.norm() - 1.0).abs() <= 1e-12);
            }
        }
        assert!(crate::eval::representation_rank(&ds.x, 1e-10) <= 20);
    }

    #[test]
    fn seeded_generation_is_bitwise_repeatable() {
        let a = generate_union_of_subspaces(&spec(0.05, 3)).unwrap();
        let b = generate_union_of_subspaces(&spec(0.05, 3)).unwrap();
        assert_eq!(a, b);
        let c = generate_union_of_subspaces(&spec(0.05, 4)).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn overlapping_subspaces_still_generate() {
        let s = SubspaceGenSpec::parse("m=6,k=3,d=3,pts=4,seed=1").unwrap();
        let ds = generate_union_of_subspaces(&s).unwrap();
        assert_eq!(ds.x.shape(), (6, 12));
    }

    #[test]
    fn spec_parse_errors() {
        assert!(SubspaceGenSpec::parse("m=3,k=2,d=4,pts=5").is_err());
        assert!(SubspaceGenSpec::parse("m=3,k=2,d=2").is_err());
        assert!(SubspaceGenSpec::parse("m=3,k=2,d=2,pts=x").is_err());
        assert!(SubspaceGenSpec::parse("m=3,k=2,d=2,pts=2,q=1").is_err());
    }
}
