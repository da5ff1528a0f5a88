//! From a representation matrix to cluster labels: affinity, normalized
//! Laplacian, spectral embedding and deterministically seeded k-means.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, SingularTriplet};

/// Singular values of `Z` below this fraction of the largest are dropped.
pub const AFFINITY_RANK_CUTOFF: f64 = 1e-8;
pub const DEFAULT_AFFINITY_POWER: u32 = 4;
pub const KMEANS_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffinityMode {
    /// Gram matrix of the row-normalized `UΣ^{1/2}` raised to a power.
    SvdBased,
    /// `(|Z| + |Zᵀ|) / 2`.
    SymmetricAbs,
}

/// Symmetric, non-negative, finite sample-similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::domain(format!("affinity must be square, got {:?}", w.shape())));
        }
        ensure_finite(&w, "affinity")?;
        let n = w.nrows();
        for i in 0..n {
            for j in 0..n {
                if w[(i, j)] < 0.0 {
                    return Err(Error::domain(format!("negative affinity at ({i}, {j})")));
                }
                if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 {
                    return Err(Error::domain(format!("affinity is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(AffinityMatrix(w))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }
}

/// Per-sample cluster assignment in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("label vector is empty"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::domain(format!("label {bad} outside [0, {k})")));
        }
        Ok(ClusterLabels { labels, k })
    }

    /// Infers `k` as one past the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, k)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Renumbers clusters in order of first appearance, so equal
    /// partitions get equal label vectors. Unused labels go last.
    pub fn canonical(&self) -> ClusterLabels {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        ClusterLabels { labels, k: self.k }
    }

    /// Number of distinct label values actually used.
    pub fn distinct(&self) -> usize {
        let mut seen = vec![false; self.k];
        for &l in &self.labels {
            seen[l] = true;
        }
        seen.into_iter().filter(|s| *s).count()
    }
}

pub fn affinity_from_representation(z: &DMatrix<f64>, mode: AffinityMode) -> Result<AffinityMatrix> {
    affinity_with_power(z, mode, DEFAULT_AFFINITY_POWER)
}

/// Builds the affinity; `power` only affects [`AffinityMode::SvdBased`].
pub fn affinity_with_power(
    z: &DMatrix<f64>,
    mode: AffinityMode,
    power: u32,
) -> Result<AffinityMatrix> {
    if !z.is_square() {
        return Err(Error::domain(format!("representation must be square, got {:?}", z.shape())));
    }
    ensure_finite(z, "representation matrix")?;
    let n = z.nrows();
    let w = match mode {
        AffinityMode::SymmetricAbs => {
            let a = z.abs();
            (&a + a.transpose()) * 0.5
        }
        AffinityMode::SvdBased => {
            let svd = SingularTriplet::decompose(z);
            let cutoff = svd.values.get(0).copied().unwrap_or(0.0) * AFFINITY_RANK_CUTOFF;
            let keep = svd.values.iter().take_while(|&&s| s > cutoff).count();
            let mut m = DMatrix::<f64>::zeros(n, keep);
            for j in 0..keep {
                m.set_column(j, &(svd.left_vectors.column(j) * svd.values[j].sqrt()));
            }
            for mut row in m.row_iter_mut() {
                let norm = row.norm();
                if norm > 0.0 {
                    row /= norm;
                }
            }
            let gram = &m * m.transpose();
            let powered = gram.map(|g| g.max(0.0).powi(power as i32));
            (&powered + powered.transpose()) * 0.5
        }
    };
    AffinityMatrix::new(w)
}

/// `L = I − D^{-1/2} W D^{-1/2}`; zero-degree nodes get `D^{-1/2} = 0`.
pub fn normalized_laplacian(w: &AffinityMatrix) -> DMatrix<f64> {
    let w = w.matrix();
    let n = w.nrows();
    let inv_sqrt = DVector::from_iterator(
        n,
        w.row_iter().map(|r| {
            let d = r.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        }),
    );
    let mut l = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] -= inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
        }
    }
    // exact symmetry
    (&l + l.transpose()) * 0.5
}

/// Eigenpairs of a symmetric matrix sorted by ascending eigenvalue.
pub fn sorted_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Rows of the `k` bottom Laplacian eigenvectors, each normalized to unit length.
pub fn spectral_embed(w: &AffinityMatrix, k: usize) -> Result<DMatrix<f64>> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} outside [1, {n}]")));
    }
    let (_, vectors) = sorted_eigen(&normalized_laplacian(w));
    let mut embed = vectors.columns(0, k).into_owned();
    for mut col in embed.column_iter_mut() {
        let mut pivot = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    for mut row in embed.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(embed)
}

/// Result of a k-means run with the per-iteration objective.
#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    pub labels: ClusterLabels,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

pub fn kmeans_deterministic(points: &DMatrix<f64>, k: usize) -> Result<ClusterLabels> {
    Ok(kmeans_with_trace(points, k)?.labels)
}

/// Lloyd's algorithm from a deterministic seeding: the first center is the
/// row of largest norm, each next one the row least aligned (in absolute
/// cosine) with the centers chosen so far. Ties go to the lowest index.
pub fn kmeans_with_trace(points: &DMatrix<f64>, k: usize) -> Result<KMeansOutcome> {
    let (n, dim) = points.shape();
    if k == 0 || n < k {
        return Err(Error::domain(format!("cannot form {k} clusters from {n} points")));
    }
    ensure_finite(points, "k-means input")?;

    let rows: Vec<DVector<f64>> = points.row_iter().map(|r| r.transpose()).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm()).collect();

    let mut seeds = Vec::with_capacity(k);
    let mut first = 0;
    for i in 1..n {
        if norms[i] > norms[first] {
            first = i;
        }
    }
    seeds.push(first);
    let mut chosen = vec![false; n];
    chosen[first] = true;
    // max |cos| between each row and the chosen centers
    let mut alignment = vec![0.0_f64; n];
    while seeds.len() < k {
        let last = *seeds.last().unwrap();
        for i in 0..n {
            let denom = norms[i] * norms[last];
            let cos = if denom > 0.0 { rows[i].dot(&rows[last]).abs() / denom } else { 0.0 };
            alignment[i] = alignment[i].max(cos);
        }
        let next = (0..n)
            .filter(|&i| !chosen[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if alignment[b] <= alignment[i] => Some(b),
                _ => Some(i),
            })
            .expect("n >= k leaves an unchosen row");
        chosen[next] = true;
        seeds.push(next);
    }

    let mut centers: Vec<DVector<f64>> = seeds.iter().map(|&i| rows[i].clone()).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut wcss_history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut changed = false;
        let mut wcss = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = (row - center).norm_squared();
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
            wcss += best_dist;
        }
        wcss_history.push(wcss);
        if !changed || iterations >= KMEANS_MAX_ITERS {
            break;
        }

        let mut sums = vec![DVector::<f64>::zeros(dim); k];
        let mut counts = vec![0usize; k];
        for (row, &a) in rows.iter().zip(&assignment) {
            sums[a] += row;
            counts[a] += 1;
        }
        for c in 0..k {
            // empty clusters keep their previous center
            if counts[c] > 0 {
                centers[c] = &sums[c] / counts[c] as f64;
            }
        }
    }

    Ok(KMeansOutcome {
        labels: ClusterLabels::new(assignment, k)?,
        wcss_history,
        iterations,
    })
}

/// Affinity → embedding → k-means, with clusters numbered by first appearance.
pub fn cluster_representation(
    z: &DMatrix<f64>,
    k: usize,
    mode: AffinityMode,
    power: u32,
) -> Result<ClusterLabels> {
    let w = affinity_with_power(z, mode, power)?;
    let embed = spectral_embed(&w, k)?;
    Ok(kmeans_deterministic(&embed, k)?.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_numbering_follows_first_appearance() {
        let l = ClusterLabels::new(vec![2, 2, 0, 3, 0], 4).unwrap().canonical();
        assert_eq!(l.as_slice(), &[0, 0, 1, 2, 1]);
        assert_eq!(l.k(), 4);
        let again = ClusterLabels::new(vec![1, 1, 3, 0, 3], 4).unwrap().canonical();
        assert_eq!(again, l);
    }

    fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut out = DMatrix::zeros(n, n);
        let mut at = 0;
        for b in blocks {
            out.view_mut((at, at), b.shape()).copy_from(b);
            at += b.nrows();
        }
        out
    }

    fn random_affinity(n: usize, rng: &mut ChaCha8Rng) -> AffinityMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
        AffinityMatrix::new((&a + a.transpose()) * 0.5).unwrap()
    }

    #[test]
    fn identity_affinity_is_identity() {
        let w = affinity_from_representation(&DMatrix::identity(5, 5), AffinityMode::SvdBased).unwrap();
        assert!((w.matrix() - DMatrix::<f64>::identity(5, 5)).norm() <= 1e-12);
    }

    #[test]
    fn rank_one_half_ones_gives_all_ones() {
        let z = DMatrix::from_element(2, 2, 0.5);
        let w = affinity_from_representation(&z, AffinityMode::SvdBased).unwrap();
        assert!((w.matrix() - DMatrix::from_element(2, 2, 1.0)).norm() <= 1e-12);
    }

    #[test]
    fn block_structure_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b1 = DMatrix::from_fn(3, 3, |_, _| rng.random_range(0.1..1.0));
        let b2 = DMatrix::from_fn(4, 4, |_, _| rng.random_range(0.1..1.0));
        let z = block_diag(&[b1, b2]);
        for mode in [AffinityMode::SvdBased, AffinityMode::SymmetricAbs] {
            let w = affinity_from_representation(&z, mode).unwrap();
            for i in 0..3 {
                for j in 3..7 {
                    assert!(w.matrix()[(i, j)].abs() <= 1e-12, "{mode:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn affinity_rejects_non_finite() {
        let mut z = DMatrix::identity(3, 3);
        z[(0, 1)] = f64::NAN;
        assert!(affinity_from_representation(&z, AffinityMode::SvdBased).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let l = normalized_laplacian(&AffinityMatrix::new(DMatrix::identity(4, 4)).unwrap());
        assert!(l.norm() <= 1e-15);
        let l = normalized_laplacian(&AffinityMatrix::new(DMatrix::from_element(2, 2, 1.0)).unwrap());
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((l - expected).norm() <= 1e-15);
    }

    #[test]
    fn laplacian_spectrum_in_range_and_null_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = random_affinity(6, &mut rng);
        let l = normalized_laplacian(&w);
        let eig = l.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| (-1e-10..=2.0 + 1e-10).contains(&v)));
        let d_sqrt = DVector::from_iterator(6, w.matrix().row_iter().map(|r| r.sum().sqrt()));
        assert!((&l * d_sqrt).norm() <= 1e-12);
    }

    #[test]
    fn zero_degree_node_is_isolated() {
        let mut w = DMatrix::from_element(3, 3, 1.0);
        for i in 0..3 {
            w[(2, i)] = 0.0;
            w[(i, 2)] = 0.0;
        }
        let l = normalized_laplacian(&AffinityMatrix::new(w).unwrap());
        assert_eq!(l[(2, 2)], 1.0);
        assert_eq!(l[(0, 2)], 0.0);
    }

    #[test]
    fn embedding_of_two_blocks() {
        let w = block_diag(&[DMatrix::from_element(3, 3, 1.0), DMatrix::from_element(3, 3, 1.0)]);
        let embed = spectral_embed(&AffinityMatrix::new(w).unwrap(), 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((embed.row(i) - embed.row(j)).norm() <= 1e-10);
                assert!((embed.row(3 + i) - embed.row(3 + j)).norm() <= 1e-10);
                assert!(embed.row(i).dot(&embed.row(3 + j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn embedding_rows_unit_norm_and_eigen_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = random_affinity(7, &mut rng);
        let full = spectral_embed(&w, 7).unwrap();
        assert!(full.row_iter().all(|r| (r.norm() - 1.0).abs() <= 1e-12));

        let l = normalized_laplacian(&w);
        let (values, vectors) = sorted_eigen(&l);
        for j in 0..3 {
            let v = vectors.column(j);
            assert!((&l * v - v * values[j]).norm() <= 1e-8);
        }
        assert!(spectral_embed(&w, 0).is_err());
        assert!(spectral_embed(&w, 8).is_err());
    }

    #[test]
    fn kmeans_separated_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut pts = DMatrix::zeros(20, 2);
        for i in 0..20 {
            let (cx, cy) = if i % 2 == 0 { (5.0, 5.0) } else { (-5.0, 0.0) };
            pts[(i, 0)] = cx + rng.random_range(-0.1..0.1);
            pts[(i, 1)] = cy + rng.random_range(-0.1..0.1);
        }
        let labels = kmeans_deterministic(&pts, 2).unwrap();
        let l = labels.as_slice();
        for i in 0..20 {
            assert_eq!(l[i] == l[0], i % 2 == 0);
        }
        assert_eq!(kmeans_deterministic(&pts, 2).unwrap(), labels);
    }

    #[test]
    fn kmeans_each_point_own_cluster() {
        let pts = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 2.0, 0.1, -1.0, 3.0]);
        let labels = kmeans_deterministic(&pts, 4).unwrap();
        let mut sorted = labels.as_slice().to_vec();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert!(kmeans_deterministic(&pts, 5).is_err());
    }

    #[test]
    fn kmeans_wcss_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let pts = DMatrix::from_fn(60, 3, |_, _| rng.random_range(-1.0..1.0));
            let out = kmeans_with_trace(&pts, 4).unwrap();
            for p in out.wcss_history.windows(2) {
                assert!(p[1] <= p[0] + 1e-12);
            }
        }
    }

    #[test]
    fn cluster_labels_validation() {
        assert!(ClusterLabels::new(vec![0, 2], 2).is_err());
        assert!(ClusterLabels::new(vec![], 2).is_err());
        let l = ClusterLabels::from_labels(vec![3, 0, 3]).unwrap();
        assert_eq!(l.k(), 4);
        assert_eq!(l.distinct(), 2);
    }
}
