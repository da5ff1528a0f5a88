//! Accuracy, numerical rank and the rank-versus-accuracy sweep.

use nalgebra::DMatrix;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::Serialize;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::pipeline::{run_pipeline, PipelineOptions};
use crate::solvers::{SolverConfig, Variant};
use crate::spectral::ClusterLabels;

pub const DEFAULT_RANK_TOL: f64 = 1e-4;

/// Percentage of samples labelled correctly under the best one-to-one
/// matching of predicted to true labels.
pub fn clustering_accuracy(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predicted labels vs {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    let k = pred.k().max(truth.k());
    let mut counts = vec![0i64; k * k];
    for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
        counts[p * k + t] += 1;
    }
    let confusion = Matrix::from_vec(k, k, counts).expect("square confusion matrix");
    let (matched, _) = kuhn_munkres(&confusion);
    Ok(100.0 * matched as f64 / pred.len() as f64)
}

/// Number of singular values above `rel_tol·σ₁`.
pub fn representation_rank(z: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(z);
    match s.get(0) {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Number of protected singular values.
    pub protected: usize,
    pub z_rank: usize,
    pub accuracy_pct: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// One sweep entry: solve with `protected` values, cluster, score.
pub fn sweep_entry(
    ds: &LabeledDataset,
    protected: usize,
    cfg: &SolverConfig,
    opts: &PipelineOptions,
) -> Result<SweepRecord> {
    let truth = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::domain("the sweep needs ground-truth labels"))?;
    let cfg = cfg.clone().with_variant(Variant::PssvLrr(protected));
    let outcome = run_pipeline(&ds.x, &cfg, opts)?;
    Ok(SweepRecord {
        protected,
        z_rank: representation_rank(&outcome.solution.z, opts.rank_tol),
        accuracy_pct: clustering_accuracy(&outcome.labels, truth)?,
        converged: outcome.solution.converged,
        iterations: outcome.solution.iterations,
    })
}

/// Runs the partial-sum solver for each protected rank in order.
pub fn rank_accuracy_sweep(
    ds: &LabeledDataset,
    protected_values: &[usize],
    cfg: &SolverConfig,
    opts: &PipelineOptions,
) -> Result<Vec<SweepRecord>> {
    protected_values
        .iter()
        .map(|&n| sweep_entry(ds, n, cfg, opts))
        .collect()
}

/// `N,rank,accuracy_pct` with LF line endings.
pub fn sweep_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("N,rank,accuracy_pct\n");
    for r in records {
        out.push_str(&format!("{},{},{:.4}\n", r.protected, r.z_rank, r.accuracy_pct));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(v: &[usize]) -> ClusterLabels {
        ClusterLabels::from_labels(v.to_vec()).unwrap()
    }

    fn brute_force(pred: &[usize], truth: &[usize], k: usize) -> f64 {
        fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
            if items.len() <= 1 {
                return vec![items];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.clone();
                let head = rest.remove(i);
                for mut p in permutations(rest) {
                    p.insert(0, head);
                    out.push(p);
                }
            }
            out
        }
        permutations((0..k).collect())
            .into_iter()
            .map(|perm| pred.iter().zip(truth).filter(|(p, t)| perm[**p] == **t).count())
            .max()
            .unwrap() as f64
            * 100.0
            / pred.len() as f64
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(clustering_accuracy(&labels(&[0, 0, 1, 1]), &labels(&[1, 1, 0, 0])).unwrap(), 100.0);
        assert_eq!(clustering_accuracy(&labels(&[0, 1, 1, 1]), &labels(&[0, 0, 1, 1])).unwrap(), 75.0);
        assert!(clustering_accuracy(&labels(&[0, 1]), &labels(&[0, 1, 1])).is_err());
    }

    #[test]
    fn accuracy_matches_permutation_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let pred: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
            let truth: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
            let got = clustering_accuracy(
                &ClusterLabels::new(pred.clone(), 3).unwrap(),
                &ClusterLabels::new(truth.clone(), 3).unwrap(),
            )
            .unwrap();
            assert_eq!(got, brute_force(&pred, &truth, 3));
        }
    }

    #[test]
    fn accuracy_invariant_under_relabeling() {
        let pred = [0, 2, 1, 1, 0, 2, 2];
        let truth = [1, 1, 0, 2, 0, 2, 2];
        let base = clustering_accuracy(&labels(&pred), &labels(&truth)).unwrap();
        let perm = [2, 0, 1];
        let relabeled: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        assert_eq!(clustering_accuracy(&labels(&relabeled), &labels(&truth)).unwrap(), base);
        assert_eq!(clustering_accuracy(&labels(&truth), &labels(&truth)).unwrap(), 100.0);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(representation_rank(&DMatrix::zeros(4, 4), DEFAULT_RANK_TOL), 0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 1e-2, 1e-9]));
        assert_eq!(representation_rank(&d, 1e-4), 2);
        assert_eq!(representation_rank(&(d * 1e6), 1e-4), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(3, 8, |_, _| rng.random_range(-1.0..1.0));
        assert_eq!(representation_rank(&(a * b), DEFAULT_RANK_TOL), 3);
    }

    #[test]
    fn csv_layout() {
        let rec = SweepRecord { protected: 10, z_rank: 3, accuracy_pct: 87.5, converged: true, iterations: 5 };
        assert_eq!(sweep_to_csv(&[rec]), "N,rank,accuracy_pct\n10,3,87.5000\n");
    }
}
