//! Solve → affinity → spectral clustering, shared by the sweep and the CLI.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::DEFAULT_RANK_TOL;
use crate::solvers::{solve, SolverConfig, SolverSolution};
use crate::spectral::{cluster_representation, AffinityMode, ClusterLabels, DEFAULT_AFFINITY_POWER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Number of clusters.
    pub k: usize,
    pub affinity: AffinityMode,
    pub affinity_power: u32,
    pub rank_tol: f64,
}

impl PipelineOptions {
    pub fn new(k: usize) -> Self {
        PipelineOptions {
            k,
            affinity: AffinityMode::SvdBased,
            affinity_power: DEFAULT_AFFINITY_POWER,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub solution: SolverSolution,
    pub labels: ClusterLabels,
}

pub fn run_pipeline(x: &DMatrix<f64>, cfg: &SolverConfig, opts: &PipelineOptions) -> Result<PipelineOutcome> {
    let solution = solve(x, cfg)?;
    let labels = cluster_representation(&solution.z, opts.k, opts.affinity, opts.affinity_power)?;
    Ok(PipelineOutcome { solution, labels })
}
