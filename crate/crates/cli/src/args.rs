use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrr_core::solvers::Variant;
use lrr_core::spectral::AffinityMode;

use crate::config::RunConfig;
use crate::failure::{Failure, Outcome};

/// Low-rank representation subspace clustering experiments.
#[derive(Debug, Parser)]
#[command(name = "lrr", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve, build the affinity, cluster, and write labels plus a manifest.
    Cluster(ClusterArgs),
    /// Sweep the number of protected singular values and record rank and accuracy.
    Sweep(SweepArgs),
    /// Generate a synthetic union-of-subspaces dataset.
    Gen(GenArgs),
    /// Convert a dataset between CSV, native binary and IDX.
    Convert(ConvertArgs),
    /// Score predicted labels against true labels.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    WnnmAdmm,
    WnnmLadmm,
    Lrr,
    Pssv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AffinityArg {
    SvdBased,
    SymmetricAbs,
}

impl From<AffinityArg> for AffinityMode {
    fn from(arg: AffinityArg) -> Self {
        match arg {
            AffinityArg::SvdBased => AffinityMode::SvdBased,
            AffinityArg::SymmetricAbs => AffinityMode::SymmetricAbs,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file (.csv, .bin, .idx or *-ubyte).
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Label file for IDX images.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// The last row of the CSV input holds labels.
    #[arg(long)]
    pub csv_labels: bool,
    /// Generate data instead of loading it, e.g. m=50,k=5,d=4,pts=20,sigma=0,seed=7.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Keep this many samples from every class.
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub subsample_seed: Option<u64>,
    /// Resample images, e.g. 192x168:48x42.
    #[arg(long, value_name = "HxW:HxW")]
    pub downsample: Option<String>,
    /// Scale every sample to unit norm.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// Error-term weight; defaults to 1/sqrt(ln n).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Exponent of the singular-value weights.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub affinity: Option<AffinityArg>,
    #[arg(long)]
    pub affinity_power: Option<u32>,
    /// Relative singular-value threshold for the reported rank.
    #[arg(long)]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file, or a manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Require reproducible scheduling (the default).
    #[arg(long, overrides_with = "no_strict")]
    pub strict: bool,
    /// Allow parallel sweeps.
    #[arg(long)]
    pub no_strict: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Protected singular values for --variant pssv.
    #[arg(long)]
    pub pssv_n: Option<usize>,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Protected ranks as start:end:step (inclusive) or a comma list.
    #[arg(long = "n", value_name = "RANGE")]
    pub n_values: Option<String>,
    /// Sweep entries solved in parallel; needs --no-strict when above 1.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator spec, e.g. m=50,k=5,d=4,pts=20,sigma=0.05,seed=7.
    #[arg(long)]
    pub spec: String,
    /// Output file (.csv or .bin).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Label file for IDX input.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// The last row of the CSV input holds labels.
    #[arg(long)]
    pub csv_labels: bool,
    /// Output file (.csv, .bin or .idx).
    #[arg(long)]
    pub out: PathBuf,
    /// Label file written next to IDX output.
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    /// Image size for IDX output.
    #[arg(long, value_name = "HxW")]
    pub image_size: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels (one per line, or `index,label` rows).
    pub pred: PathBuf,
    /// True labels in the same layout.
    pub truth: PathBuf,
}

fn base_config(run: &RunArgs) -> Outcome<RunConfig> {
    let mut cfg = match &run.config {
        Some(path) => crate::config::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &run.out_dir {
        cfg.run.out_dir = dir.clone();
    }
    if run.no_strict {
        cfg.run.strict = false;
    }
    if run.strict {
        cfg.run.strict = true;
    }
    Ok(cfg)
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let data = &mut cfg.data;
        if let Some(input) = &self.input {
            data.input = Some(input.clone());
            data.synthetic = None;
        }
        if let Some(spec) = &self.synthetic {
            data.synthetic = Some(spec.clone());
            data.input = None;
        }
        if let Some(labels) = &self.labels {
            data.labels = Some(labels.clone());
        }
        data.csv_labels |= self.csv_labels;
        data.normalize |= self.normalize;
        if let Some(n) = self.per_class {
            data.per_class = Some(n);
        }
        if let Some(seed) = self.subsample_seed {
            data.subsample_seed = seed;
        }
        if let Some(ds) = &self.downsample {
            data.downsample = Some(ds.clone());
        }
    }
}

impl TuningArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(lambda) = self.lambda {
            cfg.solver.lambda = Some(lambda);
        }
        if let Some(gamma) = self.gamma {
            cfg.solver.gamma = gamma;
        }
        if let Some(iters) = self.max_iters {
            cfg.solver.max_iters = iters;
        }
    }
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.pipeline;
        if let Some(k) = self.k {
            p.k = Some(k);
        }
        if let Some(a) = self.affinity {
            p.affinity = a.into();
        }
        if let Some(power) = self.affinity_power {
            p.affinity_power = power;
        }
        if let Some(tol) = self.rank_tol {
            p.rank_tol = tol;
        }
    }
}

impl ClusterArgs {
    pub fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = base_config(&self.run)?;
        self.data.apply(&mut cfg);
        self.tuning.apply(&mut cfg);
        self.pipeline.apply(&mut cfg);
        let current_n = match cfg.solver.variant {
            Variant::PssvLrr(n) => Some(n),
            _ => None,
        };
        let variant = match (self.variant, self.pssv_n) {
            (Some(VariantArg::WnnmAdmm), None) => Variant::WnnmAdmm,
            (Some(VariantArg::WnnmLadmm), None) => Variant::WnnmLadmm,
            (Some(VariantArg::Lrr), None) => Variant::NnmLrr,
            (Some(VariantArg::Pssv), Some(n)) => Variant::PssvLrr(n),
            (Some(VariantArg::Pssv), None) => Variant::PssvLrr(
                current_n.ok_or_else(|| Failure::invalid("--variant pssv needs --pssv-n"))?,
            ),
            (None, Some(n)) if current_n.is_some() => Variant::PssvLrr(n),
            (_, Some(_)) => return Err(Failure::invalid("--pssv-n only applies to --variant pssv")),
            (None, None) => cfg.solver.variant,
        };
        cfg.solver.variant = variant;
        Ok(cfg)
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> Outcome<RunConfig> {
        let mut cfg = base_config(&self.run)?;
        self.data.apply(&mut cfg);
        self.tuning.apply(&mut cfg);
        self.pipeline.apply(&mut cfg);
        if let Some(n) = &self.n_values {
            cfg.sweep.n = Some(n.clone());
        }
        if let Some(jobs) = self.jobs {
            cfg.run.jobs = jobs;
        }
        Ok(cfg)
    }
}
