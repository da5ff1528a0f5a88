//! The resolved run configuration: defaults, overlaid by a TOML file (or the
//! `config` table of an earlier run manifest), overlaid by flags.

use std::path::{Path, PathBuf};

use lrr_core::eval::DEFAULT_RANK_TOL;
use lrr_core::pipeline::PipelineOptions;
use lrr_core::solvers::SolverConfig;
use lrr_core::spectral::{AffinityMode, DEFAULT_AFFINITY_POWER};
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub pipeline: PipelineConfig,
    pub sweep: SweepConfig,
    pub run: RunSettings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Dataset file; the format follows the file name.
    pub input: Option<PathBuf>,
    /// Label file accompanying IDX images.
    pub labels: Option<PathBuf>,
    /// Whether the last row of a CSV input holds labels.
    pub csv_labels: bool,
    /// Generator spec such as `m=50,k=5,d=4,pts=20,sigma=0,seed=7`.
    pub synthetic: Option<String>,
    pub per_class: Option<usize>,
    pub subsample_seed: u64,
    /// Image resampling as `FROMHxFROMW:TOHxTOW`, e.g. `192x168:48x42`.
    pub downsample: Option<String>,
    /// Scale every sample to unit Euclidean norm.
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub k: Option<usize>,
    pub affinity: AffinityMode,
    pub affinity_power: u32,
    pub rank_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: None,
            affinity: AffinityMode::SvdBased,
            affinity_power: DEFAULT_AFFINITY_POWER,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl PipelineConfig {
    pub fn options(&self) -> Outcome<PipelineOptions> {
        let k = self
            .k
            .ok_or_else(|| Failure::invalid("the number of clusters is required (--k)"))?;
        if k == 0 {
            return Err(Failure::invalid("--k must be positive"));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Failure::invalid(format!("rank tolerance must lie in (0, 1), got {}", self.rank_tol)));
        }
        Ok(PipelineOptions {
            k,
            affinity: self.affinity,
            affinity_power: self.affinity_power,
            rank_tol: self.rank_tol,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Protected ranks: `start:end:step` (inclusive) or a comma list.
    pub n: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub out_dir: PathBuf,
    /// Refuse settings that could make outputs depend on scheduling.
    pub strict: bool,
    pub jobs: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            out_dir: PathBuf::from("."),
            strict: true,
            jobs: 1,
        }
    }
}

/// Reads a TOML config, or the `config` table of a JSON run manifest.
pub fn load(path: &Path) -> Outcome<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        let mut manifest: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::io(path, e))?;
        let config = manifest
            .get_mut("config")
            .map(serde_json::Value::take)
            .ok_or_else(|| Failure::io(path, "manifest has no `config` entry"))?;
        serde_json::from_value(config).map_err(|e| Failure::io(path, e))
    } else {
        toml::from_str(&text).map_err(|e| Failure::io(path, e))
    }
}

/// Parses `start:end:step` (inclusive), `start:end`, or `a,b,c`.
pub fn parse_n_values(text: &str) -> Outcome<Vec<usize>> {
    let bad = |what: &str| Failure::invalid(format!("invalid N list `{text}`: {what}"));
    let number = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(&format!("`{s}` is not a count")));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (number(a)?, number(b)?, 1),
            [a, b, c] => (number(a)?, number(b)?, number(c)?),
            _ => return Err(bad("expected start:end or start:end:step")),
        };
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        if end < start {
            return Err(bad("end precedes start"));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        text.split(',').map(number).collect()
    }
}

/// Parses `192x168:48x42` into `(from_h, from_w, to_h, to_w)`.
pub fn parse_downsample(text: &str) -> Outcome<(usize, usize, usize, usize)> {
    let bad = || Failure::invalid(format!("invalid downsample `{text}`, expected HxW:HxW"));
    let size = |s: &str| -> Outcome<(usize, usize)> {
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok((h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
    };
    let (from, to) = text.split_once(':').ok_or_else(bad)?;
    let (fh, fw) = size(from)?;
    let (th, tw) = size(to)?;
    Ok((fh, fw, th, tw))
}

/// Parses `HxW`.
pub fn parse_image_size(text: &str) -> Outcome<(usize, usize)> {
    let bad = || Failure::invalid(format!("invalid image size `{text}`, expected HxW"));
    let (h, w) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_n_values("0:100:10").unwrap().len(), 11);
        assert_eq!(parse_n_values("0:5:2").unwrap(), vec![0, 2, 4]);
        assert_eq!(parse_n_values("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_n_values("0").unwrap(), vec![0]);
        assert_eq!(parse_n_values("12, 0,25").unwrap(), vec![12, 0, 25]);
    }

    #[test]
    fn malformed_ranges_are_rejected() {
        for text in ["0:10:0", "5:1", "a", "1:2:3:4", ""] {
            assert!(matches!(parse_n_values(text), Err(Failure::Invalid(_))), "{text}");
        }
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_downsample("192x168:48x42").unwrap(), (192, 168, 48, 42));
        assert_eq!(parse_image_size("28x28").unwrap(), (28, 28));
        assert!(parse_downsample("192x168").is_err());
        assert!(parse_image_size("28").is_err());
    }

    #[test]
    fn toml_overrides_only_named_fields() {
        let cfg: RunConfig = toml::from_str(
            "[solver]\nlambda = 0.5\nvariant = \"wnnm-ladmm\"\n[pipeline]\nk = 3\n[run]\njobs = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.solver.lambda, Some(0.5));
        assert_eq!(cfg.solver.gamma, SolverConfig::default().gamma);
        assert_eq!(cfg.pipeline.k, Some(3));
        assert_eq!(cfg.pipeline.affinity_power, DEFAULT_AFFINITY_POWER);
        assert!(cfg.run.strict);
        assert!(toml::from_str::<RunConfig>("[solver]\nlamda = 1.0\n").is_err());
    }

    #[test]
    fn resolved_config_survives_json() {
        let mut cfg = RunConfig::default();
        cfg.solver.variant = lrr_core::solvers::Variant::PssvLrr(4);
        cfg.data.synthetic = Some("m=10,k=2,d=2,pts=5".into());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
