use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lrr_core::data::{self, Format, LabeledDataset, SubspaceGenSpec};
use lrr_core::eval::{clustering_accuracy, representation_rank, sweep_entry, sweep_to_csv, SweepRecord};
use lrr_core::pipeline::run_pipeline;
use lrr_core::spectral::ClusterLabels;
use rayon::prelude::*;
use serde_json::json;

use crate::args::{ClusterArgs, Command, ConvertArgs, EvalArgs, GenArgs, SweepArgs};
use crate::config::{self, DataConfig, RunConfig};
use crate::failure::{Failure, Outcome};
use crate::manifest::{config_value, DatasetSummary, RunManifest};

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Cluster(args) => cluster(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Gen(args) => gen(&args),
        Command::Convert(args) => convert(&args),
        Command::Eval(args) => eval(&args),
    }
}

fn cluster(args: &ClusterArgs) -> Outcome {
    let started = Instant::now();
    let cfg = args.resolve()?;
    let opts = cfg.pipeline.options()?;
    let ds = load_dataset(&cfg.data)?;
    log::info!(
        "clustering {} ({}×{}) into {} groups with {:?}",
        ds.name,
        ds.dim(),
        ds.len(),
        opts.k,
        cfg.solver.variant
    );
    let outcome = run_pipeline(&ds.x, &cfg.solver, &opts)?;
    let solution = &outcome.solution;
    if !solution.converged {
        log::warn!(
            "solver stopped at the iteration cap ({}) with residual {:.3e}",
            solution.iterations,
            solution.final_residual()
        );
    }

    let out_dir = prepare_out_dir(&cfg)?;
    let labels_path = out_dir.join("labels.csv");
    write_text(&labels_path, &labels_csv(&outcome.labels))?;

    let accuracy = match &ds.labels {
        Some(truth) => Some(clustering_accuracy(&outcome.labels, truth)?),
        None => None,
    };
    if let Some(acc) = accuracy {
        println!("accuracy_pct={acc:.4}");
    }

    let manifest_path = out_dir.join("manifest.json");
    RunManifest {
        command: "cluster",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: config_value(&cfg),
        dataset: Some(DatasetSummary::of(&ds)),
        seed: dataset_seed(&cfg.data),
        artifacts: BTreeMap::from([("labels", labels_path.clone()), ("manifest", manifest_path.clone())]),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        diagnostics: json!({
            "iterations": solution.iterations,
            "converged": solution.converged,
            "final_residual": solution.final_residual(),
            "lambda": cfg.solver.resolved_lambda(ds.len()),
            "z_rank": representation_rank(&solution.z, opts.rank_tol),
            "clusters_found": outcome.labels.distinct(),
            "accuracy_pct": accuracy,
        }),
    }
    .write(&manifest_path)?;
    log::info!("wrote {} and {}", labels_path.display(), manifest_path.display());
    Ok(())
}

fn sweep(args: &SweepArgs) -> Outcome {
    let started = Instant::now();
    let cfg = args.resolve()?;
    let opts = cfg.pipeline.options()?;
    let n_text = cfg
        .sweep
        .n
        .as_deref()
        .ok_or_else(|| Failure::invalid("the sweep needs protected ranks (--n)"))?;
    let n_values = config::parse_n_values(n_text)?;
    if cfg.run.jobs == 0 {
        return Err(Failure::invalid("--jobs must be at least 1"));
    }
    if cfg.run.jobs > 1 && cfg.run.strict {
        return Err(Failure::invalid("--jobs above 1 requires --no-strict"));
    }
    let ds = load_dataset(&cfg.data)?;
    if ds.labels.is_none() {
        return Err(Failure::invalid("the sweep needs a dataset with true labels"));
    }
    if let Some(&too_big) = n_values.iter().find(|&&n| n > ds.len()) {
        return Err(Failure::invalid(format!("N = {too_big} exceeds the {} samples", ds.len())));
    }
    log::info!("sweeping N over {n_values:?} on {} with {} job(s)", ds.name, cfg.run.jobs);

    let entry = |&n: &usize| -> Outcome<SweepRecord> {
        let record = sweep_entry(&ds, n, &cfg.solver, &opts)?;
        log::info!(
            "N={n}: rank {} accuracy {:.2}% ({} iterations)",
            record.z_rank,
            record.accuracy_pct,
            record.iterations
        );
        if !record.converged {
            log::warn!("N={n}: solver stopped at the iteration cap");
        }
        Ok(record)
    };
    let records: Vec<SweepRecord> = if cfg.run.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.jobs)
            .build()
            .map_err(|e| Failure::invalid(format!("cannot start {} workers: {e}", cfg.run.jobs)))?;
        pool.install(|| n_values.par_iter().map(entry).collect::<Outcome<_>>())?
    } else {
        n_values.iter().map(entry).collect::<Outcome<_>>()?
    };

    let csv = sweep_to_csv(&records);
    let out_dir = prepare_out_dir(&cfg)?;
    let sweep_path = out_dir.join("sweep.csv");
    write_text(&sweep_path, &csv)?;
    print!("{csv}");

    let manifest_path = out_dir.join("manifest.json");
    RunManifest {
        command: "sweep",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: config_value(&cfg),
        dataset: Some(DatasetSummary::of(&ds)),
        seed: dataset_seed(&cfg.data),
        artifacts: BTreeMap::from([("sweep", sweep_path.clone()), ("manifest", manifest_path.clone())]),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        diagnostics: json!({
            "lambda": cfg.solver.resolved_lambda(ds.len()),
            "records": records,
        }),
    }
    .write(&manifest_path)?;
    log::info!("wrote {} and {}", sweep_path.display(), manifest_path.display());
    Ok(())
}

fn gen(args: &GenArgs) -> Outcome {
    let started = Instant::now();
    let spec = SubspaceGenSpec::parse(&args.spec)?;
    let ds = data::generate_union_of_subspaces(&spec)?;
    match Format::from_path(&args.out) {
        Some(Format::Csv) => data::write_csv_matrix(&ds, &args.out)?,
        Some(Format::Native) => data::write_native(&ds, &args.out)?,
        _ => {
            return Err(Failure::invalid(format!(
                "{}: generated data is written as .csv or .bin",
                args.out.display()
            )))
        }
    }
    let manifest_path = sidecar(&args.out);
    RunManifest {
        command: "gen",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: config_value(&spec),
        dataset: Some(DatasetSummary::of(&ds)),
        seed: Some(spec.seed),
        artifacts: BTreeMap::from([("data", args.out.clone()), ("manifest", manifest_path.clone())]),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        diagnostics: json!({}),
    }
    .write(&manifest_path)?;
    log::info!("wrote {} ({}×{})", args.out.display(), ds.dim(), ds.len());
    Ok(())
}

fn convert(args: &ConvertArgs) -> Outcome {
    let started = Instant::now();
    let source = DataConfig {
        input: Some(args.input.clone()),
        labels: args.labels.clone(),
        csv_labels: args.csv_labels,
        ..DataConfig::default()
    };
    let ds = load_dataset(&source)?;
    let mut artifacts = BTreeMap::from([("data", args.out.clone())]);
    match Format::from_path(&args.out) {
        Some(Format::Csv) => data::write_csv_matrix(&ds, &args.out)?,
        Some(Format::Native) => data::write_native(&ds, &args.out)?,
        Some(Format::Idx) => {
            let size = args
                .image_size
                .as_deref()
                .ok_or_else(|| Failure::invalid("IDX output needs --image-size"))?;
            let (rows, cols) = config::parse_image_size(size)?;
            let labels_out = args
                .out_labels
                .clone()
                .ok_or_else(|| Failure::invalid("IDX output needs --out-labels"))?;
            data::write_idx(&ds, rows, cols, &args.out, &labels_out)?;
            artifacts.insert("labels", labels_out);
        }
        None => return Err(unknown_format(&args.out)),
    }
    let manifest_path = sidecar(&args.out);
    artifacts.insert("manifest", manifest_path.clone());
    RunManifest {
        command: "convert",
        tool_version: env!("CARGO_PKG_VERSION"),
        config: config_value(&source),
        dataset: Some(DatasetSummary::of(&ds)),
        seed: None,
        artifacts,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        diagnostics: json!({}),
    }
    .write(&manifest_path)?;
    log::info!("wrote {}", args.out.display());
    Ok(())
}

fn eval(args: &EvalArgs) -> Outcome {
    let pred = read_label_file(&args.pred)?;
    let truth = read_label_file(&args.truth)?;
    let acc = clustering_accuracy(&pred, &truth)?;
    println!("accuracy_pct={acc:.4}");
    Ok(())
}

fn load_dataset(cfg: &DataConfig) -> Outcome<LabeledDataset> {
    let mut ds = match (&cfg.input, &cfg.synthetic) {
        (Some(path), None) => load_file(path, cfg)?,
        (None, Some(spec)) => data::generate_union_of_subspaces(&SubspaceGenSpec::parse(spec)?)?,
        (Some(_), Some(_)) => return Err(Failure::invalid("give either an input file or a synthetic spec, not both")),
        (None, None) => return Err(Failure::invalid("no data: pass --input or --synthetic")),
    };
    if let Some(per_class) = cfg.per_class {
        ds = data::subsample_per_class(&ds, per_class, cfg.subsample_seed)?;
    }
    if let Some(text) = &cfg.downsample {
        let (fh, fw, th, tw) = config::parse_downsample(text)?;
        ds = data::downsample_images(&ds, fh, fw, th, tw)?;
    }
    if cfg.normalize {
        ds = data::normalize_columns(&ds);
    }
    Ok(ds)
}

fn load_file(path: &Path, cfg: &DataConfig) -> Outcome<LabeledDataset> {
    let format = Format::from_path(path).ok_or_else(|| unknown_format(path))?;
    if !path.exists() {
        return Err(Failure::io(path, "no such file"));
    }
    Ok(match format {
        Format::Csv => data::load_csv_matrix(path, cfg.csv_labels)?,
        Format::Native => data::load_native(path)?,
        Format::Idx => {
            let labels = cfg
                .labels
                .as_deref()
                .ok_or_else(|| Failure::invalid("IDX images need a label file (--labels)"))?;
            data::load_idx(path, labels)?
        }
    })
}

fn unknown_format(path: &Path) -> Failure {
    Failure::invalid(format!(
        "{}: unrecognized format (expected .csv, .bin or .idx)",
        path.display()
    ))
}

/// Seed that determines the dataset, when one does.
fn dataset_seed(cfg: &DataConfig) -> Option<u64> {
    match &cfg.synthetic {
        Some(spec) => SubspaceGenSpec::parse(spec).ok().map(|s| s.seed),
        None => cfg.per_class.map(|_| cfg.subsample_seed),
    }
}

fn prepare_out_dir(cfg: &RunConfig) -> Outcome<PathBuf> {
    let dir = cfg.run.out_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(dir)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn labels_csv(labels: &ClusterLabels) -> String {
    let mut out = String::from("index,label\n");
    for (i, l) in labels.as_slice().iter().enumerate() {
        writeln!(out, "{i},{l}").expect("writing to a String");
    }
    out
}

/// Reads labels written one per line or as `index,label` rows; a header
/// line is skipped.
fn read_label_file(path: &Path) -> Outcome<ClusterLabels> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cell = line.rsplit(',').next().unwrap_or(line).trim();
        match cell.parse::<usize>() {
            Ok(v) => labels.push(v),
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(Failure::io(
                    path,
                    format!("line {}: `{cell}` is not a label", lineno + 1),
                ))
            }
        }
    }
    Ok(ClusterLabels::from_labels(labels)?)
}
