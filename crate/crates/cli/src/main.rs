use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use visdet_core::corpus::{load_split, read_predictions, validate_dataset, DatasetManifest};
use visdet_core::eval::oracle::run_oracle_suite;
use visdet_core::eval::{evaluate_split, EvalSummary, GroundTruthSet, Interpolation, MatchConfig, PredictionSet};
use visdet_core::report::{
    aggregate_timing, compose_comparison, emit, parse_timing_jsonl, render_detections, ModalityMetrics, ModalityResult,
    TableFormat,
};
use visdet_core::spectral::{transform_corpus, ImageBuffer, Modality, TransformParams, TransformSeed};

const DEFAULT_SEED: u64 = 20250001;

#[derive(Parser)]
#[command(name = "visdet", version, about = "Multi-modality detection benchmarking toolkit")]
struct Cli {
    /// Worker threads; defaults to available parallelism. Never changes output bytes.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus for malformed labels, orphans and missing files.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Generate one modality over a split.
    Transform {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        modality: Modality,
        /// TOML file with `[night]` and `[obscura]` tables.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against a split's ground truth.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Directory of `<image_id>.txt` prediction files.
        #[arg(long)]
        predictions: PathBuf,
        /// Confidence threshold for the confusion matrix.
        #[arg(long, default_value_t = 0.25)]
        conf: f64,
        /// IoU threshold for the confusion matrix.
        #[arg(long, default_value_t = 0.45)]
        iou: f64,
        #[arg(long, default_value = "101-point", value_parser = parse_interpolation)]
        interpolation: Interpolation,
        /// Summary JSON destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank modalities from evaluation summaries and timing files.
    Compare(CompareArgs),
    /// Draw predictions onto a split's images.
    Render {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        conf: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the evaluator against the brute-force oracle.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct CompareArgs {
    /// `NAME=summary.json`, once per modality (at least two).
    #[arg(long = "summary", value_parser = parse_named::<PathBuf>, required = true)]
    summaries: Vec<(String, PathBuf)>,
    /// `NAME=timing.jsonl`, one for every summary.
    #[arg(long = "timing", value_parser = parse_named::<PathBuf>, required = true)]
    timings: Vec<(String, PathBuf)>,
    /// `NAME=HOURS`, optional.
    #[arg(long = "training-hours", value_parser = parse_named::<f64>)]
    training_hours: Vec<(String, f64)>,
    #[arg(long, default_value = "markdown")]
    format: TableFormat,
    /// Table destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_named<T: std::str::FromStr>(s: &str) -> Result<(String, T), String>
where
    T::Err: Display,
{
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    if name.trim().is_empty() {
        return Err(format!("empty name in `{s}`"));
    }
    let value = value.parse::<T>().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((name.to_string(), value))
}

fn parse_interpolation(s: &str) -> Result<Interpolation, String> {
    match s {
        "101-point" => Ok(Interpolation::Point101),
        "all-points" => Ok(Interpolation::AllPoints),
        other => Err(format!("`{other}` (expected 101-point or all-points)")),
    }
}

enum Failure {
    Usage(String),
    Domain(String),
}

fn domain(e: impl Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn io_failure(path: &Path, e: impl Display) -> Failure {
    Failure::Domain(format!("IoFailure: {}: {e}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
            }
            fs::write(path, text).map_err(|e| io_failure(path, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(manifest: &Path) -> Result<(), Failure> {
    let manifest = DatasetManifest::load(manifest).map_err(domain)?;
    let report = validate_dataset(&manifest);
    println!("images\t{}", report.image_count);
    println!("labels\t{}", report.label_count);
    for (id, count) in report.per_class.iter().enumerate() {
        println!("class\t{}\t{count}", manifest.class_table.name(id).unwrap_or("?"));
    }
    println!("violations\t{}", report.violations.len());
    if report.is_valid() {
        return Ok(());
    }
    for v in &report.violations {
        match v.line {
            Some(line) => eprintln!("{}:{line}: {}", v.file.display(), v.reason),
            None => eprintln!("{}: {}", v.file.display(), v.reason),
        }
    }
    Err(Failure::Domain(format!("{} violation(s)", report.violations.len())))
}

fn transform(
    manifest: &Path,
    split: &str,
    modality: Modality,
    params: Option<&Path>,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let manifest = DatasetManifest::load(manifest).map_err(domain)?;
    let params = match params {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            TransformParams::from_toml_str(&text).map_err(domain)?
        }
        None => TransformParams::default(),
    };
    let report =
        transform_corpus(&manifest, split, modality, &params, TransformSeed(seed), out, None).map_err(domain)?;
    println!(
        "{}\t{} images\tseed {}\t{}",
        modality.display_name(),
        report.image_count,
        seed,
        out.display()
    );
    eprintln!("wall time {:.1} ms", report.wall_time_ms);
    Ok(())
}

/// Reads `<dir>/<id>.txt` for every id in the split plus any stray
/// prediction files, so predictions for unknown images are reported.
fn read_prediction_dir(dir: &Path, gts: &GroundTruthSet, manifest: &DatasetManifest) -> Result<PredictionSet, Failure> {
    if !dir.is_dir() {
        return Err(io_failure(dir, "not a directory"));
    }
    let mut ids: Vec<String> = gts.keys().cloned().collect();
    for entry in fs::read_dir(dir).map_err(|e| io_failure(dir, e))? {
        let path = entry.map_err(|e| io_failure(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if !gts.contains_key(stem) {
                    ids.push(stem.to_string());
                }
            }
        }
    }
    let opts = manifest.class_table.parse_options();
    ids.par_iter()
        .map(|id| {
            let preds = read_predictions(&dir.join(format!("{id}.txt")), &opts).map_err(domain)?;
            Ok((id.clone(), preds))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    manifest: &Path,
    split: &str,
    predictions: &Path,
    conf: f64,
    iou: f64,
    interpolation: Interpolation,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let manifest = DatasetManifest::load(manifest).map_err(domain)?;
    let items = load_split(&manifest, split).map_err(domain)?;
    let gts: GroundTruthSet = items.into_iter().map(|i| (i.image_id, i.records)).collect();
    let preds = read_prediction_dir(predictions, &gts, &manifest)?;
    let config = MatchConfig {
        interpolation,
        cm_conf: conf,
        cm_iou: iou,
        ..MatchConfig::default()
    };
    let summary = evaluate_split(&gts, &preds, &manifest.class_table, &config).map_err(domain)?;
    write_output(out, &summary.to_json())?;
    if out.is_some() {
        println!(
            "map50 {:.3}\tmap50_95 {:.3}\tprecision {:.3}\trecall {:.3}\tf1 {:.3}",
            summary.map50, summary.map50_95, summary.precision, summary.recall, summary.f1
        );
    }
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<(), Failure> {
    if args.summaries.len() < 2 {
        return Err(Failure::Usage("--summary must be given at least twice".into()));
    }
    let mut timings: BTreeMap<&str, &Path> = BTreeMap::new();
    for (name, path) in &args.timings {
        if timings.insert(name, path).is_some() {
            return Err(Failure::Usage(format!("--timing: `{name}` given more than once")));
        }
    }
    let mut hours: BTreeMap<&str, f64> = BTreeMap::new();
    for (name, h) in &args.training_hours {
        if hours.insert(name, *h).is_some() {
            return Err(Failure::Usage(format!(
                "--training-hours: `{name}` given more than once"
            )));
        }
    }
    for name in timings.keys().chain(hours.keys()) {
        if !args.summaries.iter().any(|(n, _)| n == name) {
            return Err(Failure::Usage(format!("no --summary for `{name}`")));
        }
    }

    let mut results = Vec::with_capacity(args.summaries.len());
    for (name, path) in &args.summaries {
        let timing_path = timings
            .get(name.as_str())
            .ok_or_else(|| Failure::Usage(format!("--timing: missing entry for `{name}`")))?;
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        let summary = EvalSummary::from_json(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
        let text = fs::read_to_string(timing_path).map_err(|e| io_failure(timing_path, e))?;
        let records =
            parse_timing_jsonl(&text).map_err(|e| Failure::Domain(format!("{}: {e}", timing_path.display())))?;
        let timing =
            aggregate_timing(&records).map_err(|e| Failure::Domain(format!("{}: {e}", timing_path.display())))?;
        results.push(ModalityResult {
            modality: name.clone(),
            metrics: ModalityMetrics::from(&summary),
            timing,
            training_time_h: hours.get(name.as_str()).copied(),
        });
    }
    let table = compose_comparison(&results).map_err(domain)?;
    write_output(args.out.as_deref(), &emit(&table, args.format))
}

fn render(manifest: &Path, split: &str, predictions: &Path, conf: f64, out: &Path) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&conf) {
        return Err(Failure::Usage(format!("--conf: {conf} is outside [0, 1]")));
    }
    let manifest = DatasetManifest::load(manifest).map_err(domain)?;
    let spec = manifest.split(split).map_err(domain)?;
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let opts = manifest.class_table.parse_options();
    let drawn = spec
        .images
        .par_iter()
        .map(|entry| {
            let preds =
                read_predictions(&predictions.join(format!("{}.txt", entry.image_id)), &opts).map_err(domain)?;
            let img = ImageBuffer::open(&entry.image_path).map_err(domain)?;
            let dst = out.join(format!("{}.png", entry.image_id));
            render_detections(&img, &preds, &manifest.class_table, conf)
                .save_png(&dst)
                .map_err(domain)
        })
        .collect::<Result<Vec<()>, Failure>>()?;
    println!("rendered {} images into {}", drawn.len(), out.display());
    Ok(())
}

fn oracle(instances: usize, seed: u64, tolerance: f64) -> Result<(), Failure> {
    if instances == 0 {
        return Err(Failure::Usage("--instances must be positive".into()));
    }
    let report = run_oracle_suite(instances, seed, tolerance).map_err(domain)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passed() {
        println!("PASS");
        Ok(())
    } else {
        Err(Failure::Domain(format!(
            "OracleMismatch: {} AP, {} mAP and {} monotonicity failure(s); first at instance {:?}",
            report.ap_mismatches, report.map_mismatches, report.monotonicity_violations, report.first_failure
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Domain(e.to_string()))?;
    }
    match cli.command {
        Command::Validate { manifest } => validate(&manifest),
        Command::Transform {
            manifest,
            split,
            modality,
            params,
            seed,
            out,
        } => transform(&manifest, &split, modality, params.as_deref(), seed, &out),
        Command::Evaluate {
            manifest,
            split,
            predictions,
            conf,
            iou,
            interpolation,
            out,
        } => evaluate(
            &manifest,
            &split,
            &predictions,
            conf,
            iou,
            interpolation,
            out.as_deref(),
        ),
        Command::Compare(args) => compare(&args),
        Command::Render {
            manifest,
            split,
            predictions,
            conf,
            out,
        } => render(&manifest, &split, &predictions, conf, &out),
        Command::Oracle {
            instances,
            seed,
            tolerance,
        } => oracle(instances, seed, tolerance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
