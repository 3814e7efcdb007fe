//! Command-line front end for the context-flux skeleton pipeline.
//!
//! Results go to standard output as JSON (or CSV where selected);
//! diagnostics go to standard error. Exit codes: 0 success, 1 internal
//! error, 2 usage or input error. Every subcommand is deterministic given
//! its flags; `--threads` (or the `FLUXSKEL_THREADS` environment variable)
//! only changes how batch directories are processed, never the results.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fluxskel_core::binflux::{skeletonize_binary, AofParams};
use fluxskel_core::eval::{pr_curve, single_point_report, MatchTolerance};
use fluxskel_core::fluxgen::{compute_context_flux, partition_regions, ContextRadius};
use fluxskel_core::raster::GridDims;
use fluxskel_core::recover::{confidence_map, recover_skeleton, RecoveryParams};
use fluxskel_core::synth::{
    make_shape, perturb_flux, sweep_context_radius, PerturbSpec, ShapeKind, ShapeSpec,
};

use fluxskel::fluxfile::{read_flux, write_flux};
use fluxskel::pgm::{read_binary_map, write_binary_map};
use fluxskel::report::{report_to_csv, report_to_json, sweep_to_csv, sweep_to_json};
use fluxskel::IoError;

#[derive(Parser)]
#[command(
    name = "fluxskel",
    version,
    about = "Context-flux skeleton pipeline: ground truth, recovery, skeletonization, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth flux field (FLX1) from a skeleton image.
    GenFlux(GenFluxArgs),
    /// Recover a skeleton (PGM) from a flux field.
    Recover(RecoverArgs),
    /// Skeletonize a binary mask image with the net-inward-flux method.
    Skeletonize(SkeletonizeArgs),
    /// Degrade a flux field with noise, angle jitter, and dropout patches.
    Perturb(PerturbArgs),
    /// Evaluate a predicted skeleton against a ground-truth skeleton.
    Eval(EvalArgs),
    /// Run shape -> flux -> perturb -> recover -> eval on synthetic data.
    Demo(DemoArgs),
    /// Round-trip F-measure across context radii.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenFluxArgs {
    /// Skeleton image (PGM/PNG), or a directory of them.
    input: PathBuf,
    /// Output flux file, or a directory in batch mode.
    #[arg(long)]
    out: PathBuf,
    /// Context neighborhood radius in pixels.
    #[arg(long, default_value_t = 7)]
    r: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Flux file (FLX1), or a directory of them.
    input: PathBuf,
    /// Output skeleton PGM, or a directory in batch mode.
    #[arg(long)]
    out: PathBuf,
    /// Flux magnitude threshold.
    #[arg(long, default_value_t = 0.4)]
    lambda: f64,
    /// Dilation disk radius.
    #[arg(long, default_value_t = 3)]
    k1: usize,
    /// Erosion disk radius.
    #[arg(long, default_value_t = 4)]
    k2: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SkeletonizeArgs {
    /// Mask image (PGM/PNG), or a directory of them.
    input: PathBuf,
    /// Output skeleton PGM, or a directory in batch mode.
    #[arg(long)]
    out: PathBuf,
    /// Average-outward-flux threshold (must be negative).
    #[arg(long, default_value_t = -0.4, allow_hyphen_values = true)]
    tau: f64,
    /// Ignore mask components smaller than this many pixels.
    #[arg(long, default_value_t = 9)]
    min_area: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PerturbArgs {
    /// Flux file (FLX1), or a directory of them.
    input: PathBuf,
    /// Output flux file, or a directory in batch mode.
    #[arg(long)]
    out: PathBuf,
    /// Component-wise Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Per-vector rotation standard deviation, in degrees.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Number of square dropout patches to zero.
    #[arg(long, default_value_t = 0)]
    patches: usize,
    /// Side length of each dropout patch.
    #[arg(long, default_value_t = 5)]
    patch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted skeleton image, or a directory of them.
    pred: PathBuf,
    /// Ground-truth skeleton image, or a directory matched by filename.
    gt: PathBuf,
    /// Optional flux file; enables the confidence-based PR curve
    /// (confidence is the inverse flux magnitude on the prediction).
    #[arg(long)]
    flux: Option<PathBuf>,
    /// Match tolerance as a fraction of the image diagonal.
    #[arg(long, default_value_t = MatchTolerance::DEFAULT_RHO)]
    rho: f64,
    /// Number of PR thresholds.
    #[arg(long, default_value_t = 99)]
    thresholds: usize,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 300)]
    width: usize,
    #[arg(long, default_value_t = 200)]
    height: usize,
    #[arg(long, value_enum, default_value_t = DemoShape::Line)]
    shape: DemoShape,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise applied to the ground-truth flux before recovery.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 7)]
    r: usize,
    #[arg(long, default_value_t = 0.4)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    k1: usize,
    #[arg(long, default_value_t = 4)]
    k2: usize,
    #[arg(long, default_value_t = MatchTolerance::DEFAULT_RHO)]
    rho: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Skeleton image (PGM/PNG), or a directory of them.
    input: PathBuf,
    /// Context radii to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 5, 7, 9, 11])]
    radii: Vec<usize>,
    #[arg(long, default_value_t = 0.4)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    k1: usize,
    #[arg(long, default_value_t = 4)]
    k2: usize,
    #[arg(long, default_value_t = MatchTolerance::DEFAULT_RHO)]
    rho: f64,
    /// Also write the table to this file (a directory in batch mode).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DemoShape {
    Line,
    Polyline,
    Ellipse,
    Rect,
    Disk,
    Blob,
}

/// Errors that terminate a subcommand.
enum AppError {
    /// Bad flags or unusable input: exit 2.
    Input(String),
    /// Unexpected internal failure: exit 1.
    Internal(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Input(_) => 2,
            AppError::Internal(_) => 1,
        }
    }
    fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Internal(m) => m,
        }
    }
}

impl From<IoError> for AppError {
    fn from(e: IoError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<fluxskel_core::Error> for AppError {
    fn from(e: fluxskel_core::Error) -> Self {
        AppError::Input(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(err)) => {
            eprintln!("fluxskel: {}", err.message());
            std::process::exit(err.code());
        }
        Err(_) => {
            eprintln!("fluxskel: internal error");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::GenFlux(args) => cmd_gen_flux(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Skeletonize(args) => cmd_skeletonize(args),
        Command::Perturb(args) => cmd_perturb(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Demo(args) => cmd_demo(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_gen_flux(args: GenFluxArgs) -> Result<(), AppError> {
    let r = ContextRadius::new(args.r)
        .ok_or_else(|| AppError::Input("--r must be at least 1".into()))?;
    let per_file = |input: &Path, output: &Path| -> Result<Value, AppError> {
        let skeleton = read_binary_map(input)?;
        let partition = partition_regions(&skeleton, r)?;
        let flux = compute_context_flux(&skeleton, r)?;
        write_flux(&flux, output)?;
        Ok(json!({
            "skeleton": partition.skeleton_count(),
            "context": partition.context_count(),
            "background": partition.background_count(),
        }))
    };
    if args.input.is_dir() {
        return run_batch(
            &args.input,
            &args.out,
            IMAGE_EXTS,
            "flx",
            args.threads,
            &per_file,
        );
    }
    let v = per_file(&args.input, &args.out)?;
    println!("{v}");
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<(), AppError> {
    let params = recovery_params(args.lambda, args.k1, args.k2)?;
    let per_file = |input: &Path, output: &Path| -> Result<Value, AppError> {
        let flux = read_flux(input)?;
        let skeleton = recover_skeleton(&flux, &params);
        write_binary_map(&skeleton, output)?;
        Ok(json!({ "skeleton_pixels": skeleton.count_true() }))
    };
    if args.input.is_dir() {
        return run_batch(
            &args.input,
            &args.out,
            &["flx"],
            "pgm",
            args.threads,
            &per_file,
        );
    }
    let v = per_file(&args.input, &args.out)?;
    println!("{v}");
    Ok(())
}

fn cmd_skeletonize(args: SkeletonizeArgs) -> Result<(), AppError> {
    if args.tau >= 0.0 {
        return Err(AppError::Input("--tau must be negative".into()));
    }
    if args.min_area == 0 {
        return Err(AppError::Input("--min-area must be at least 1".into()));
    }
    let params = AofParams {
        tau: args.tau,
        min_object_area: args.min_area,
    };
    let per_file = |input: &Path, output: &Path| -> Result<Value, AppError> {
        let mask = read_binary_map(input)?;
        let skeleton = skeletonize_binary(&mask, &params)?;
        write_binary_map(&skeleton, output)?;
        Ok(json!({ "skeleton_pixels": skeleton.count_true() }))
    };
    if args.input.is_dir() {
        return run_batch(
            &args.input,
            &args.out,
            IMAGE_EXTS,
            "pgm",
            args.threads,
            &per_file,
        );
    }
    let v = per_file(&args.input, &args.out)?;
    println!("{v}");
    Ok(())
}

fn cmd_perturb(args: PerturbArgs) -> Result<(), AppError> {
    if args.sigma < 0.0 || args.jitter < 0.0 {
        return Err(AppError::Input("--sigma and --jitter must be >= 0".into()));
    }
    if args.patch_size == 0 {
        return Err(AppError::Input("--patch-size must be at least 1".into()));
    }
    let spec = PerturbSpec {
        sigma: args.sigma,
        dropout_patches: args.patches,
        patch_size: args.patch_size,
        angle_jitter_deg: args.jitter,
        seed: args.seed,
    };
    let per_file = |input: &Path, output: &Path| -> Result<Value, AppError> {
        let flux = read_flux(input)?;
        let out = perturb_flux(&flux, &spec);
        write_flux(&out, output)?;
        Ok(json!({
            "width": out.dims().width,
            "height": out.dims().height,
            "sigma": spec.sigma,
            "patches": spec.dropout_patches,
        }))
    };
    if args.input.is_dir() {
        return run_batch(
            &args.input,
            &args.out,
            &["flx"],
            "flx",
            args.threads,
            &per_file,
        );
    }
    let v = per_file(&args.input, &args.out)?;
    println!("{v}");
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), AppError> {
    let tol = MatchTolerance::new(args.rho)
        .ok_or_else(|| AppError::Input("--rho must be positive".into()))?;
    if args.thresholds == 0 {
        return Err(AppError::Input("--thresholds must be at least 1".into()));
    }
    let evaluate = |pred_path: &Path, gt_path: &Path| -> Result<Value, AppError> {
        let pred = read_binary_map(pred_path)?;
        let gt = read_binary_map(gt_path)?;
        let report = match &args.flux {
            Some(flux_path) => {
                let flux = read_flux(flux_path)?;
                let conf = confidence_map(&flux, &pred)?;
                pr_curve(&conf, &gt, tol, args.thresholds)?
            }
            None => single_point_report(&pred, &gt, tol)?,
        };
        match args.format {
            Format::Json => {
                let v = report_to_json(&report);
                if let Some(out) = &args.out {
                    std::fs::write(out, v.to_string()).map_err(IoError::Io)?;
                }
                Ok(v)
            }
            Format::Csv => {
                let csv = report_to_csv(&report);
                if let Some(out) = &args.out {
                    std::fs::write(out, &csv).map_err(IoError::Io)?;
                }
                Ok(Value::String(csv))
            }
        }
    };

    if args.pred.is_dir() {
        if !args.gt.is_dir() {
            return Err(AppError::Input(
                "batch eval needs a ground-truth directory".into(),
            ));
        }
        let files = list_files(&args.pred, IMAGE_EXTS)?;
        let gt_dir = args.gt.clone();
        let pred_dir = args.pred.clone();
        let results = parallel_map(files.len(), thread_count(args.threads), |i| {
            let name = &files[i];
            let gt_path = gt_dir.join(name);
            if !gt_path.exists() {
                return (name.clone(), Err("no matching ground-truth file".to_string()));
            }
            let r = evaluate(&pred_dir.join(name), &gt_path).map_err(|e| e.message().to_string());
            (name.clone(), r)
        });
        print_batch_summary(results);
        return Ok(());
    }
    match evaluate(&args.pred, &args.gt)? {
        Value::String(csv) => print!("{csv}"),
        v => println!("{v}"),
    }
    Ok(())
}

fn cmd_demo(args: DemoArgs) -> Result<(), AppError> {
    if args.width < 16 || args.height < 16 {
        return Err(AppError::Input("demo grid must be at least 16x16".into()));
    }
    let r = ContextRadius::new(args.r)
        .ok_or_else(|| AppError::Input("--r must be at least 1".into()))?;
    let params = recovery_params(args.lambda, args.k1, args.k2)?;
    let tol = MatchTolerance::new(args.rho)
        .ok_or_else(|| AppError::Input("--rho must be positive".into()))?;
    if args.sigma < 0.0 {
        return Err(AppError::Input("--sigma must be >= 0".into()));
    }

    let (w, h) = (args.width, args.height);
    let dims = GridDims::new(w, h);
    let kind = match args.shape {
        DemoShape::Line => ShapeKind::Line {
            from: (w / 8, h / 2),
            to: (w - 1 - w / 8, h / 2),
        },
        DemoShape::Polyline => ShapeKind::Polyline {
            points: vec![
                (w / 8, 3 * h / 4),
                (w / 2, h / 4),
                (w - 1 - w / 8, 3 * h / 4),
            ],
        },
        DemoShape::Ellipse => ShapeKind::EllipseSkeleton {
            center: (w / 2, h / 2),
            semi_axes: ((w / 3) as f64, (h / 3) as f64),
        },
        DemoShape::Rect => ShapeKind::RectangleMask {
            origin: (w / 6, h / 3),
            size: (2 * w / 3, h / 3),
        },
        DemoShape::Disk => ShapeKind::DiskMask {
            center: (w / 2, h / 2),
            radius: w.min(h) / 3,
        },
        DemoShape::Blob => ShapeKind::BlobMask,
    };
    let shape = make_shape(&ShapeSpec {
        dims,
        kind,
        seed: args.seed,
    })?;

    let flux = compute_context_flux(&shape.skeleton, r)?;
    let degraded = perturb_flux(
        &flux,
        &PerturbSpec {
            sigma: args.sigma,
            seed: args.seed,
            ..PerturbSpec::default()
        },
    );

    let start = Instant::now();
    let recovered = recover_skeleton(&degraded, &params);
    let recover_ms = start.elapsed().as_secs_f64() * 1e3;

    let report = single_point_report(&recovered, &shape.skeleton, tol)?;
    let shape_name = ["line", "polyline", "ellipse", "rect", "disk", "blob"]
        [args.shape as usize];
    println!(
        "{}",
        json!({
            "shape": shape_name,
            "width": w,
            "height": h,
            "seed": args.seed,
            "sigma": args.sigma,
            "r": args.r,
            "lambda": args.lambda,
            "k1": args.k1,
            "k2": args.k2,
            "rho": args.rho,
            "skeleton_pixels": shape.skeleton.count_true(),
            "recovered_pixels": recovered.count_true(),
            "precision": report.best.precision,
            "recall": report.best.recall,
            "f": report.best.f_measure,
            "recover_ms": recover_ms,
        })
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), AppError> {
    let params = recovery_params(args.lambda, args.k1, args.k2)?;
    let tol = MatchTolerance::new(args.rho)
        .ok_or_else(|| AppError::Input("--rho must be positive".into()))?;
    let table = |input: &Path| -> Result<Vec<fluxskel_core::synth::SweepRow>, AppError> {
        let skeleton = read_binary_map(input)?;
        Ok(sweep_context_radius(&skeleton, &args.radii, &params, tol)?)
    };
    if args.input.is_dir() {
        let out_dir = args
            .out
            .as_deref()
            .ok_or_else(|| AppError::Input("batch sweep needs --out directory".into()))?;
        let out_ext = match args.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        return run_batch(
            &args.input,
            out_dir,
            IMAGE_EXTS,
            out_ext,
            args.threads,
            &|input, output| {
                let rows = table(input)?;
                let text = match args.format {
                    Format::Csv => sweep_to_csv(&rows),
                    Format::Json => format!("{}\n", sweep_to_json(&rows)),
                };
                std::fs::write(output, &text).map_err(IoError::Io)?;
                Ok(sweep_to_json(&rows))
            },
        );
    }
    let rows = table(&args.input)?;
    let text = match args.format {
        Format::Csv => sweep_to_csv(&rows),
        Format::Json => format!("{}\n", sweep_to_json(&rows)),
    };
    if let Some(out) = &args.out {
        std::fs::write(out, &text).map_err(IoError::Io)?;
    }
    print!("{text}");
    Ok(())
}

fn recovery_params(lambda: f64, k1: usize, k2: usize) -> Result<RecoveryParams, AppError> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(AppError::Input("--lambda must be >= 0".into()));
    }
    Ok(RecoveryParams { lambda, k1, k2 })
}

const IMAGE_EXTS: &[&str] = &["pgm", "png"];

/// Filenames (not paths) in `dir` with one of the given extensions, sorted.
fn list_files(dir: &Path, exts: &[&str]) -> Result<Vec<String>, AppError> {
    let mut out = Vec::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| AppError::Input(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| AppError::Internal(e.to_string()))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext_ok = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| exts.contains(&e.to_ascii_lowercase().as_str()));
        if ext_ok {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                out.push(name.to_string());
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Process every matching file in `input_dir`, writing one output per file
/// into `out_dir` with the extension replaced. Per-file failures go to
/// standard error and the summary; they do not abort the batch.
fn run_batch(
    input_dir: &Path,
    out_dir: &Path,
    input_exts: &[&str],
    out_ext: &str,
    threads: Option<usize>,
    per_file: &(dyn Fn(&Path, &Path) -> Result<Value, AppError> + Sync),
) -> Result<(), AppError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Input(format!("{}: {e}", out_dir.display())))?;
    let files = list_files(input_dir, input_exts)?;
    let results = parallel_map(files.len(), thread_count(threads), |i| {
        let name = &files[i];
        let input = input_dir.join(name);
        let output = out_dir.join(Path::new(name).with_extension(out_ext));
        let r = per_file(&input, &output).map_err(|e| e.message().to_string());
        (name.clone(), r)
    });
    print_batch_summary(results);
    Ok(())
}

fn print_batch_summary(mut results: Vec<(String, Result<Value, String>)>) {
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let total = results.len();
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    for (name, r) in &results {
        if let Err(msg) = r {
            eprintln!("fluxskel: {name}: {msg}");
        }
    }
    let files: Vec<Value> = results
        .into_iter()
        .map(|(name, r)| match r {
            Ok(v) => json!({"file": name, "ok": true, "result": v}),
            Err(msg) => json!({"file": name, "ok": false, "error": msg}),
        })
        .collect();
    println!(
        "{}",
        json!({
            "total": total,
            "succeeded": total - failed,
            "failed": failed,
            "files": files,
        })
    );
}

/// Worker count: the flag wins, then `FLUXSKEL_THREADS`, then the machine.
fn thread_count(flag: Option<usize>) -> usize {
    flag.filter(|&t| t >= 1)
        .or_else(|| {
            std::env::var("FLUXSKEL_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
                .filter(|&t| t >= 1)
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run `f(0..n)` on a small worker pool, preserving index order.
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let workers = threads.clamp(1, n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                *slots[i].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}
