//! Command-line surface.
//!
//! Subcommands: `annotate-grasps`, `segment`, `mix`, `fit-scaling`, `synth`,
//! `stats`. Every randomized command takes an explicit `--seed`; nothing
//! reads the clock or the entropy pool, so identical invocations produce
//! byte-identical outputs. Exit codes: 0 success, 1 usage, 2 input/format,
//! 3 domain.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{corpus_stats, fit_log_count, fit_log_proportion, CorpusRecord};
use crate::error::{Error, Result};
use crate::grasp::{annotate, AnnotationParams, GripperModel};
use crate::io::labels::{write_labels, LabelDocument};
use crate::io::manifest::write_manifest;
use crate::io::ply::parse_point_cloud;
use crate::io::report::{read_scaling_csv, write_fit_report, write_plot_csv, FitReport};
use crate::io::trajectory::{list_trajectory_files, read_trajectory, trajectory_to_jsonl};
use crate::io::FORMAT_VERSION;
use crate::mixture::{build, FullEntry, MixtureSpec, SrpEntry, Strategy};
use crate::rng::derive_seed;
use crate::synth::{gen_full, gen_srp_only, SynthTaskSpec};
use crate::traj::{segment, segment_preferring_gt, SegmentationConfig, Trajectory};

pub const SEGMENTS_FORMAT: &str = "manipkit.segments";
pub const STATS_FORMAT: &str = "manipkit.stats";

#[derive(Parser)]
#[command(
    name = "manipkit",
    about = "Grasp annotation, trajectory segmentation, dataset mixing and scaling fits",
    version
)]
struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annotate force-closure grasp labels on a PLY point cloud.
    AnnotateGrasps(AnnotateArgs),
    /// Split trajectories into SRP/PIP segments.
    Segment(SegmentArgs),
    /// Build a mixture manifest from full and SRP corpora.
    Mix(MixArgs),
    /// Fit a logarithmic scaling model to x,sr observations.
    FitScaling(FitArgs),
    /// Generate synthetic trajectories.
    Synth(SynthArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
}

fn parse_triple(s: &str) -> std::result::Result<Triple, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("bad number '{p}'"))?;
    }
    Ok(Triple(out))
}

#[derive(Clone, Copy, Debug)]
struct Triple([f64; 3]);

fn parse_f64_list(s: &str) -> std::result::Result<F64List, String> {
    let values: std::result::Result<Vec<f64>, String> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad number '{p}'")))
        .collect();
    let values = values?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(F64List(values))
}

#[derive(Clone, Debug)]
struct F64List(Vec<f64>);

/// Angle flag: plain radians, or degrees with a `deg` suffix (`60deg`).
fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Some(deg) = t.strip_suffix("deg") {
        let v: f64 = deg
            .trim()
            .parse()
            .map_err(|_| format!("bad angle '{s}'"))?;
        Ok(v.to_radians())
    } else {
        t.parse().map_err(|_| format!("bad angle '{s}'"))
    }
}

#[derive(Args)]
struct AnnotateArgs {
    /// ASCII PLY with x y z nx ny nz vertex properties.
    #[arg(long)]
    cloud: PathBuf,
    /// Output label document (JSON).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    n_approach: usize,
    #[arg(long, default_value_t = 12)]
    k_rolls: usize,
    #[arg(long, default_value_t = 256)]
    m_seeds: usize,
    /// Bite depths in meters, comma separated.
    #[arg(long, value_parser = parse_f64_list, default_value = "0.01,0.02,0.03")]
    depths: F64List,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    /// Finger box extents (x,y,z meters).
    #[arg(long, value_parser = parse_triple, default_value = "0.02,0.01,0.04")]
    finger_extents: Triple,
    /// Palm box extents (x,y,z meters).
    #[arg(long, value_parser = parse_triple, default_value = "0.08,0.03,0.03")]
    palm_extents: Triple,
    #[arg(long, default_value_t = 0.08)]
    opening_width: f64,
    #[arg(long, default_value_t = 0.04)]
    finger_length: f64,
    #[arg(long, default_value_t = 0.005)]
    min_bite_depth: f64,
}

#[derive(Args)]
struct SegmentThresholds {
    #[arg(long, default_value_t = 0.2)]
    dist_thresh: f64,
    /// Radians, or degrees with a `deg` suffix.
    #[arg(long, value_parser = parse_angle, default_value = "1.0471975511965976")]
    angle_thresh: f64,
    #[arg(long, default_value_t = 0.1)]
    close_thresh: f64,
    #[arg(long, default_value_t = 0.02)]
    lift_thresh: f64,
    /// Trust ground-truth phase labels when a trajectory carries them.
    #[arg(long)]
    use_gt: bool,
}

impl SegmentThresholds {
    fn config(&self) -> SegmentationConfig {
        SegmentationConfig {
            dist_thresh: self.dist_thresh,
            angle_thresh: self.angle_thresh,
            close_thresh: self.close_thresh,
            lift_thresh: self.lift_thresh,
        }
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Single trajectory JSONL file.
    #[arg(long, requires = "out", conflicts_with_all = ["dir", "out_dir"])]
    input: Option<PathBuf>,
    /// Output segments document for --input.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of trajectory JSONL files.
    #[arg(long, requires = "out_dir")]
    dir: Option<PathBuf>,
    /// Output directory for per-file segments documents.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    thresholds: SegmentThresholds,
}

#[derive(Args)]
struct MixArgs {
    /// Directory of full-stage trajectory JSONL files.
    #[arg(long)]
    full: PathBuf,
    /// Directory of independent SRP trajectory JSONL files.
    #[arg(long)]
    srp: PathBuf,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    thresholds: SegmentThresholds,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    NoRepeat,
    RepeatFull,
    RepeatPip,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::NoRepeat => Strategy::NoRepeat,
            StrategyArg::RepeatFull => Strategy::RepeatFull,
            StrategyArg::RepeatPip => Strategy::RepeatPip,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// CSV with an `x,sr` header.
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional plot table (x, fitted sr) over the input xs.
    #[arg(long)]
    plot_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    LogProportion,
    LogCount,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    step_len: f64,
    #[arg(long, default_value_t = 0.10)]
    lift_height: f64,
    #[arg(long, default_value = "target")]
    target_id: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Srp,
}

#[derive(Args)]
struct StatsArgs {
    /// Directory of trajectory JSONL files.
    #[arg(long)]
    dir: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    thresholds: SegmentThresholds,
}

/// Entry point: parse argv, run, and map errors to exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage { 1 } else { 0 };
        }
    };
    let threads = cli.threads;
    match with_pool(threads, || dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(feature = "parallel")]
fn with_pool<F>(threads: Option<usize>, f: F) -> Result<()>
where
    F: FnOnce() -> Result<()> + Send,
{
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<F>(_threads: Option<usize>, f: F) -> Result<()>
where
    F: FnOnce() -> Result<()> + Send,
{
    // Built without the parallel feature: everything runs sequentially.
    f()
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::AnnotateGrasps(args) => run_annotate(args),
        Command::Segment(args) => run_segment(args),
        Command::Mix(args) => run_mix(args),
        Command::FitScaling(args) => run_fit(args),
        Command::Synth(args) => run_synth(args),
        Command::Stats(args) => run_stats(args),
    }
}

fn run_annotate(args: AnnotateArgs) -> Result<()> {
    let cloud = parse_point_cloud(&args.cloud)?;
    let gripper = GripperModel {
        finger_extents: args.finger_extents.0.into(),
        palm_extents: args.palm_extents.0.into(),
        opening_width: args.opening_width,
        finger_length: args.finger_length,
        min_bite_depth: args.min_bite_depth,
    };
    let params = AnnotationParams {
        n_approach: args.n_approach,
        k_rolls: args.k_rolls,
        m_seeds: args.m_seeds,
        depths: args.depths.0.clone(),
        mu: args.mu,
        seed: args.seed,
    };
    let labels = annotate(&cloud, &gripper, &params)?;
    let doc = LabelDocument::new(&cloud.object_id, &params, &gripper, &labels);
    write_labels(&args.out, &doc)?;
    println!(
        "annotated {}: {} labels from {} candidates",
        cloud.object_id,
        labels.len(),
        params.n_approach * params.k_rolls * params.m_seeds * params.depths.len()
    );
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SegmentsDocument {
    format: String,
    version: String,
    source_file: String,
    config: SegmentationConfig,
    used_gt: bool,
    segmentation: crate::traj::SegmentedTrajectory,
}

fn segment_one(
    traj: &Trajectory,
    source_file: &str,
    cfg: &SegmentationConfig,
    use_gt: bool,
) -> Result<SegmentsDocument> {
    let segmentation = if use_gt {
        segment_preferring_gt(traj, cfg)?
    } else {
        segment(traj, cfg)?
    };
    Ok(SegmentsDocument {
        format: SEGMENTS_FORMAT.into(),
        version: FORMAT_VERSION.into(),
        source_file: source_file.into(),
        config: *cfg,
        used_gt: use_gt,
        segmentation,
    })
}

fn file_name_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn run_segment(args: SegmentArgs) -> Result<()> {
    let cfg = args.thresholds.config();
    cfg.validate()?;
    if let Some(input) = &args.input {
        let out = args.out.as_ref().expect("clap enforces --out");
        let traj = read_trajectory(input)?;
        let doc = segment_one(&traj, &file_name_of(input), &cfg, args.thresholds.use_gt)?;
        write_json(out, &doc)?;
        return Ok(());
    }
    let dir = args.dir.as_ref().expect("clap enforces --dir or --input");
    let out_dir = args.out_dir.as_ref().expect("clap enforces --out-dir");
    std::fs::create_dir_all(out_dir)?;
    let files = list_trajectory_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no .jsonl trajectories in {}",
            dir.display()
        )));
    }
    let docs = crate::parallel::map_indexed(files.len(), |i| -> Result<(String, String)> {
        let traj = read_trajectory(&files[i])?;
        let name = file_name_of(&files[i]);
        let doc = segment_one(&traj, &name, &cfg, args.thresholds.use_gt)?;
        let stem = files[i]
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok((format!("{stem}.segments.json"), to_json_string(&doc)))
    });
    for doc in docs {
        let (name, text) = doc?;
        std::fs::write(out_dir.join(name), text)?;
    }
    println!("segmented {} trajectories", files.len());
    Ok(())
}

fn run_mix(args: MixArgs) -> Result<()> {
    let cfg = args.thresholds.config();
    cfg.validate()?;
    let full_files = list_trajectory_files(&args.full)?;
    let srp_files = list_trajectory_files(&args.srp)?;

    let full_entries = crate::parallel::map_indexed(full_files.len(), |i| -> Result<FullEntry> {
        let traj = read_trajectory(&full_files[i])?;
        let seg = if args.thresholds.use_gt {
            segment_preferring_gt(&traj, &cfg)?
        } else {
            segment(&traj, &cfg)?
        };
        Ok(FullEntry {
            file_id: file_name_of(&full_files[i]),
            segments: seg.segments,
        })
    });
    let full_entries: Result<Vec<FullEntry>> = full_entries.into_iter().collect();
    let full_entries = full_entries?;

    let srp_entries = crate::parallel::map_indexed(srp_files.len(), |i| -> Result<SrpEntry> {
        // Parse to validate the format even though only the name is kept.
        read_trajectory(&srp_files[i])?;
        Ok(SrpEntry {
            file_id: file_name_of(&srp_files[i]),
        })
    });
    let srp_entries: Result<Vec<SrpEntry>> = srp_entries.into_iter().collect();
    let srp_entries = srp_entries?;

    let spec = MixtureSpec {
        n1: args.n1,
        n2: args.n2,
        strategy: args.strategy.into(),
        seed: args.seed,
    };
    let manifest = build(&full_entries, &srp_entries, &spec)?;
    write_manifest(&args.out, &manifest)?;
    println!(
        "mixed {} full + {} srp trajectories, p_srp = {:.4}, {} entries",
        spec.n1,
        spec.n2,
        manifest.p_srp,
        manifest.entries.len()
    );
    Ok(())
}

fn run_fit(args: FitArgs) -> Result<()> {
    let points = read_scaling_csv(&args.csv)?;
    let report = match args.model {
        ModelArg::LogProportion => FitReport::log_proportion(fit_log_proportion(&points)?),
        ModelArg::LogCount => FitReport::log_count(fit_log_count(&points)?),
    };
    match &args.out {
        Some(path) => write_fit_report(path, &report)?,
        None => print!("{}", report.to_pretty_string()),
    }
    if let Some(plot) = &args.plot_csv {
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        write_plot_csv(plot, &report, &xs)?;
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    if args.count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    std::fs::create_dir_all(&args.out_dir)?;
    let base = SynthTaskSpec {
        step_len: args.step_len,
        lift_height: args.lift_height,
        target_id: args.target_id.clone(),
        ..SynthTaskSpec::default()
    };
    let prefix = match args.mode {
        ModeArg::Full => "full",
        ModeArg::Srp => "srp",
    };
    let outputs = crate::parallel::map_indexed(args.count, |i| -> Result<(String, String)> {
        let spec = SynthTaskSpec {
            seed: derive_seed(args.seed, i as u64),
            ..base.clone()
        };
        let traj = match args.mode {
            ModeArg::Full => gen_full(&spec)?,
            ModeArg::Srp => gen_srp_only(&spec)?,
        };
        Ok((format!("{prefix}_{i:05}.jsonl"), trajectory_to_jsonl(&traj)))
    });
    for out in outputs {
        let (name, text) = out?;
        std::fs::write(args.out_dir.join(name), text)?;
    }
    println!("generated {} {prefix} trajectories", args.count);
    Ok(())
}

#[derive(serde::Serialize)]
struct StatsDocument {
    format: String,
    version: String,
    config: SegmentationConfig,
    used_gt: bool,
    stats: crate::analysis::CorpusStats,
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let cfg = args.thresholds.config();
    cfg.validate()?;
    let files = list_trajectory_files(&args.dir)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no .jsonl trajectories in {}",
            args.dir.display()
        )));
    }
    let records = crate::parallel::map_indexed(files.len(), |i| -> Result<CorpusRecord> {
        let traj = read_trajectory(&files[i])?;
        let seg = if args.thresholds.use_gt {
            segment_preferring_gt(&traj, &cfg)?
        } else {
            segment(&traj, &cfg)?
        };
        Ok(CorpusRecord {
            source: traj.source,
            num_steps: traj.steps.len(),
            segments: seg.segments,
        })
    });
    let records: Result<Vec<CorpusRecord>> = records.into_iter().collect();
    let stats = corpus_stats(&records?)?;
    let doc = StatsDocument {
        format: STATS_FORMAT.into(),
        version: FORMAT_VERSION.into(),
        config: cfg,
        used_gt: args.thresholds.use_gt,
        stats,
    };
    match &args.out {
        Some(path) => write_json(path, &doc)?,
        None => print!("{}", to_json_string(&doc)),
    }
    Ok(())
}

fn to_json_string<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    text
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value))?;
    Ok(())
}
