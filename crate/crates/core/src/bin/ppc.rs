use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ppc::bench::{format_table, run_bench, BenchConfig};
use ppc::canonicalize::{canonicalize, DegeneracyThresholds, Verdict};
use ppc::cloud::PointCloud;
use ppc::downsample::{downsample_pipeline, fps_select, FpsParams, SeedRule, VoxelParams};
use ppc::error::{PpcError, Result};
use ppc::geometry::RigidTransform;
use ppc::io::{read_cloud, write_cloud, CloudData, CloudFormat};
use ppc::metrics::{chamfer_brute, chamfer_fast};
use ppc::report::{canonical_records, render, thresholds_record, Record};
use ppc::score::ScoreFunction;
use ppc::synth::{generate, jitter, sample_rotation, SceneKind, SceneSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

/// Default FPS target when `--fps` is not given.
const DEFAULT_FPS: usize = 512;
/// Default voxel edge as a fraction of the bounding-box diagonal.
const DEFAULT_VOXEL_FRACTION: f64 = 1.0 / 200.0;

#[derive(Parser)]
#[command(
    name = "ppc",
    version,
    about = "Rigid-motion invariant point cloud canonicalization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Downsample and map a cloud to its canonical pose.
    Canon(CanonArgs),
    /// Symmetric Chamfer distance between two clouds.
    Chamfer(ChamferArgs),
    /// Voxel + farthest-point downsampling only.
    Downsample(DownsampleArgs),
    /// Write a synthetic scene.
    Generate(GenerateArgs),
    /// Raw vs canonical alignment benchmark.
    Bench(BenchArgs),
}

#[derive(Args)]
struct FormatArgs {
    /// Input format (default: from the file extension).
    #[arg(long, value_name = "FORMAT")]
    in_format: Option<CloudFormat>,
    /// Output format (default: from the file extension).
    #[arg(long, value_name = "FORMAT")]
    format: Option<CloudFormat>,
}

#[derive(Args)]
struct SamplingArgs {
    /// Voxel edge length; 0 skips the voxel stage [default: bbox diagonal / 200].
    #[arg(long, value_name = "SIZE")]
    voxel: Option<f64>,
    /// FPS target count; 0 skips FPS [default: min(512, points)].
    #[arg(long, value_name = "N")]
    fps: Option<usize>,
    /// FPS seed: `farthest` (from the centroid) or `first`.
    #[arg(long, default_value = "farthest")]
    seed_rule: SeedRule,
    /// Skip both downsampling stages.
    #[arg(long)]
    no_downsample: bool,
}

#[derive(Args)]
struct CanonArgs {
    input: PathBuf,
    output: PathBuf,
    /// Asymmetry score: sq, quartic or inverse.
    #[arg(long, default_value = "sq")]
    phi: ScoreFunction,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Write a key=value report (basis, signs, scores, gaps, verdict).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DegeneracyThresholds::default().gap_rel_min)]
    gap_rel_min: f64,
    #[arg(long, default_value_t = DegeneracyThresholds::default().phi_rel_min)]
    phi_rel_min: f64,
    #[arg(long, default_value_t = DegeneracyThresholds::default().warn_factor)]
    warn_factor: f64,
    #[arg(long, default_value_t = DegeneracyThresholds::default().eps_abs)]
    eps_abs: f64,
    #[command(flatten)]
    formats: FormatArgs,
}

#[derive(Args)]
struct ChamferArgs {
    a: PathBuf,
    b: PathBuf,
    /// Use the exhaustive O(|A||B|) evaluation.
    #[arg(long)]
    brute: bool,
    #[arg(long, value_name = "FORMAT")]
    in_format: Option<CloudFormat>,
}

#[derive(Args)]
struct DownsampleArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    formats: FormatArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    GaussianAniso,
    EllipsoidShell,
    TabletopClusters,
    CubeCorners,
    MirrorSymmetric,
    Plane,
}

impl From<KindArg> for SceneKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::GaussianAniso => SceneKind::GaussianAniso,
            KindArg::EllipsoidShell => SceneKind::EllipsoidShell,
            KindArg::TabletopClusters => SceneKind::TabletopClusters,
            KindArg::CubeCorners => SceneKind::CubeCorners,
            KindArg::MirrorSymmetric => SceneKind::MirrorSymmetric,
            KindArg::Plane => SceneKind::Plane,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    output: PathBuf,
    #[arg(long, value_enum, default_value = "gaussian-aniso")]
    kind: KindArg,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-axis scale `sx,sy,sz` [default: depends on the kind].
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    scale: Option<[f64; 3]>,
    /// Mirror plane normal axis for mirror-symmetric scenes.
    #[arg(long, default_value_t = 0)]
    mirror_axis: usize,
    /// Gaussian jitter added after generation.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Apply a uniformly random rotation drawn from this seed.
    #[arg(long, value_name = "SEED")]
    rotate: Option<u64>,
    /// Translation `tx,ty,tz` applied after the rotation.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    translate: Option<[f64; 3]>,
    #[arg(long, value_name = "FORMAT")]
    format: Option<CloudFormat>,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Report path [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the number of trials per row.
    #[arg(long, value_name = "K")]
    trials: Option<usize>,
    /// Also report distances on the clouds before downsampling.
    #[arg(long)]
    full: bool,
}

fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected 3 comma-separated values, got {}", v.len()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Canon(a) => cmd_canon(a),
        Command::Chamfer(a) => cmd_chamfer(a),
        Command::Downsample(a) => cmd_downsample(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

struct Sampled {
    cloud: PointCloud,
    voxel_size: f64,
    fps: usize,
    short_cloud: bool,
}

fn bbox_diagonal(cloud: &PointCloud) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in cloud {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}

fn sample(cloud: &PointCloud, args: &SamplingArgs) -> Result<Sampled> {
    if args.no_downsample {
        return Ok(Sampled {
            cloud: cloud.clone(),
            voxel_size: 0.0,
            fps: 0,
            short_cloud: false,
        });
    }
    let voxel_size = args
        .voxel
        .unwrap_or_else(|| bbox_diagonal(cloud) * DEFAULT_VOXEL_FRACTION);
    let fps = match args.fps {
        Some(n) => {
            if n > cloud.len() {
                return Err(PpcError::TargetExceedsCloud {
                    target: n,
                    available: cloud.len(),
                });
            }
            n
        }
        None => DEFAULT_FPS.min(cloud.len()),
    };
    let (out, short_cloud) = match (voxel_size > 0.0, fps > 0) {
        (true, true) => {
            let d = downsample_pipeline(
                cloud,
                &VoxelParams::new(voxel_size)?,
                &FpsParams::new(fps, args.seed_rule)?,
            )?;
            (d.cloud, d.short_cloud)
        }
        (true, false) => (
            ppc::voxel_downsample(cloud, &VoxelParams::new(voxel_size)?)?,
            false,
        ),
        (false, true) => {
            let idx = fps_select(cloud, &FpsParams::new(fps, args.seed_rule)?)?;
            (cloud.select(&idx)?, false)
        }
        (false, false) => (cloud.clone(), false),
    };
    log::info!("downsampled {} -> {} points", cloud.len(), out.len());
    Ok(Sampled {
        cloud: out,
        voxel_size,
        fps,
        short_cloud,
    })
}

fn sampling_record(input_points: usize, s: &Sampled, args: &SamplingArgs) -> Record {
    Record::new("downsample")
        .text("enabled", !args.no_downsample)
        .float("voxel_size", s.voxel_size)
        .text("fps", s.fps)
        .text("seed_rule", args.seed_rule.name())
        .text("points_in", input_points)
        .text("points_out", s.cloud.len())
        .text("short_cloud", s.short_cloud)
}

fn path_text(p: &Path) -> String {
    p.display().to_string()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn cmd_canon(a: CanonArgs) -> Result<u8> {
    let thresholds = DegeneracyThresholds {
        gap_rel_min: a.gap_rel_min,
        phi_rel_min: a.phi_rel_min,
        warn_factor: a.warn_factor,
        eps_abs: a.eps_abs,
    };
    thresholds.validate()?;
    let input = read_cloud(&a.input, a.formats.in_format)?;
    let sampled = sample(&input.cloud, &a.sampling)?;
    let result = canonicalize(&sampled.cloud, a.phi, &thresholds)?;
    write_cloud(
        &a.output,
        &CloudData::new(result.canonical.clone()),
        a.formats.format,
    )?;

    let verdict = result.report.verdict;
    if let Some(path) = &a.report {
        let mut records = vec![
            Record::new("config")
                .text("command", "canon")
                .text("input", path_text(&a.input))
                .text("output", path_text(&a.output))
                .text("phi", a.phi.name()),
            thresholds_record(&thresholds),
            sampling_record(input.cloud.len(), &sampled, &a.sampling),
        ];
        records.extend(canonical_records(&result));
        write_text(path, &render("ppc canon report", &records))?;
    }
    match verdict {
        Verdict::Ok => Ok(0),
        Verdict::NearDegenerate => {
            eprintln!("warning: canonical pose is near-degenerate (see report)");
            Ok(0)
        }
        Verdict::Degenerate => {
            eprintln!("warning: input is degenerate; the canonical pose is not unique");
            Ok(EXIT_DEGENERATE)
        }
    }
}

fn cmd_chamfer(a: ChamferArgs) -> Result<u8> {
    let p = read_cloud(&a.a, a.in_format)?.cloud;
    let q = read_cloud(&a.b, a.in_format)?.cloud;
    let r = if a.brute {
        chamfer_brute(&p, &q)?
    } else {
        chamfer_fast(&p, &q)?
    };
    let rec = Record::new("chamfer")
        .float("value", r.value)
        .float("forward_mean", r.forward_mean)
        .float("backward_mean", r.backward_mean)
        .text("method", if a.brute { "brute" } else { "kdtree" });
    let mut out = std::io::stdout().lock();
    writeln!(out, "{rec}")?;
    Ok(0)
}

fn cmd_downsample(a: DownsampleArgs) -> Result<u8> {
    let input = read_cloud(&a.input, a.formats.in_format)?;
    let sampled = sample(&input.cloud, &a.sampling)?;
    if sampled.short_cloud {
        eprintln!(
            "warning: voxel stage left {} points, fewer than the FPS target {}",
            sampled.cloud.len(),
            sampled.fps
        );
    }
    write_cloud(
        &a.output,
        &CloudData::new(sampled.cloud.clone()),
        a.formats.format,
    )?;
    eprintln!("{}", sampling_record(input.cloud.len(), &sampled, &a.sampling));
    Ok(0)
}

fn cmd_generate(a: GenerateArgs) -> Result<u8> {
    let kind = SceneKind::from(a.kind);
    let mut spec = SceneSpec::new(kind, a.points, a.seed);
    if let Some(s) = a.scale {
        spec.scale = s;
    }
    spec.mirror_axis = a.mirror_axis;
    spec.validate()?;
    let mut cloud = generate(&spec)?;
    if a.jitter > 0.0 {
        cloud = jitter(&cloud, a.jitter, a.seed.wrapping_add(1))?;
    }
    let mut motion = RigidTransform::identity();
    if let Some(seed) = a.rotate {
        motion = sample_rotation(seed);
    }
    if let Some(t) = a.translate {
        motion = RigidTransform::from_translation(t)?.after(&motion);
    }
    cloud = cloud.transformed(&motion);
    write_cloud(&a.output, &CloudData::new(cloud), a.format)?;
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let mut config = BenchConfig::from_path(&a.config)?;
    if let Some(k) = a.trials {
        config.trials = k;
    }
    config.full |= a.full;
    let report = run_bench(&config)?;
    let text = report.render();
    match &a.out {
        Some(path) => write_text(path, &text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    eprint!("{}", format_table(&report));
    let degenerate = report
        .rows
        .iter()
        .filter(|r| r.verdict == Verdict::Degenerate)
        .count();
    if degenerate > 0 {
        eprintln!("warning: {degenerate} row(s) involve degenerate clouds");
    }
    Ok(0)
}
