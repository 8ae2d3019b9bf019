//! Raw-vs-canonical alignment benchmark on synthetic scenes.
//!
//! For every (scene, mismatch) pair the base scene is generated, moved by
//! the mismatch (and optionally jittered), both copies go through the same
//! downsampling + canonicalization pipeline, and two symmetric Chamfer
//! distances are reported: between the moved and base clouds as they are
//! ("raw"), and between their canonical poses ("ppc").
//!
//! Scene coordinates are meters in a camera-like frame: `x` right, `y`
//! forward (away from the camera), `z` up. Mismatch amounts are in
//! millimeters or degrees and describe how the *camera* moves, so the points
//! move the opposite way. Chamfer values are reported in millimeters.

use std::path::Path;

use serde::Deserialize;

use crate::canonicalize::{canonicalize, centroid, DegeneracyThresholds, Verdict};
use crate::cloud::PointCloud;
use crate::downsample::{downsample_pipeline, fps_select, FpsParams, SeedRule, VoxelParams};
use crate::error::{PpcError, Result};
use crate::geometry::{add, RigidTransform, Vec3};
use crate::metrics::chamfer_fast;
use crate::report::{render, sanitize, thresholds_record, Record};
use crate::score::ScoreFunction;
use crate::synth::{generate, jitter, SceneKind, SceneSpec};

const MM_PER_M: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Back,
    Forward,
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    /// Unit displacement of the camera.
    fn camera_motion(self) -> Vec3 {
        match self {
            Direction::Back => [0.0, -1.0, 0.0],
            Direction::Forward => [0.0, 1.0, 0.0],
            Direction::Left => [-1.0, 0.0, 0.0],
            Direction::Right => [1.0, 0.0, 0.0],
            Direction::Up => [0.0, 0.0, 1.0],
            Direction::Down => [0.0, 0.0, -1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Cw,
    Ccw,
}

/// One camera-pose mismatch.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MismatchKind {
    /// Camera translates by `mm` millimeters.
    Shift { direction: Direction, mm: f64 },
    /// Camera yaws about the vertical axis through the origin.
    Rotate {
        degrees: f64,
        #[serde(default = "default_turn")]
        turn: Turn,
    },
    /// Camera circles the scene: rotation about the vertical axis through
    /// the scene centroid.
    Orbit {
        degrees: f64,
        #[serde(default = "default_turn")]
        turn: Turn,
    },
}

fn default_turn() -> Turn {
    Turn::Cw
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Mismatch {
    pub label: String,
    #[serde(flatten)]
    pub kind: MismatchKind,
}

impl Mismatch {
    pub fn shift(label: &str, direction: Direction, mm: f64) -> Self {
        Self {
            label: label.into(),
            kind: MismatchKind::Shift { direction, mm },
        }
    }

    pub fn rotate(label: &str, degrees: f64) -> Self {
        Self {
            label: label.into(),
            kind: MismatchKind::Rotate {
                degrees,
                turn: Turn::Cw,
            },
        }
    }

    /// The rigid motion applied to scene points.
    pub fn transform(&self, scene: &PointCloud) -> Result<RigidTransform> {
        let yaw = |degrees: f64, turn: Turn| {
            // a clockwise camera yaw (seen from above) turns the scene counter-clockwise
            let sign = match turn {
                Turn::Cw => 1.0,
                Turn::Ccw => -1.0,
            };
            sign * degrees.to_radians()
        };
        match &self.kind {
            MismatchKind::Shift { direction, mm } => {
                let d = direction.camera_motion();
                RigidTransform::from_translation(d.map(|v| -v * mm / MM_PER_M))
            }
            MismatchKind::Rotate { degrees, turn } => {
                RigidTransform::about_axis([0.0, 0.0, 1.0], yaw(*degrees, *turn), [0.0; 3])
            }
            MismatchKind::Orbit { degrees, turn } => {
                RigidTransform::about_axis([0.0, 0.0, 1.0], yaw(*degrees, *turn), centroid(scene)?)
            }
        }
    }
}

/// A scene entry: a synthetic scene placed at `offset` in front of the
/// camera.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchScene {
    pub label: String,
    pub kind: SceneKind,
    #[serde(default = "default_scene_points")]
    pub points: usize,
    pub scale: Option<Vec3>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub offset: Vec3,
}

fn default_scene_points() -> usize {
    2048
}

impl BenchScene {
    pub fn spec(&self) -> SceneSpec {
        SceneSpec {
            scale: self.scale.unwrap_or_else(|| self.kind.default_scale()),
            ..SceneSpec::new(self.kind, self.points, self.seed)
        }
    }

    pub fn build(&self) -> Result<PointCloud> {
        let base = generate(&self.spec())?;
        PointCloud::new(base.iter().map(|p| add(p, &self.offset)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub gap_rel_min: Option<f64>,
    pub phi_rel_min: Option<f64>,
    pub warn_factor: Option<f64>,
    pub eps_abs: Option<f64>,
}

/// Benchmark configuration, read from a TOML document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_phi")]
    pub phi: String,
    /// Voxel edge in meters; absent or 0 skips the voxel stage.
    #[serde(default)]
    pub voxel_size: Option<f64>,
    /// FPS target count; absent or 0 skips FPS.
    #[serde(default)]
    pub fps: Option<usize>,
    #[serde(default = "default_seed_rule")]
    pub seed_rule: String,
    /// Gaussian jitter (mm) added to the moved copy.
    #[serde(default)]
    pub jitter_mm: f64,
    /// Also report Chamfer distances on the clouds before downsampling.
    #[serde(default)]
    pub full: bool,
    #[serde(default)]
    pub thresholds: Option<ThresholdConfig>,
    #[serde(rename = "scene")]
    pub scenes: Vec<BenchScene>,
    #[serde(rename = "mismatch")]
    pub mismatches: Vec<Mismatch>,
}

fn default_trials() -> usize {
    1
}
fn default_phi() -> String {
    "sq".into()
}
fn default_seed_rule() -> String {
    "farthest".into()
}

impl BenchConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(src).map_err(|e| PpcError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => PpcError::FileNotFound(path.to_path_buf()),
            _ => PpcError::Io(e),
        })?;
        Self::from_toml(&src)
    }

    pub fn score(&self) -> Result<ScoreFunction> {
        self.phi
            .parse()
            .map_err(|e: PpcError| PpcError::Config(e.to_string()))
    }

    pub fn seed_rule(&self) -> Result<SeedRule> {
        self.seed_rule
            .parse()
            .map_err(|e: PpcError| PpcError::Config(e.to_string()))
    }

    pub fn effective_thresholds(&self) -> DegeneracyThresholds {
        let d = DegeneracyThresholds::default();
        match &self.thresholds {
            None => d,
            Some(t) => DegeneracyThresholds {
                gap_rel_min: t.gap_rel_min.unwrap_or(d.gap_rel_min),
                phi_rel_min: t.phi_rel_min.unwrap_or(d.phi_rel_min),
                warn_factor: t.warn_factor.unwrap_or(d.warn_factor),
                eps_abs: t.eps_abs.unwrap_or(d.eps_abs),
            },
        }
    }

    fn voxel(&self) -> Option<VoxelParams> {
        self.voxel_size
            .filter(|s| *s > 0.0)
            .map(|voxel_size| VoxelParams { voxel_size })
    }

    fn fps_target(&self) -> Option<usize> {
        self.fps.filter(|n| *n > 0)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(PpcError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.scenes.is_empty() || self.mismatches.is_empty() {
            return bad("config needs at least one [[scene]] and one [[mismatch]]".into());
        }
        self.score()?;
        self.seed_rule()?;
        if let Some(s) = self.voxel_size {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("voxel_size must be >= 0, got {s}"));
            }
        }
        if !(self.jitter_mm.is_finite() && self.jitter_mm >= 0.0) {
            return bad("jitter_mm must be >= 0".into());
        }
        self.effective_thresholds()
            .validate()
            .map_err(|e| PpcError::Config(e.to_string()))?;
        for s in &self.scenes {
            s.spec()
                .validate()
                .map_err(|e| PpcError::Config(format!("scene `{}`: {e}", s.label)))?;
        }
        for m in &self.mismatches {
            let amount = match m.kind {
                MismatchKind::Shift { mm, .. } => mm,
                MismatchKind::Rotate { degrees, .. } | MismatchKind::Orbit { degrees, .. } => degrees,
            };
            if !amount.is_finite() {
                return bad(format!("mismatch `{}` has a non-finite amount", m.label));
            }
        }
        Ok(())
    }

    /// The mismatch menu of the scene-1 real-world experiment: shifts of
    /// 50 mm back/right/up and clockwise yaws of 10° and 30°.
    pub fn default_mismatches() -> Vec<Mismatch> {
        vec![
            Mismatch::shift("back_50mm", Direction::Back, 50.0),
            Mismatch::shift("right_50mm", Direction::Right, 50.0),
            Mismatch::rotate("rotate_10deg_cw", 10.0),
            Mismatch::rotate("rotate_30deg_cw", 30.0),
            Mismatch::shift("up_50mm", Direction::Up, 50.0),
        ]
    }
}

/// Per-(scene, mismatch) result, averaged over trials. Distances in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scene: String,
    pub mismatch: String,
    pub raw_chamfer: f64,
    pub ppc_chamfer: f64,
    /// `raw / max(ppc, eps_abs)`.
    pub improvement_ratio: f64,
    pub raw_chamfer_full: Option<f64>,
    pub ppc_chamfer_full: Option<f64>,
    /// Worst verdict over every canonicalization in the row.
    pub verdict: Verdict,
    pub short_cloud: bool,
    pub points: usize,
    pub diameter_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSummary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); 0 for a single row.
    pub stddev: f64,
}

impl ColumnSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stddev: f64::NAN,
            };
        }
        let mean = crate::sum::compensated_sum(values.iter().copied()) / n as f64;
        let stddev = if n > 1 {
            let ss = crate::sum::compensated_sum(values.iter().map(|v| (v - mean).powi(2)));
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stddev }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    /// Scene label, or `all`.
    pub scope: String,
    pub rows: usize,
    pub raw: ColumnSummary,
    pub ppc: ColumnSummary,
    pub ratio: ColumnSummary,
    pub degenerate_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, scene: usize, mismatch: usize, trial: usize) -> u64 {
    mix(mix(mix(base ^ mix(scene as u64)) ^ mismatch as u64) ^ trial as u64)
}

struct Pipeline {
    voxel: Option<VoxelParams>,
    fps: Option<FpsParams>,
    score: ScoreFunction,
    thresholds: DegeneracyThresholds,
}

impl Pipeline {
    /// Downsampled cloud and whether the voxel stage left it short.
    fn downsample(&self, cloud: &PointCloud) -> Result<(PointCloud, bool)> {
        match (&self.voxel, &self.fps) {
            (Some(v), Some(f)) => {
                let d = downsample_pipeline(cloud, v, f)?;
                Ok((d.cloud, d.short_cloud))
            }
            (Some(v), None) => Ok((crate::downsample::voxel_downsample(cloud, v)?, false)),
            (None, Some(f)) => {
                if cloud.len() < f.target_count {
                    return Ok((cloud.clone(), true));
                }
                Ok((cloud.select(&fps_select(cloud, f)?)?, false))
            }
            (None, None) => Ok((cloud.clone(), false)),
        }
    }

    fn canonical(&self, cloud: &PointCloud) -> Result<(PointCloud, Verdict)> {
        let r = canonicalize(cloud, self.score, &self.thresholds)?;
        Ok((r.canonical, r.report.verdict))
    }
}

struct Trial {
    raw: f64,
    ppc: f64,
    raw_full: Option<f64>,
    ppc_full: Option<f64>,
    verdict: Verdict,
    short: bool,
    points: usize,
}

/// Runs every (scene, mismatch, trial) combination of `config`.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.check()?;
    let pipeline = Pipeline {
        voxel: config.voxel(),
        fps: match config.fps_target() {
            Some(n) => Some(FpsParams::new(n, config.seed_rule()?)?),
            None => None,
        },
        score: config.score()?,
        thresholds: config.effective_thresholds(),
    };
    let eps = pipeline.thresholds.eps_abs;

    let mut rows = Vec::new();
    for (si, scene) in config.scenes.iter().enumerate() {
        let base = scene.build()?;
        let diameter_mm = base.diameter() * MM_PER_M;
        let (base_ds, base_short) = pipeline.downsample(&base)?;
        let (base_canon, base_verdict) = pipeline.canonical(&base_ds)?;
        let base_full = if config.full {
            Some(pipeline.canonical(&base)?)
        } else {
            None
        };

        for (mi, mismatch) in config.mismatches.iter().enumerate() {
            let t = mismatch.transform(&base)?;
            let mut trials = Vec::with_capacity(config.trials);
            for k in 0..config.trials {
                let moved = jitter(
                    &base.transformed(&t),
                    config.jitter_mm / MM_PER_M,
                    trial_seed(config.seed, si, mi, k),
                )?;
                let (moved_ds, moved_short) = pipeline.downsample(&moved)?;
                let (moved_canon, moved_verdict) = pipeline.canonical(&moved_ds)?;
                let mut verdict = base_verdict.max(moved_verdict);

                let (raw_full, ppc_full) = match &base_full {
                    Some((base_full_canon, base_full_verdict)) => {
                        let (moved_full_canon, v) = pipeline.canonical(&moved)?;
                        verdict = verdict.max(v).max(*base_full_verdict);
                        (
                            Some(chamfer_fast(&moved, &base)?.value * MM_PER_M),
                            Some(chamfer_fast(&moved_full_canon, base_full_canon)?.value * MM_PER_M),
                        )
                    }
                    None => (None, None),
                };

                trials.push(Trial {
                    raw: chamfer_fast(&moved_ds, &base_ds)?.value * MM_PER_M,
                    ppc: chamfer_fast(&moved_canon, &base_canon)?.value * MM_PER_M,
                    raw_full,
                    ppc_full,
                    verdict,
                    short: base_short || moved_short,
                    points: moved_ds.len(),
                });
            }

            let mean = |f: &dyn Fn(&Trial) -> f64| {
                crate::sum::compensated_sum(trials.iter().map(f)) / trials.len() as f64
            };
            let raw = mean(&|t| t.raw);
            let ppc = mean(&|t| t.ppc);
            rows.push(BenchRow {
                scene: scene.label.clone(),
                mismatch: mismatch.label.clone(),
                raw_chamfer: raw,
                ppc_chamfer: ppc,
                improvement_ratio: raw / ppc.max(eps),
                raw_chamfer_full: base_full.as_ref().map(|_| mean(&|t| t.raw_full.unwrap())),
                ppc_chamfer_full: base_full.as_ref().map(|_| mean(&|t| t.ppc_full.unwrap())),
                verdict: trials.iter().map(|t| t.verdict).max().unwrap(),
                short_cloud: trials.iter().any(|t| t.short),
                points: trials[0].points,
                diameter_mm,
            });
        }
    }

    let mut summaries: Vec<BenchSummary> = config
        .scenes
        .iter()
        .map(|s| summarize(&s.label, rows.iter().filter(|r| r.scene == s.label)))
        .collect();
    if config.scenes.len() > 1 {
        summaries.push(summarize("all", rows.iter()));
    }

    Ok(BenchReport {
        config: config.clone(),
        rows,
        summaries,
    })
}

fn summarize<'a>(scope: &str, rows: impl Iterator<Item = &'a BenchRow>) -> BenchSummary {
    let rows: Vec<&BenchRow> = rows.collect();
    let col = |f: fn(&BenchRow) -> f64| ColumnSummary::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
    BenchSummary {
        scope: scope.into(),
        rows: rows.len(),
        raw: col(|r| r.raw_chamfer),
        ppc: col(|r| r.ppc_chamfer),
        ratio: col(|r| r.improvement_ratio),
        degenerate_rows: rows.iter().filter(|r| r.verdict == Verdict::Degenerate).count(),
    }
}

impl BenchReport {
    /// Config echo, one record per row, and the summaries.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut records = vec![Record::new("config")
            .text("seed", c.seed)
            .text("trials", c.trials)
            .text("phi", &c.phi)
            .float("voxel_size", c.voxel_size.unwrap_or(0.0))
            .text("fps", c.fps.unwrap_or(0))
            .text("seed_rule", &c.seed_rule)
            .float("jitter_mm", c.jitter_mm)
            .text("full", c.full)];
        records.push(thresholds_record(&c.effective_thresholds()));
        for s in &c.scenes {
            let spec = s.spec();
            records.push(
                Record::new("scene")
                    .text("label", &s.label)
                    .text("kind", format!("{:?}", s.kind))
                    .text("points", spec.point_count)
                    .floats("scale", &spec.scale)
                    .text("seed", spec.rng_seed)
                    .floats("offset", &s.offset),
            );
        }
        for m in &c.mismatches {
            let r = Record::new("mismatch").text("label", &m.label);
            records.push(match &m.kind {
                MismatchKind::Shift { direction, mm } => r
                    .text("kind", "shift")
                    .text("direction", format!("{direction:?}").to_lowercase())
                    .float("mm", *mm),
                MismatchKind::Rotate { degrees, turn } => r
                    .text("kind", "rotate")
                    .float("degrees", *degrees)
                    .text("turn", format!("{turn:?}").to_lowercase()),
                MismatchKind::Orbit { degrees, turn } => r
                    .text("kind", "orbit")
                    .float("degrees", *degrees)
                    .text("turn", format!("{turn:?}").to_lowercase()),
            });
        }
        for row in &self.rows {
            let mut r = Record::new("row")
                .text("scene", &row.scene)
                .text("mismatch", &row.mismatch)
                .float("raw_chamfer_mm", row.raw_chamfer)
                .float("ppc_chamfer_mm", row.ppc_chamfer)
                .float("improvement_ratio", row.improvement_ratio);
            if let (Some(rf), Some(pf)) = (row.raw_chamfer_full, row.ppc_chamfer_full) {
                r = r
                    .float("raw_chamfer_full_mm", rf)
                    .float("ppc_chamfer_full_mm", pf);
            }
            records.push(
                r.text("verdict", row.verdict)
                    .text("short_cloud", row.short_cloud)
                    .text("points", row.points)
                    .float("diameter_mm", row.diameter_mm),
            );
        }
        for s in &self.summaries {
            records.push(
                Record::new("summary")
                    .text("scope", &s.scope)
                    .text("rows", s.rows)
                    .float("raw_mean_mm", s.raw.mean)
                    .float("raw_std_mm", s.raw.stddev)
                    .float("ppc_mean_mm", s.ppc.mean)
                    .float("ppc_std_mm", s.ppc.stddev)
                    .float("ratio_mean", s.ratio.mean)
                    .float("ratio_std", s.ratio.stddev)
                    .text("degenerate_rows", s.degenerate_rows),
            );
        }
        render("ppc bench report", &records)
    }
}

/// Human-readable table in the layout of the paper-style summary.
pub fn format_table(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:<18} {:>12} {:>12} {:>9}  {}\n",
        "scene", "mismatch", "raw [mm]", "ppc [mm]", "ratio", "verdict"
    ));
    for r in &report.rows {
        out.push_str(&format!(
            "{:<16} {:<18} {:>12.4} {:>12.4} {:>9.1}  {}\n",
            sanitize(&r.scene),
            sanitize(&r.mismatch),
            r.raw_chamfer,
            r.ppc_chamfer,
            r.improvement_ratio,
            r.verdict
        ));
    }
    for s in &report.summaries {
        out.push_str(&format!(
            "{:<16} {:<18} {:>5.2} ± {:<5.2} {:>5.2} ± {:<5.2}\n",
            sanitize(&s.scope),
            "avg",
            s.raw.mean,
            s.raw.stddev,
            s.ppc.mean,
            s.ppc.stddev
        ));
    }
    out
}
