//! Deterministic synthetic clouds and rigid motions.
//!
//! Every generator is a pure function of its inputs. Randomness comes from
//! `ChaCha20Rng::seed_from_u64(seed)` (rand_chacha 0.9), normal variates from
//! `rand_distr::StandardNormal` and uniform variates from `Rng::random`. Both
//! crates guarantee value stability for a fixed seed across platforms, so a
//! seed identifies the same cloud everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{PpcError, Result};
use crate::geometry::{norm, Mat3, RigidTransform, Vec3};

/// Fraction of GAUSSIAN_ANISO points pushed along `+e₁` to break the mirror
/// symmetry of a centered Gaussian.
pub const OFFSET_CLUSTER_FRACTION: f64 = 0.05;
/// Displacement of the offset cluster, in units of the first axis scale.
pub const OFFSET_CLUSTER_SHIFT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    /// Axis-scaled normal samples plus a small cluster offset along `+x`.
    GaussianAniso,
    /// Uniform directions scaled onto an ellipsoid surface.
    EllipsoidShell,
    /// 2–5 blobs resting on the `z = 0` plane, like objects on a table with
    /// the background removed.
    TabletopClusters,
    /// The 8 corners `(±s₁, ±s₂, ±s₃)`.
    CubeCorners,
    /// Gaussian samples emitted in pairs mirrored across the plane normal to
    /// `mirror_axis`.
    MirrorSymmetric,
    /// Uniform samples on the `z = 0` rectangle `[-s₁, s₁] × [-s₂, s₂]`.
    Plane,
}

impl SceneKind {
    pub fn default_scale(self) -> Vec3 {
        match self {
            SceneKind::TabletopClusters => [0.3, 0.2, 0.1],
            SceneKind::CubeCorners => [1.0, 1.0, 1.0],
            _ => [3.0, 2.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub kind: SceneKind,
    /// Ignored for `CubeCorners`, which always has 8 points.
    #[serde(default = "default_point_count", alias = "points")]
    pub point_count: usize,
    pub scale: Vec3,
    #[serde(alias = "seed")]
    pub rng_seed: u64,
    /// Isotropic Gaussian jitter added to `TabletopClusters` points.
    #[serde(default)]
    pub jitter_sigma: f64,
    /// Axis (0 = x, 1 = y, 2 = z) normal to the mirror plane of
    /// `MirrorSymmetric`.
    #[serde(default)]
    pub mirror_axis: usize,
}

fn default_point_count() -> usize {
    512
}

impl SceneSpec {
    pub fn new(kind: SceneKind, point_count: usize, rng_seed: u64) -> Self {
        Self {
            kind,
            point_count,
            scale: kind.default_scale(),
            rng_seed,
            jitter_sigma: 0.0,
            mirror_axis: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != SceneKind::CubeCorners && self.point_count < 3 {
            return Err(PpcError::InvalidSpec(format!(
                "point_count must be at least 3, got {}",
                self.point_count
            )));
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(PpcError::InvalidSpec("scales must be finite and positive".into()));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(PpcError::InvalidSpec(
                "jitter_sigma must be finite and >= 0".into(),
            ));
        }
        if self.mirror_axis > 2 {
            return Err(PpcError::InvalidSpec("mirror_axis must be 0, 1 or 2".into()));
        }
        Ok(())
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normal3(rng: &mut impl Rng) -> Vec3 {
    [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ]
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Builds the cloud described by `spec`.
pub fn generate(spec: &SceneSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.rng_seed);
    let s = spec.scale;
    let n = spec.point_count;
    let points = match spec.kind {
        SceneKind::GaussianAniso => {
            let offset = offset_cluster_len(n);
            (0..n)
                .map(|i| {
                    let g = normal3(&mut rng);
                    let mut p = [s[0] * g[0], s[1] * g[1], s[2] * g[2]];
                    if i < offset {
                        p[0] += OFFSET_CLUSTER_SHIFT * s[0];
                    }
                    p
                })
                .collect()
        }
        SceneKind::EllipsoidShell => (0..n)
            .map(|_| loop {
                let g = normal3(&mut rng);
                let r = norm(&g);
                if r > 1e-9 {
                    break [s[0] * g[0] / r, s[1] * g[1] / r, s[2] * g[2] / r];
                }
            })
            .collect(),
        SceneKind::TabletopClusters => tabletop(&mut rng, spec),
        SceneKind::CubeCorners => {
            let mut pts = Vec::with_capacity(8);
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        pts.push([sx * s[0], sy * s[1], sz * s[2]]);
                    }
                }
            }
            pts
        }
        SceneKind::MirrorSymmetric => {
            let axis = spec.mirror_axis;
            // offset cluster along the next axis keeps that axis's score non-zero
            let along = (axis + 1) % 3;
            let offset = offset_cluster_len(n / 2);
            let mut pts = Vec::with_capacity(n);
            for i in 0..n / 2 {
                let g = normal3(&mut rng);
                let mut p = [s[0] * g[0], s[1] * g[1], s[2] * g[2]];
                if i < offset {
                    p[along] += OFFSET_CLUSTER_SHIFT * s[along];
                }
                let mut mirrored = p;
                mirrored[axis] = -p[axis];
                pts.push(p);
                pts.push(mirrored);
            }
            if n % 2 == 1 {
                let g = normal3(&mut rng);
                let mut p = [s[0] * g[0], s[1] * g[1], s[2] * g[2]];
                p[axis] = 0.0;
                pts.push(p);
            }
            pts
        }
        SceneKind::Plane => (0..n)
            .map(|_| {
                [
                    uniform(&mut rng, -s[0], s[0]),
                    uniform(&mut rng, -s[1], s[1]),
                    0.0,
                ]
            })
            .collect(),
    };
    PointCloud::new(points)
}

fn offset_cluster_len(n: usize) -> usize {
    ((n as f64 * OFFSET_CLUSTER_FRACTION).round() as usize).max(1)
}

/// Blobs on a table: cluster count in 2..=5, centers uniform over
/// `[-s₁, s₁] × [-s₂, s₂]`, unequal point shares, anisotropic footprints and
/// heights up to `s₃`. All points have `z ≥ 0` before jitter.
fn tabletop(rng: &mut ChaCha20Rng, spec: &SceneSpec) -> Vec<Vec3> {
    let s = spec.scale;
    let n = spec.point_count;
    let clusters = 2 + (rng.random::<u32>() % 4) as usize;
    let footprint = s[0].min(s[1]);

    struct Blob {
        center: [f64; 2],
        radius: [f64; 2],
        height: f64,
        share: f64,
    }
    let blobs: Vec<Blob> = (0..clusters)
        .map(|_| Blob {
            center: [uniform(rng, -s[0], s[0]), uniform(rng, -s[1], s[1])],
            radius: [
                uniform(rng, 0.1, 0.35) * footprint,
                uniform(rng, 0.1, 0.35) * footprint,
            ],
            height: uniform(rng, 0.3, 1.0) * s[2],
            share: uniform(rng, 0.5, 2.0),
        })
        .collect();

    let total_share: f64 = blobs.iter().map(|b| b.share).sum();
    let mut counts: Vec<usize> = blobs
        .iter()
        .map(|b| ((b.share / total_share) * n as f64).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    counts[0] += n - assigned;

    let mut pts = Vec::with_capacity(n);
    for (blob, &count) in blobs.iter().zip(&counts) {
        for _ in 0..count {
            let g = normal3(rng);
            pts.push([
                blob.center[0] + blob.radius[0] * g[0],
                blob.center[1] + blob.radius[1] * g[1],
                blob.height * (0.5 * g[2].abs()).min(1.0),
            ]);
        }
    }
    if spec.jitter_sigma > 0.0 {
        jitter_in_place(rng, &mut pts, spec.jitter_sigma);
    }
    pts
}

fn jitter_in_place(rng: &mut impl Rng, pts: &mut [Vec3], sigma: f64) {
    for p in pts {
        let g = normal3(rng);
        for k in 0..3 {
            p[k] += sigma * g[k];
        }
    }
}

/// Adds isotropic Gaussian noise of standard deviation `sigma` to every
/// coordinate, drawing from a generator seeded with `seed`.
pub fn jitter(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(PpcError::InvalidParam(
            "jitter sigma must be finite and >= 0".into(),
        ));
    }
    let mut pts = cloud.points().to_vec();
    if sigma > 0.0 {
        jitter_in_place(&mut rng_from_seed(seed), &mut pts, sigma);
    }
    PointCloud::new(pts)
}

/// Haar-uniform rotation from a normalized 4D Gaussian quaternion.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let (w, x, y, z) = loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n > 1e-12 {
            break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    };
    Mat3([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// Haar-uniform rotation for a fixed seed.
pub fn sample_rotation(rng_seed: u64) -> RigidTransform {
    let r = random_rotation(&mut rng_from_seed(rng_seed));
    RigidTransform::from_rotation(r).expect("quaternion rotation is orthonormal")
}

/// Uniform random rotation plus a translation drawn uniformly from the ball
/// of radius `max_translation`.
pub fn random_rigid(rng: &mut impl Rng, max_translation: f64) -> RigidTransform {
    let rotation = random_rotation(rng);
    let dir = loop {
        let g = normal3(rng);
        let n = norm(&g);
        if n > 1e-12 {
            break [g[0] / n, g[1] / n, g[2] / n];
        }
    };
    let radius = max_translation * rng.random::<f64>().cbrt();
    RigidTransform::new(rotation, dir.map(|d| d * radius)).expect("quaternion rotation is orthonormal")
}

/// `x Rᵀ + 1ₙ ιᵀ`, row order preserved.
pub fn apply_rigid(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    cloud.transformed(t)
}
