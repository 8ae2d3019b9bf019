//! Two-stage downsampling: voxel thinning followed by farthest point
//! sampling to an exact point count.
//!
//! Both stages select existing rows; no coordinates are averaged or
//! otherwise recomputed, so every output point is bit-identical to some
//! input point.

use std::collections::HashMap;
use std::str::FromStr;

use crate::canonicalize::centroid;
use crate::cloud::PointCloud;
use crate::error::{PpcError, Result};
use crate::geometry::{dist_sq, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelParams {
    pub voxel_size: f64,
}

impl VoxelParams {
    pub fn new(voxel_size: f64) -> Result<Self> {
        let p = Self { voxel_size };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.voxel_size.is_finite() && self.voxel_size > 0.0 {
            Ok(())
        } else {
            Err(PpcError::InvalidParam(format!(
                "voxel size must be finite and positive, got {}",
                self.voxel_size
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SeedRule {
    /// Start from input row 0.
    FirstIndex,
    /// Start from the point farthest from the centroid. Unlike
    /// `FirstIndex`, the selected index sequence does not depend on the
    /// pose of the cloud.
    #[default]
    FarthestFromCentroid,
}

impl FromStr for SeedRule {
    type Err = PpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "first-index" => Ok(SeedRule::FirstIndex),
            "farthest" | "farthest-from-centroid" => Ok(SeedRule::FarthestFromCentroid),
            other => Err(PpcError::InvalidParam(format!("unknown FPS seed rule `{other}`"))),
        }
    }
}

impl SeedRule {
    pub fn name(self) -> &'static str {
        match self {
            SeedRule::FirstIndex => "first-index",
            SeedRule::FarthestFromCentroid => "farthest-from-centroid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpsParams {
    pub target_count: usize,
    pub seed_rule: SeedRule,
}

impl FpsParams {
    pub fn new(target_count: usize, seed_rule: SeedRule) -> Result<Self> {
        if target_count == 0 {
            return Err(PpcError::InvalidParam(
                "FPS target count must be at least 1".into(),
            ));
        }
        Ok(Self {
            target_count,
            seed_rule,
        })
    }
}

/// Voxel index `(⌊x/s⌋, ⌊y/s⌋, ⌊z/s⌋)` on raw coordinates.
#[inline]
pub fn voxel_index(p: &Vec3, voxel_size: f64) -> [i64; 3] {
    [
        (p[0] / voxel_size).floor() as i64,
        (p[1] / voxel_size).floor() as i64,
        (p[2] / voxel_size).floor() as i64,
    ]
}

/// Row indices kept by [`voxel_downsample`], ascending.
pub fn voxel_select(cloud: &PointCloud, params: &VoxelParams) -> Result<Vec<usize>> {
    params.validate()?;
    let s = params.voxel_size;
    // cell -> (kept row, squared distance to the cell center)
    let mut cells: HashMap<[i64; 3], (usize, f64)> = HashMap::new();
    for (i, p) in cloud.iter().enumerate() {
        let cell = voxel_index(p, s);
        let center = cell.map(|c| (c as f64 + 0.5) * s);
        let d = dist_sq(p, &center);
        cells
            .entry(cell)
            .and_modify(|best| {
                // rows arrive in ascending order, so `<` keeps the lowest index on ties
                if d < best.1 {
                    *best = (i, d);
                }
            })
            .or_insert((i, d));
    }
    let mut kept: Vec<usize> = cells.into_values().map(|(i, _)| i).collect();
    kept.sort_unstable();
    Ok(kept)
}

/// Keeps one input point per occupied voxel: the one nearest the voxel
/// center, lowest row index on ties. Output rows follow input order.
pub fn voxel_downsample(cloud: &PointCloud, params: &VoxelParams) -> Result<PointCloud> {
    cloud.select(&voxel_select(cloud, params)?)
}

/// Row indices chosen by [`farthest_point_sample`], in selection order.
pub fn fps_select(cloud: &PointCloud, params: &FpsParams) -> Result<Vec<usize>> {
    let points = cloud.points();
    let n = points.len();
    if n == 0 {
        return Err(PpcError::EmptyCloud);
    }
    let k = params.target_count;
    if k == 0 {
        return Err(PpcError::InvalidParam(
            "FPS target count must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(PpcError::TargetExceedsCloud {
            target: k,
            available: n,
        });
    }

    let seed = match params.seed_rule {
        SeedRule::FirstIndex => 0,
        SeedRule::FarthestFromCentroid => {
            let mu = centroid(cloud)?;
            argmax(points.iter().map(|p| dist_sq(p, &mu)))
        }
    };

    let mut selected = Vec::with_capacity(k);
    // squared distance to the selected set; -1 marks rows already taken
    let mut min_d = vec![f64::INFINITY; n];
    let mut current = seed;
    loop {
        selected.push(current);
        min_d[current] = -1.0;
        if selected.len() == k {
            break;
        }
        let anchor = &points[current];
        for (d, p) in min_d.iter_mut().zip(points) {
            if *d >= 0.0 {
                let nd = dist_sq(p, anchor);
                if nd < *d {
                    *d = nd;
                }
            }
        }
        current = argmax(min_d.iter().copied());
    }
    Ok(selected)
}

/// First index of the maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Greedy max-min selection of exactly `target_count` input points.
pub fn farthest_point_sample(cloud: &PointCloud, params: &FpsParams) -> Result<PointCloud> {
    cloud.select(&fps_select(cloud, params)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled {
    pub cloud: PointCloud,
    /// Input row of each output row.
    pub indices: Vec<usize>,
    /// The voxel stage left fewer points than requested; FPS was skipped and
    /// the voxel output returned as is.
    pub short_cloud: bool,
}

/// Voxel thinning then FPS.
pub fn downsample_pipeline(cloud: &PointCloud, voxel: &VoxelParams, fps: &FpsParams) -> Result<Downsampled> {
    let voxel_rows = voxel_select(cloud, voxel)?;
    let thinned = cloud.select(&voxel_rows)?;
    if thinned.len() < fps.target_count {
        log::warn!(
            "voxel stage kept {} points, fewer than the {} requested; skipping FPS",
            thinned.len(),
            fps.target_count
        );
        return Ok(Downsampled {
            cloud: thinned,
            indices: voxel_rows,
            short_cloud: true,
        });
    }
    let picked = fps_select(&thinned, fps)?;
    let indices: Vec<usize> = picked.iter().map(|&i| voxel_rows[i]).collect();
    Ok(Downsampled {
        cloud: thinned.select(&picked)?,
        indices,
        short_cloud: false,
    })
}
