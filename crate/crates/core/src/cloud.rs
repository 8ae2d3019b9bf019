use crate::error::{PpcError, Result};
use crate::geometry::{dist_sq, RigidTransform, Vec3};

/// An ordered set of `n ≥ 1` finite 3D points, one row per point.
///
/// Row order is meaningful: every operation that does not resample keeps
/// row `i` of the output tied to row `i` of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

/// Checks the cloud invariants: at least one row, every coordinate finite.
pub fn validate_cloud(points: &[Vec3]) -> Result<()> {
    if points.is_empty() {
        return Err(PpcError::EmptyCloud);
    }
    if let Some(row) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(PpcError::NonFiniteCoordinate { row });
    }
    Ok(())
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        validate_cloud(&points)?;
        Ok(Self { points })
    }

    /// Builds a cloud from a flat `[x0, y0, z0, x1, ...]` buffer.
    pub fn from_flat(xyz: &[f64]) -> Result<Self> {
        if !xyz.len().is_multiple_of(3) {
            return Err(PpcError::InvalidParam(format!(
                "flat buffer length {} is not a multiple of 3",
                xyz.len()
            )));
        }
        Self::new(xyz.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Re-checks the invariants. Idempotent.
    pub fn validate(self) -> Result<Self> {
        validate_cloud(&self.points)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(PpcError::EmptyCloud);
        }
        let points = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .copied()
                    .ok_or_else(|| PpcError::InvalidParam(format!("row index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    /// Applies `x' = x Rᵀ + 1ₙ ιᵀ` row by row.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            points: self.points.iter().map(|p| t.apply_point(p)).collect(),
        }
    }

    /// Maximum pairwise Euclidean distance (exact, O(n²)).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max(dist_sq(a, b));
            }
        }
        best.sqrt()
    }

    /// Largest coordinate-wise deviation between two clouds of equal length.
    pub fn max_row_deviation(&self, other: &PointCloud) -> Result<f64> {
        if self.len() != other.len() {
            return Err(PpcError::RowCountMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| dist_sq(a, b).sqrt())
            .fold(0.0, f64::max))
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Vec3;
    type IntoIter = std::slice::Iter<'a, Vec3>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

impl TryFrom<Vec<Vec3>> for PointCloud {
    type Error = PpcError;
    fn try_from(points: Vec<Vec3>) -> Result<Self> {
        Self::new(points)
    }
}
