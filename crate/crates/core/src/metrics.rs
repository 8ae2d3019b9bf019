//! Alignment metrics.
//!
//! The symmetric Chamfer distance is `½ (mean_p min_q ‖p − q‖ + mean_q
//! min_p ‖q − p‖)` with plain (not squared) Euclidean distances. It is not a
//! metric: the triangle inequality does not hold in general.

use crate::cloud::PointCloud;
use crate::error::{PpcError, Result};
use crate::geometry::{dist, dist_sq, Mat3, Vec3};
use crate::sum::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamferResult {
    /// `(forward_mean + backward_mean) / 2`.
    pub value: f64,
    /// Mean over `p ∈ P` of the distance to the nearest `q ∈ Q`.
    pub forward_mean: f64,
    /// Mean over `q ∈ Q` of the distance to the nearest `p ∈ P`.
    pub backward_mean: f64,
}

impl ChamferResult {
    fn from_means(forward_mean: f64, backward_mean: f64) -> Self {
        Self {
            value: (forward_mean + backward_mean) / 2.0,
            forward_mean,
            backward_mean,
        }
    }
}

fn check_non_empty(p: &PointCloud, q: &PointCloud) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        return Err(PpcError::EmptyCloud);
    }
    Ok(())
}

fn mean_of_sqrt(min_sq: impl Iterator<Item = f64>, n: usize) -> f64 {
    compensated_sum(min_sq.map(f64::sqrt)) / n as f64
}

/// Exact `O(|P|·|Q|)` evaluation.
pub fn chamfer_brute(p: &PointCloud, q: &PointCloud) -> Result<ChamferResult> {
    check_non_empty(p, q)?;
    let nearest =
        |a: &Vec3, set: &PointCloud| set.iter().map(|b| dist_sq(a, b)).fold(f64::INFINITY, f64::min);
    let fwd = mean_of_sqrt(p.iter().map(|a| nearest(a, q)), p.len());
    let bwd = mean_of_sqrt(q.iter().map(|b| nearest(b, p)), q.len());
    Ok(ChamferResult::from_means(fwd, bwd))
}

/// Same value as [`chamfer_brute`], with exact nearest neighbours found
/// through a k-d tree.
pub fn chamfer_fast(p: &PointCloud, q: &PointCloud) -> Result<ChamferResult> {
    check_non_empty(p, q)?;
    let tree_q = KdTree::build(q.points());
    let tree_p = KdTree::build(p.points());
    let fwd = mean_of_sqrt(p.iter().map(|a| tree_q.nearest_dist_sq(a)), p.len());
    let bwd = mean_of_sqrt(q.iter().map(|b| tree_p.nearest_dist_sq(b)), q.len());
    Ok(ChamferResult::from_means(fwd, bwd))
}

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static k-d tree for exact nearest-neighbour distance queries.
///
/// Pruning compares the squared distance to the splitting plane against the
/// best squared distance so far with a strict `>`, so the reported minimum is
/// exactly the brute-force minimum.
#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [Vec3]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for k in 0..3 {
                lo[k] = lo[k].min(self.points[i][k]);
                hi[k] = hi[k].max(self.points[i][k]);
            }
        }
        let spread = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let mut axis = 0;
        for k in 1..3 {
            if spread[k] > spread[axis] {
                axis = k;
            }
        }
        axis
    }

    /// Squared distance from `q` to its nearest stored point
    /// (`+∞` for an empty tree).
    pub fn nearest_dist_sq(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = dist_sq(q, &self.points[i]);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Orthonormality tolerance for [`basis_distance`] inputs.
pub const BASIS_ORTHONORMAL_TOL: f64 = 1e-8;

/// `max |a − b|` entry-wise, for two orthonormal 3×3 matrices.
pub fn basis_distance(a: &Mat3, b: &Mat3) -> Result<f64> {
    for m in [a, b] {
        let deviation = m.orthonormality_error();
        if deviation.is_nan() || deviation > BASIS_ORTHONORMAL_TOL {
            return Err(PpcError::NotOrthonormal { deviation });
        }
    }
    Ok(a.max_abs_diff(b))
}

/// Clouds larger than this are checked on a sampled pair schedule.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 2048;
const SAMPLED_OFFSETS: usize = 1024;

/// Largest relative change `|d' − d| / d` of any pairwise distance between
/// corresponding rows of `before` and `after`.
///
/// Up to [`EXHAUSTIVE_PAIR_LIMIT`] rows every pair is checked. Above it,
/// row `i` is paired with rows `i + s mod n` for a fixed set of about a
/// thousand offsets `s` spread evenly over `1..n`.
pub fn distance_preservation(before: &PointCloud, after: &PointCloud) -> Result<f64> {
    if before.len() != after.len() {
        return Err(PpcError::RowCountMismatch {
            left: before.len(),
            right: after.len(),
        });
    }
    let a = before.points();
    let b = after.points();
    let n = a.len();
    let rel = |i: usize, j: usize| {
        let d0 = dist(&a[i], &a[j]);
        let d1 = dist(&b[i], &b[j]);
        if d0 > 0.0 {
            (d1 - d0).abs() / d0
        } else if d1 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };

    let mut worst = 0.0f64;
    if n <= EXHAUSTIVE_PAIR_LIMIT {
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(rel(i, j));
            }
        }
    } else {
        let mut offsets: Vec<usize> = (0..SAMPLED_OFFSETS)
            .map(|k| 1 + k * (n - 2) / (SAMPLED_OFFSETS - 1))
            .collect();
        offsets.dedup();
        for i in 0..n {
            for &s in &offsets {
                worst = worst.max(rel(i, (i + s) % n));
            }
        }
    }
    Ok(worst)
}
