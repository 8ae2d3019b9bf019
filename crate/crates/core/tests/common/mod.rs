//! Independent reference implementations used by the integration tests.
//!
//! Each oracle is written directly from the definition, favouring
//! obviousness over speed, and shares no code with the library beyond the
//! plain data types.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use ppc::{Mat3, PointCloud, ScoreFunction, SeedRule, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn d2(a: &Vec3, b: &Vec3) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

pub fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn det(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Rotation from a random unit quaternion (Gaussian 4-vector, normalized).
pub fn random_rotation(rng: &mut ChaCha20Rng) -> [[f64; 3]; 3] {
    let q: [f64; 4] = std::array::from_fn(|_| gaussian(rng));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
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
    ]
}

/// Sample covariance by the two-pass textbook formula.
pub fn covariance(points: &[Vec3]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut mu = [0.0; 3];
    for p in points {
        for k in 0..3 {
            mu[k] += p[k] / n;
        }
    }
    let mut c = [[0.0; 3]; 3];
    for p in points {
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += (p[i] - mu[i]) * (p[j] - mu[j]);
            }
        }
    }
    c.map(|row| row.map(|v| v / (n - 1.0)))
}

/// Classical Jacobi: repeatedly annihilates the largest off-diagonal entry.
/// Returns eigenvalues in descending order and eigenvectors as columns.
pub fn jacobi(a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = a;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..200 {
        let (mut p, mut q) = (0, 1);
        for (i, j) in [(0, 2), (1, 2)] {
            if a[i][j].abs() > a[p][q].abs() {
                p = i;
                q = j;
            }
        }
        let scale: f64 = (0..3).map(|i| a[i][i].abs()).fold(0.0, f64::max);
        if a[p][q].abs() <= 1e-300 || a[p][q].abs() <= 1e-17 * scale {
            break;
        }
        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let t = if theta == 0.0 { 1.0 } else { t };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let mut j = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        j[p][p] = c;
        j[q][q] = c;
        j[p][q] = s;
        j[q][p] = -s;
        a = mat_mul(&transpose(&j), &mat_mul(&a, &j));
        v = mat_mul(&v, &j);
    }
    let mut order = [0, 1, 2];
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap());
    let values = order.map(|k| a[k][k]);
    let mut vectors = [[0.0; 3]; 3];
    for (col, &k) in order.iter().enumerate() {
        for r in 0..3 {
            vectors[r][col] = v[r][k];
        }
    }
    (values, vectors)
}

pub fn weight(kind: ScoreFunction, r: f64) -> f64 {
    match kind {
        ScoreFunction::Phi1Sq => r * r,
        ScoreFunction::Phi2Quartic => r.powi(4),
        ScoreFunction::Phi3Inverse => {
            if r < 1e-12 {
                0.0
            } else {
                1.0 / r
            }
        }
    }
}

/// `Σᵢ w(‖x̄ᵢ‖) · sign⟨x̄ᵢ, v⟩` by a plain loop; returns (value, Σ w).
pub fn score(v: &Vec3, centered: &[Vec3], kind: ScoreFunction) -> (f64, f64) {
    let mut value = 0.0;
    let mut total = 0.0;
    for p in centered {
        let w = weight(kind, d2(p, &[0.0; 3]).sqrt());
        let proj = p[0] * v[0] + p[1] * v[1] + p[2] * v[2];
        let s = if proj > 0.0 {
            1.0
        } else if proj < 0.0 {
            -1.0
        } else {
            0.0
        };
        value += w * s;
        total += w;
    }
    (value, total)
}

pub fn centered(points: &[Vec3]) -> Vec<Vec3> {
    let n = points.len() as f64;
    let mut mu = [0.0; 3];
    for p in points {
        for k in 0..3 {
            mu[k] += p[k];
        }
    }
    let mu = mu.map(|s| s / n);
    points
        .iter()
        .map(|p| [p[0] - mu[0], p[1] - mu[1], p[2] - mu[2]])
        .collect()
}

/// Tries all eight sign patterns on the columns of `e` and returns the
/// patterns with positive scores on the first two axes and determinant +1.
pub fn sign_assignments(e: &Mat3, centered: &[Vec3], kind: ScoreFunction) -> Vec<[i8; 3]> {
    let mut found = Vec::new();
    for mask in 0..8u8 {
        let s: [i8; 3] = std::array::from_fn(|k| if mask >> k & 1 == 1 { -1 } else { 1 });
        let mut m = e.0;
        for row in m.iter_mut() {
            for k in 0..3 {
                row[k] *= f64::from(s[k]);
            }
        }
        let axis = |k: usize| [m[0][k], m[1][k], m[2][k]];
        if score(&axis(0), centered, kind).0 > 0.0 && score(&axis(1), centered, kind).0 > 0.0 && det(&m) > 0.0
        {
            found.push(s);
        }
    }
    found
}

/// Greedy max-min selection recomputing every distance from scratch.
pub fn fps(points: &[Vec3], k: usize, rule: SeedRule) -> Vec<usize> {
    let first = match rule {
        SeedRule::FirstIndex => 0,
        SeedRule::FarthestFromCentroid => {
            let n = points.len() as f64;
            let mut mu = [0.0; 3];
            for p in points {
                for a in 0..3 {
                    mu[a] += p[a];
                }
            }
            let mu = mu.map(|s| s / n);
            let mut best = 0;
            for i in 1..points.len() {
                if d2(&points[i], &mu) > d2(&points[best], &mu) {
                    best = i;
                }
            }
            best
        }
    };
    let mut chosen = vec![first];
    while chosen.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            let m = chosen
                .iter()
                .map(|&j| d2(&points[i], &points[j]))
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((i, m));
            }
        }
        chosen.push(best.unwrap().0);
    }
    chosen
}

/// Groups points by voxel cell; per cell keeps the point nearest the cell
/// center (lowest index on ties). Returns sorted indices and the number of
/// occupied cells.
pub fn voxel(points: &[Vec3], size: f64) -> (Vec<usize>, usize) {
    let mut cells: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let key = p.map(|c| (c / size).floor() as i64);
        let center = key.map(|c| (c as f64 + 0.5) * size);
        cells
            .entry(key)
            .and_modify(|best| {
                if d2(p, &center) < d2(&points[*best], &center) {
                    *best = i;
                }
            })
            .or_insert(i);
    }
    let count = cells.len();
    let mut kept: Vec<usize> = cells.into_values().collect();
    kept.sort_unstable();
    (kept, count)
}

/// Symmetric Chamfer distance by exhaustive search.
pub fn chamfer(p: &[Vec3], q: &[Vec3]) -> f64 {
    let directed = |a: &[Vec3], b: &[Vec3]| {
        a.iter()
            .map(|x| b.iter().map(|y| d2(x, y)).fold(f64::INFINITY, f64::min).sqrt())
            .sum::<f64>()
            / a.len() as f64
    };
    0.5 * (directed(p, q) + directed(q, p))
}

/// Anisotropic Gaussian cloud with an off-center cluster; generated here so
/// that the tests do not depend on the library's generator.
pub fn asymmetric_cloud(rng: &mut ChaCha20Rng, n: usize) -> PointCloud {
    let scale = [3.0, 2.0, 1.0].map(|s: f64| s * rng.random_range(0.5..2.0));
    let pts = (0..n)
        .map(|i| {
            let mut p: Vec3 = std::array::from_fn(|k| gaussian(rng) * scale[k]);
            if i % 10 == 0 {
                p[0] += 2.0 * scale[0];
                p[1] += scale[1];
            }
            p
        })
        .collect();
    PointCloud::new(pts).unwrap()
}
