//! Small fixed-size linear algebra: 3-vectors, 3×3 matrices and rigid
//! transforms.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{PpcError, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm_sq(a: &Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    norm_sq(a).sqrt()
}

/// Squared Euclidean distance. Every nearest-neighbour and sampling routine
/// uses this exact expression so results agree bit-for-bit across code paths.
#[inline]
pub fn dist_sq(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn dist(a: &Vec3, b: &Vec3) -> f64 {
    dist_sq(a, b).sqrt()
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Row-major 3×3 matrix. `m[r][c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn from_cols(cols: [Vec3; 3]) -> Self {
        Mat3(cols).transpose()
    }

    pub fn diag(d: Vec3) -> Self {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn col(&self, c: usize) -> Vec3 {
        [self.0[0][c], self.0[1][c], self.0[2][c]]
    }

    pub fn row(&self, r: usize) -> Vec3 {
        self.0[r]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        [dot(&self.0[0], v), dot(&self.0[1], v), dot(&self.0[2], v)]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Mat3::ZERO)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖MᵀM − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.transpose() * *self).max_abs_diff(&Mat3::IDENTITY)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.0[r][c]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c] + self.0[r][2] * rhs.0[2][c];
            }
        }
        Mat3(out)
    }
}

/// Tolerance on `‖RᵀR − I‖_max` and `|det R − 1|` for a proper rotation.
pub const ROTATION_TOL: f64 = 1e-12;

/// Rotation `R ∈ SO(3)` plus translation `ι`. Points are row vectors and
/// transform as `x' = x Rᵀ + ιᵀ`, i.e. `p' = R p + ι` per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        if !rotation.is_finite() || translation.iter().any(|v| !v.is_finite()) {
            return Err(PpcError::InvalidParam("non-finite rigid transform".into()));
        }
        let deviation = rotation.orthonormality_error();
        if deviation > ROTATION_TOL {
            return Err(PpcError::NotOrthonormal { deviation });
        }
        let det = rotation.det();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(PpcError::InvalidParam(format!(
                "rotation determinant {det} is not +1"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::IDENTITY,
            translation: [0.0; 3],
        }
    }

    pub fn from_translation(translation: Vec3) -> Result<Self> {
        Self::new(Mat3::IDENTITY, translation)
    }

    pub fn from_rotation(rotation: Mat3) -> Result<Self> {
        Self::new(rotation, [0.0; 3])
    }

    /// Rotation by `angle` radians about a unit `axis` through `pivot`
    /// (right-handed, counter-clockwise looking down the axis).
    pub fn about_axis(axis: Vec3, angle: f64, pivot: Vec3) -> Result<Self> {
        let n = norm(&axis);
        if !n.is_finite() || n <= 0.0 {
            return Err(PpcError::InvalidParam("rotation axis must be non-zero".into()));
        }
        let [x, y, z] = scale(&axis, 1.0 / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let rotation = Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]);
        // p' = R (p - c) + c
        let translation = sub(&pivot, &rotation.mul_vec(&pivot));
        Self::new(rotation, translation)
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    #[inline]
    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        add(&self.rotation.mul_vec(p), &self.translation)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.apply_point(&first.translation),
        }
    }
}
