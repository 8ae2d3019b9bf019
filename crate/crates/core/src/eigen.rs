//! Symmetric 3×3 eigendecomposition by cyclic Jacobi rotations.

use crate::error::{PpcError, Result};
use crate::geometry::{Mat3, Vec3};

/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `OFF_DIAGONAL_RTOL · ‖A‖_F`.
pub const OFF_DIAGONAL_RTOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 50;
/// Allowed `max|A − Aᵀ|`, relative to `max(1, max|A|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_CLAMP, 0)` are round-off and are clamped to 0.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Eigenvalues in descending order with matching unit eigenvector columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec3,
    /// Columns are `e₁, e₂, e₃`.
    pub basis: Mat3,
}

impl EigenResult {
    /// `(λ₁ − λ₂, λ₂ − λ₃)`.
    pub fn spectral_gaps(&self) -> [f64; 2] {
        let l = &self.eigenvalues;
        [l[0] - l[1], l[1] - l[2]]
    }

    pub fn eigenvector(&self, k: usize) -> Vec3 {
        self.basis.col(k)
    }
}

/// Decomposes a symmetric matrix as `E Λ Eᵀ` with `λ₁ ≥ λ₂ ≥ λ₃`.
///
/// The input is symmetrized as `(A + Aᵀ)/2` first. Eigenvector signs are
/// normalized so the largest-magnitude component of each column is
/// positive (first such component on ties); the caller is expected to
/// disambiguate signs itself if it cares about them.
pub fn eig3_sym(sigma: &Mat3) -> Result<EigenResult> {
    if !sigma.is_finite() {
        return Err(PpcError::InvalidParam("matrix has non-finite entries".into()));
    }
    let asymmetry = sigma.max_abs_diff(&sigma.transpose());
    if asymmetry > SYMMETRY_TOL * sigma.max_abs().max(1.0) {
        return Err(PpcError::NotSymmetric { asymmetry });
    }

    let mut a = *sigma;
    for r in 0..3 {
        for c in (r + 1)..3 {
            let m = 0.5 * (a[(r, c)] + a[(c, r)]);
            a[(r, c)] = m;
            a[(c, r)] = m;
        }
    }

    let mut v = Mat3::IDENTITY;
    let scale = a.frobenius();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off = (2.0 * (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2))).sqrt();
            if off <= OFF_DIAGONAL_RTOL * scale {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let raw = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
    // stable: equal eigenvalues keep their solver order
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));

    let mut eigenvalues = [0.0; 3];
    let mut cols = [[0.0; 3]; 3];
    for (k, &src) in order.iter().enumerate() {
        let mut lambda = raw[src];
        if (-NEGATIVE_CLAMP..0.0).contains(&lambda) {
            lambda = 0.0;
        }
        eigenvalues[k] = lambda;
        cols[k] = normalize_sign(v.col(src));
    }

    Ok(EigenResult {
        eigenvalues,
        basis: Mat3::from_cols(cols),
    })
}

/// One Jacobi rotation zeroing `a[p][q]`: `A ← Jᵀ A J`, `V ← V J`.
fn rotate(a: &mut Mat3, v: &mut Mat3, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + tau.hypot(1.0))
    } else {
        -1.0 / (-tau + tau.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    for k in 0..3 {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..3 {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..3 {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn normalize_sign(col: Vec3) -> Vec3 {
    let mut lead = 0;
    for k in 1..3 {
        if col[k].abs() > col[lead].abs() {
            lead = k;
        }
    }
    if col[lead] < 0.0 {
        [-col[0], -col[1], -col[2]]
    } else {
        col
    }
}
