//! Asymmetry scores used to pick eigenvector signs.
//!
//! Every score has the form `φ(v, x̄) = Σᵢ w(‖x̄(i)‖) · sign⟨x̄(i), v⟩` over a
//! centered cloud. Because only norms and the signs of inner products enter,
//! any such score is unchanged by translating the raw cloud, unchanged by
//! rotating cloud and direction together, and odd in `v`.

use std::fmt;
use std::str::FromStr;

use crate::cloud::PointCloud;
use crate::error::{PpcError, Result};
use crate::geometry::{dot, norm, norm_sq, Vec3};
use crate::sum::CompensatedSum;

/// How far `‖v‖` may stray from 1.
pub const UNIT_TOL: f64 = 1e-10;
/// Default radius below which points are skipped by [`ScoreFunction::Phi3Inverse`].
pub const DEFAULT_MIN_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScoreFunction {
    /// `w(r) = r²`
    #[default]
    Phi1Sq,
    /// `w(r) = r⁴`
    Phi2Quartic,
    /// `w(r) = 1/r`
    Phi3Inverse,
}

impl ScoreFunction {
    pub const ALL: [ScoreFunction; 3] = [
        ScoreFunction::Phi1Sq,
        ScoreFunction::Phi2Quartic,
        ScoreFunction::Phi3Inverse,
    ];

    /// Weight of a centered point, or `None` if it must be skipped.
    #[inline]
    pub fn weight(self, p: &Vec3, min_radius: f64) -> Option<f64> {
        let r2 = norm_sq(p);
        match self {
            ScoreFunction::Phi1Sq => Some(r2),
            ScoreFunction::Phi2Quartic => Some(r2 * r2),
            ScoreFunction::Phi3Inverse => {
                let r = r2.sqrt();
                (r >= min_radius).then(|| 1.0 / r)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreFunction::Phi1Sq => "sq",
            ScoreFunction::Phi2Quartic => "quartic",
            ScoreFunction::Phi3Inverse => "inverse",
        }
    }
}

impl fmt::Display for ScoreFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreFunction {
    type Err = PpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sq" | "phi1" => Ok(ScoreFunction::Phi1Sq),
            "quartic" | "phi2" => Ok(ScoreFunction::Phi2Quartic),
            "inverse" | "phi3" => Ok(ScoreFunction::Phi3Inverse),
            other => Err(PpcError::InvalidParam(format!(
                "unknown score function `{other}`"
            ))),
        }
    }
}

/// Value of a score together with the total weight it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub total_weight: f64,
}

impl Score {
    /// `|φ| / Σw`, in `[0, 1]`. Zero when there is no weight at all.
    pub fn margin(&self) -> f64 {
        if self.total_weight > 0.0 {
            self.value.abs() / self.total_weight
        } else {
            0.0
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `φ(v, x̄)` with the default skip radius.
pub fn score_phi(v: &Vec3, centered: &PointCloud, kind: ScoreFunction) -> Result<f64> {
    Ok(score_with(v, centered, kind, DEFAULT_MIN_RADIUS)?.value)
}

/// `φ(v, x̄)` and `Σw`, summed in row order. Points inside `min_radius` are
/// skipped for the inverse weight.
pub fn score_with(v: &Vec3, centered: &PointCloud, kind: ScoreFunction, min_radius: f64) -> Result<Score> {
    let n = norm(v);
    if n.is_nan() || (n - 1.0).abs() > UNIT_TOL {
        return Err(PpcError::NonUnitVector { norm: n });
    }
    let mut value = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for p in centered {
        if let Some(w) = kind.weight(p, min_radius) {
            value.add(w * sign(dot(p, v)));
            total.add(w);
        }
    }
    Ok(Score {
        value: value.value(),
        total_weight: total.value(),
    })
}

/// Convenience wrapper that centers `cloud` before scoring.
pub fn score_phi_raw(v: &Vec3, cloud: &PointCloud, kind: ScoreFunction) -> Result<f64> {
    let (centered, _) = crate::canonicalize::center(cloud)?;
    score_phi(v, &centered, kind)
}
