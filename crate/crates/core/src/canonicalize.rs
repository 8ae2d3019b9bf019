//! PCA canonicalization with asymmetry-score sign disambiguation.
//!
//! The map takes a cloud `x` to `x̄ Ê(x̄)`, where `x̄` is the centered cloud
//! and `Ê` is the covariance eigenbasis (eigenvalues descending) with the
//! first two axis signs fixed by an asymmetry score and the third chosen so
//! that `det Ê = +1`. On inputs with a simple spectrum and non-vanishing
//! scores on the first two axes the result is invariant under any rigid
//! motion of `x`.

use std::fmt;

use crate::cloud::PointCloud;
use crate::eigen::{eig3_sym, EigenResult};
use crate::error::{PpcError, Result};
use crate::geometry::{dot, sub, Mat3, Vec3};
use crate::score::{score_with, ScoreFunction};
use crate::sum::CompensatedSum;

/// `μ(x) = (1/n) Σᵢ x(i)`.
pub fn centroid(cloud: &PointCloud) -> Result<Vec3> {
    if cloud.is_empty() {
        return Err(PpcError::EmptyCloud);
    }
    let mut acc = [CompensatedSum::new(); 3];
    for p in cloud {
        for k in 0..3 {
            acc[k].add(p[k]);
        }
    }
    let n = cloud.len() as f64;
    Ok([acc[0].value() / n, acc[1].value() / n, acc[2].value() / n])
}

/// Subtracts the centroid from every row. Returns the centered cloud and the
/// centroid that was removed.
pub fn center(cloud: &PointCloud) -> Result<(PointCloud, Vec3)> {
    let mu = centroid(cloud)?;
    let points = cloud.iter().map(|p| sub(p, &mu)).collect();
    Ok((PointCloud::new(points)?, mu))
}

/// `Σ = x̄ᵀ x̄ / (n − 1)` of an already-centered cloud.
pub fn covariance(centered: &PointCloud) -> Result<Mat3> {
    let n = centered.len();
    if n < 2 {
        return Err(PpcError::InsufficientPoints { needed: 2, got: n });
    }
    let mut acc = [[CompensatedSum::new(); 3]; 3];
    for p in centered {
        for r in 0..3 {
            for c in r..3 {
                acc[r][c].add(p[r] * p[c]);
            }
        }
    }
    let denom = (n - 1) as f64;
    let mut sigma = Mat3::ZERO;
    for r in 0..3 {
        for c in r..3 {
            let v = acc[r][c].value() / denom;
            sigma[(r, c)] = v;
            sigma[(c, r)] = v;
        }
    }
    Ok(sigma)
}

/// Thresholds that classify a cloud as degenerate for canonicalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyThresholds {
    /// Minimum `(λₖ − λₖ₊₁) / max(λ₁, eps_abs)` for a simple spectrum.
    pub gap_rel_min: f64,
    /// Minimum `|φ(eₖ, x̄)| / Σᵢ w(‖x̄(i)‖)` on the first two axes.
    pub phi_rel_min: f64,
    /// Margins below `warn_factor ×` their minimum yield `NearDegenerate`.
    pub warn_factor: f64,
    pub eps_abs: f64,
}

impl Default for DegeneracyThresholds {
    fn default() -> Self {
        Self {
            gap_rel_min: 1e-6,
            phi_rel_min: 1e-6,
            warn_factor: 100.0,
            eps_abs: 1e-12,
        }
    }
}

impl DegeneracyThresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [self.gap_rel_min, self.phi_rel_min, self.warn_factor, self.eps_abs];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PpcError::InvalidParam(
                "degeneracy thresholds must be finite and strictly positive".into(),
            ));
        }
        if self.warn_factor < 1.0 {
            return Err(PpcError::InvalidParam("warn_factor must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Ok,
    NearDegenerate,
    Degenerate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ok => "OK",
            Verdict::NearDegenerate => "NEAR_DEGENERATE",
            Verdict::Degenerate => "DEGENERATE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyReport {
    pub spectrum_simple: bool,
    pub gap_ratio_12: f64,
    pub gap_ratio_23: f64,
    pub phi_nondegenerate: bool,
    pub phi_margin_1: f64,
    pub phi_margin_2: f64,
    pub verdict: Verdict,
}

impl DegeneracyReport {
    fn new(eig: &EigenResult, phi_margins: [f64; 2], t: &DegeneracyThresholds) -> Self {
        let [gap12, gap23] = eig.spectral_gaps();
        let scale = eig.eigenvalues[0].max(t.eps_abs);
        let gap_ratio_12 = gap12 / scale;
        let gap_ratio_23 = gap23 / scale;
        let spectrum_simple = gap_ratio_12 >= t.gap_rel_min && gap_ratio_23 >= t.gap_rel_min;
        let phi_nondegenerate = phi_margins.iter().all(|m| *m >= t.phi_rel_min);

        let verdict = if !spectrum_simple || !phi_nondegenerate {
            Verdict::Degenerate
        } else if gap_ratio_12.min(gap_ratio_23) < t.warn_factor * t.gap_rel_min
            || phi_margins[0].min(phi_margins[1]) < t.warn_factor * t.phi_rel_min
        {
            Verdict::NearDegenerate
        } else {
            Verdict::Ok
        };

        Self {
            spectrum_simple,
            gap_ratio_12,
            gap_ratio_23,
            phi_nondegenerate,
            phi_margin_1: phi_margins[0],
            phi_margin_2: phi_margins[1],
            verdict,
        }
    }
}

/// Output of [`disambiguate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disambiguation {
    /// `Ê = E · diag(σ₁, σ₂, σ₃⁺)`.
    pub basis: Mat3,
    pub signs: [i8; 3],
    /// `(φ(e₁, x̄), φ(e₂, x̄))` for the solver's eigenvectors.
    pub phi_values: [f64; 2],
    pub report: DegeneracyReport,
}

/// Fixes eigenvector signs: `σₖ = sign φ(eₖ, x̄)` for `k = 1, 2` and
/// `σ₃⁺ = sign(det E) · σ₁ · σ₂`.
///
/// A vanished score falls back to `σ = +1`; the report then carries a
/// `Degenerate` verdict and the result is not guaranteed to be invariant.
pub fn disambiguate(
    eig: &EigenResult,
    centered: &PointCloud,
    kind: ScoreFunction,
    thresholds: &DegeneracyThresholds,
) -> Result<Disambiguation> {
    thresholds.validate()?;
    let mut phi_values = [0.0; 2];
    let mut margins = [0.0; 2];
    let mut signs = [1i8; 3];
    for k in 0..2 {
        let score = score_with(&eig.eigenvector(k), centered, kind, thresholds.eps_abs)?;
        phi_values[k] = score.value;
        margins[k] = score.margin();
        signs[k] = if score.value < 0.0 { -1 } else { 1 };
    }
    let det_sign: i8 = if eig.basis.det() < 0.0 { -1 } else { 1 };
    signs[2] = det_sign * signs[0] * signs[1];

    let basis = eig.basis * Mat3::diag(signs.map(f64::from));
    Ok(Disambiguation {
        basis,
        signs,
        phi_values,
        report: DegeneracyReport::new(eig, margins, thresholds),
    })
}

/// Everything produced while canonicalizing one cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalResult {
    /// `x̄ Ê`, same row order as the input.
    pub canonical: PointCloud,
    /// Disambiguated basis `Ê ∈ SO(3)`, one axis per column.
    pub basis: Mat3,
    pub centroid: Vec3,
    pub signs: [i8; 3],
    pub phi_values: [f64; 2],
    pub gaps: [f64; 2],
    /// Eigendecomposition before sign disambiguation.
    pub eigen: EigenResult,
    pub report: DegeneracyReport,
}

/// Minimum cloud size accepted by [`canonicalize`] and [`degeneracy_check`].
pub const MIN_CANONICAL_POINTS: usize = 3;

struct Analysis {
    centered: PointCloud,
    centroid: Vec3,
    eigen: EigenResult,
    dis: Disambiguation,
}

fn analyze(cloud: &PointCloud, kind: ScoreFunction, thresholds: &DegeneracyThresholds) -> Result<Analysis> {
    if cloud.len() < MIN_CANONICAL_POINTS {
        return Err(PpcError::InsufficientPoints {
            needed: MIN_CANONICAL_POINTS,
            got: cloud.len(),
        });
    }
    let (centered, centroid) = center(cloud)?;
    let eigen = eig3_sym(&covariance(&centered)?)?;
    let dis = disambiguate(&eigen, &centered, kind, thresholds)?;
    Ok(Analysis {
        centered,
        centroid,
        eigen,
        dis,
    })
}

/// Maps `cloud` to its canonical pose `x̄ Ê(x̄)`.
pub fn canonicalize(
    cloud: &PointCloud,
    kind: ScoreFunction,
    thresholds: &DegeneracyThresholds,
) -> Result<CanonicalResult> {
    let Analysis {
        centered,
        centroid,
        eigen,
        dis,
    } = analyze(cloud, kind, thresholds)?;

    let axes = [dis.basis.col(0), dis.basis.col(1), dis.basis.col(2)];
    let points = centered
        .iter()
        .map(|p| [dot(p, &axes[0]), dot(p, &axes[1]), dot(p, &axes[2])])
        .collect();

    Ok(CanonicalResult {
        canonical: PointCloud::new(points)?,
        basis: dis.basis,
        centroid,
        signs: dis.signs,
        phi_values: dis.phi_values,
        gaps: eigen.spectral_gaps(),
        eigen,
        report: dis.report,
    })
}

/// The degeneracy diagnostics of [`canonicalize`] without building the
/// canonical cloud.
pub fn degeneracy_check(
    cloud: &PointCloud,
    kind: ScoreFunction,
    thresholds: &DegeneracyThresholds,
) -> Result<DegeneracyReport> {
    Ok(analyze(cloud, kind, thresholds)?.dis.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[Vec3]) -> PointCloud {
        PointCloud::new(points.to_vec()).unwrap()
    }

    #[test]
    fn centroid_arithmetic() {
        let c = cloud(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 3.0, 0.0]]);
        assert_eq!(centroid(&c).unwrap(), [1.0, 1.0, 0.0]);
        let p = [0.3, -7.25, 1e9];
        assert_eq!(centroid(&cloud(&[p])).unwrap(), p);
    }

    #[test]
    fn center_arithmetic() {
        let (c, mu) = center(&cloud(&[[1.0, 1.0, 1.0], [3.0, 1.0, 1.0]])).unwrap();
        assert_eq!(c.points(), &[[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(mu, [2.0, 1.0, 1.0]);
        let (again, _) = center(&c).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn covariance_arithmetic() {
        let s = covariance(&cloud(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])).unwrap();
        assert_eq!(s, Mat3::diag([2.0, 0.0, 0.0]));
        let s = covariance(&cloud(&[[0.0, 2.0, 0.0], [0.0, -2.0, 0.0]])).unwrap();
        assert_eq!(s, Mat3::diag([0.0, 8.0, 0.0]));
        assert!(matches!(
            covariance(&cloud(&[[1.0, 2.0, 3.0]])),
            Err(PpcError::InsufficientPoints { needed: 2, got: 1 })
        ));
    }

    fn eig_identity() -> EigenResult {
        EigenResult {
            eigenvalues: [3.0, 2.0, 1.0],
            basis: Mat3::IDENTITY,
        }
    }

    #[test]
    fn disambiguate_identity_case() {
        let c = cloud(&[
            [3.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, -1.0, 0.0],
        ]);
        let d = disambiguate(&eig_identity(), &c, ScoreFunction::Phi1Sq, &Default::default()).unwrap();
        assert_eq!(d.signs, [1, 1, 1]);
        assert_eq!(d.basis, Mat3::IDENTITY);
    }

    #[test]
    fn disambiguate_right_hand_rule() {
        let c = cloud(&[
            [-3.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, -1.0, 0.0],
        ]);
        let d = disambiguate(&eig_identity(), &c, ScoreFunction::Phi1Sq, &Default::default()).unwrap();
        assert_eq!(d.signs, [-1, 1, -1]);
        assert_eq!(d.basis, Mat3::diag([-1.0, 1.0, -1.0]));
        assert_eq!(d.basis.det(), 1.0);
    }

    #[test]
    fn disambiguate_left_handed_solver_basis() {
        let eig = EigenResult {
            eigenvalues: [3.0, 2.0, 1.0],
            basis: Mat3::diag([1.0, 1.0, -1.0]),
        };
        let c = cloud(&[
            [3.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, -1.0, 0.0],
        ]);
        let d = disambiguate(&eig, &c, ScoreFunction::Phi1Sq, &Default::default()).unwrap();
        assert_eq!(d.signs, [1, 1, -1]);
        assert_eq!(d.basis, Mat3::IDENTITY);
    }

    #[test]
    fn vanished_score_falls_back_to_plus_one() {
        let c = cloud(&[
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, -1.0, 0.0],
        ]);
        let d = disambiguate(&eig_identity(), &c, ScoreFunction::Phi1Sq, &Default::default()).unwrap();
        assert_eq!(d.phi_values[0], 0.0);
        assert_eq!(d.signs, [1, 1, 1]);
        assert!(!d.report.phi_nondegenerate);
        assert_eq!(d.report.verdict, Verdict::Degenerate);
    }

    #[test]
    fn near_degenerate_band() {
        let t = DegeneracyThresholds::default();
        let eig = EigenResult {
            eigenvalues: [3.0, 3.0 - 3.0 * 5e-5, 1.0],
            basis: Mat3::IDENTITY,
        };
        let report = DegeneracyReport::new(&eig, [0.5, 0.5], &t);
        assert!(report.spectrum_simple);
        assert_eq!(report.verdict, Verdict::NearDegenerate);
        let report = DegeneracyReport::new(&eig_identity(), [0.5, 5e-5], &t);
        assert_eq!(report.verdict, Verdict::NearDegenerate);
        let report = DegeneracyReport::new(&eig_identity(), [0.5, 0.5], &t);
        assert_eq!(report.verdict, Verdict::Ok);
    }

    #[test]
    fn canonicalize_requires_three_points() {
        let c = cloud(&[[0.0; 3], [1.0, 0.0, 0.0]]);
        assert!(matches!(
            canonicalize(&c, ScoreFunction::Phi1Sq, &Default::default()),
            Err(PpcError::InsufficientPoints { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn axis_aligned_cloud_is_a_fixed_point() {
        // centered, diagonal covariance with x > y > z, mass biased to +x and +y
        let c = cloud(&[
            [4.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 0.5],
            [0.0, 0.0, -0.5],
        ]);
        let r = canonicalize(&c, ScoreFunction::Phi1Sq, &Default::default()).unwrap();
        assert!(r.basis.max_abs_diff(&Mat3::IDENTITY) <= 1e-10);
        assert!(r.canonical.max_row_deviation(&c).unwrap() <= 1e-10);
        assert_eq!(r.report.verdict, Verdict::Ok);
    }

    #[test]
    fn invalid_thresholds_rejected() {
        let t = DegeneracyThresholds {
            warn_factor: 0.5,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = DegeneracyThresholds {
            eps_abs: 0.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }
}
