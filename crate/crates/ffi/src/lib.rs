//! C ABI over the `ppc` library.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`PpcStatus`]; `PPC_STATUS_OK` is 0.
//!   On failure a description is available from [`ppc_last_error`] on the
//!   same thread until the next failing call.
//! * Clouds and canonicalization results are opaque handles created by this
//!   library and released with the matching `*_free` function. Freeing
//!   `NULL` is a no-op.
//! * Points cross the boundary as row-major `double` triples `x, y, z`.
//! * Panics never unwind into the caller; they are reported as
//!   `PPC_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ppc::canonicalize::{canonicalize, CanonicalResult, DegeneracyThresholds, Verdict};
use ppc::cloud::PointCloud;
use ppc::downsample::{downsample_pipeline, fps_select, voxel_downsample, FpsParams, SeedRule, VoxelParams};
use ppc::error::PpcError;
use ppc::io::{read_cloud, write_cloud, CloudData};
use ppc::metrics::{chamfer_brute, chamfer_fast};
use ppc::score::ScoreFunction;

/// Version of this C interface; bumped on any incompatible change.
pub const PPC_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyCloud = 3,
    NonFinite = 4,
    TargetExceedsCloud = 5,
    InsufficientPoints = 6,
    Numerical = 7,
    FileNotFound = 8,
    Io = 9,
    Parse = 10,
    UnsupportedFormat = 11,
    BufferTooSmall = 12,
    Internal = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpcScore {
    /// Squared-radius weights.
    Sq = 0,
    /// Fourth-power weights.
    Quartic = 1,
    /// Inverse-radius weights.
    Inverse = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpcSeedRule {
    FarthestFromCentroid = 0,
    FirstIndex = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpcVerdict {
    Ok = 0,
    NearDegenerate = 1,
    Degenerate = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpcThresholds {
    pub gap_rel_min: f64,
    pub phi_rel_min: f64,
    pub warn_factor: f64,
    pub eps_abs: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpcDegeneracy {
    pub verdict: PpcVerdict,
    pub spectrum_simple: bool,
    pub phi_nondegenerate: bool,
    pub gap_ratio_12: f64,
    pub gap_ratio_23: f64,
    pub phi_margin_1: f64,
    pub phi_margin_2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpcChamfer {
    pub value: f64,
    pub forward_mean: f64,
    pub backward_mean: f64,
}

/// Opaque point cloud.
pub struct PpcCloud {
    inner: PointCloud,
}

/// Opaque canonicalization result.
pub struct PpcCanonical {
    inner: CanonicalResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PpcStatus, String);

impl From<PpcError> for Failure {
    fn from(e: PpcError) -> Self {
        let status = match &e {
            PpcError::EmptyCloud => PpcStatus::EmptyCloud,
            PpcError::NonFiniteCoordinate { .. } => PpcStatus::NonFinite,
            PpcError::InvalidParam(_) | PpcError::InvalidSpec(_) | PpcError::Config(_) => {
                PpcStatus::InvalidArgument
            }
            PpcError::TargetExceedsCloud { .. } => PpcStatus::TargetExceedsCloud,
            PpcError::InsufficientPoints { .. } => PpcStatus::InsufficientPoints,
            PpcError::NotSymmetric { .. }
            | PpcError::NonUnitVector { .. }
            | PpcError::NotOrthonormal { .. }
            | PpcError::RowCountMismatch { .. } => PpcStatus::Numerical,
            PpcError::FileNotFound(_) => PpcStatus::FileNotFound,
            PpcError::Parse { .. } => PpcStatus::Parse,
            PpcError::UnsupportedFormat(_) => PpcStatus::UnsupportedFormat,
            PpcError::Io(_) => PpcStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: PpcStatus, message: &str) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

/// Runs `f`, recording any error or panic in the thread-local slot.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PpcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {message}"));
            PpcStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(PpcStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return fail(PpcStatus::NullPointer, "path is NULL");
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => fail(PpcStatus::InvalidArgument, "path is not valid UTF-8"),
    }
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(PpcStatus::NullPointer, "output handle pointer is NULL");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn clear<T>(out: *mut *mut T) {
    if !out.is_null() {
        *out = ptr::null_mut();
    }
}

impl From<PpcScore> for ScoreFunction {
    fn from(s: PpcScore) -> Self {
        match s {
            PpcScore::Sq => ScoreFunction::Phi1Sq,
            PpcScore::Quartic => ScoreFunction::Phi2Quartic,
            PpcScore::Inverse => ScoreFunction::Phi3Inverse,
        }
    }
}

impl From<PpcSeedRule> for SeedRule {
    fn from(s: PpcSeedRule) -> Self {
        match s {
            PpcSeedRule::FarthestFromCentroid => SeedRule::FarthestFromCentroid,
            PpcSeedRule::FirstIndex => SeedRule::FirstIndex,
        }
    }
}

impl From<Verdict> for PpcVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Ok => PpcVerdict::Ok,
            Verdict::NearDegenerate => PpcVerdict::NearDegenerate,
            Verdict::Degenerate => PpcVerdict::Degenerate,
        }
    }
}

impl From<PpcThresholds> for DegeneracyThresholds {
    fn from(t: PpcThresholds) -> Self {
        DegeneracyThresholds {
            gap_rel_min: t.gap_rel_min,
            phi_rel_min: t.phi_rel_min,
            warn_factor: t.warn_factor,
            eps_abs: t.eps_abs,
        }
    }
}

#[no_mangle]
pub extern "C" fn ppc_abi_version() -> u32 {
    PPC_ABI_VERSION
}

/// Message of the last failure on this thread, or `NULL` if none. The
/// string is owned by the library and valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn ppc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default degeneracy thresholds.
#[no_mangle]
pub extern "C" fn ppc_thresholds_default() -> PpcThresholds {
    let d = DegeneracyThresholds::default();
    PpcThresholds {
        gap_rel_min: d.gap_rel_min,
        phi_rel_min: d.phi_rel_min,
        warn_factor: d.warn_factor,
        eps_abs: d.eps_abs,
    }
}

/// Copies `n_points` rows of `xyz` (3 doubles each) into a new cloud.
///
/// # Safety
/// `xyz` must point to `3 * n_points` readable doubles; `out` must be a
/// valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_new(
    xyz: *const f64,
    n_points: usize,
    out: *mut *mut PpcCloud,
) -> PpcStatus {
    clear(out);
    guard(|| {
        if xyz.is_null() {
            return fail(PpcStatus::NullPointer, "xyz is NULL");
        }
        let len = n_points
            .checked_mul(3)
            .ok_or_else(|| Failure(PpcStatus::InvalidArgument, "n_points overflows".into()))?;
        let flat = std::slice::from_raw_parts(xyz, len);
        let inner = PointCloud::from_flat(flat)?;
        store(out, PpcCloud { inner })
    })
}

/// # Safety
/// `cloud` must be `NULL` or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_free(cloud: *mut PpcCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Number of points, or 0 for `NULL`.
///
/// # Safety
/// `cloud` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_len(cloud: *const PpcCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Copies the points into `out` (`3 * capacity_points` doubles).
///
/// # Safety
/// `out` must point to `3 * capacity_points` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_copy_points(
    cloud: *const PpcCloud,
    out: *mut f64,
    capacity_points: usize,
) -> PpcStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        if out.is_null() {
            return fail(PpcStatus::NullPointer, "out is NULL");
        }
        let n = cloud.inner.len();
        if capacity_points < n {
            return Err(Failure(
                PpcStatus::BufferTooSmall,
                format!("buffer holds {capacity_points} points, cloud has {n}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, 3 * n);
        for (chunk, p) in dst.chunks_exact_mut(3).zip(cloud.inner.iter()) {
            chunk.copy_from_slice(p);
        }
        Ok(())
    })
}

/// Reads a cloud; the format follows the file extension
/// (`.xyz`/`.txt`/`.pts`, `.csv`, `.ply`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_read(path: *const c_char, out: *mut *mut PpcCloud) -> PpcStatus {
    clear(out);
    guard(|| {
        let data = read_cloud(&path_arg(path)?, None)?;
        store(out, PpcCloud { inner: data.cloud })
    })
}

/// Writes a cloud; the format follows the file extension (`.ply` is
/// written as binary little-endian).
///
/// # Safety
/// `cloud` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ppc_cloud_write(cloud: *const PpcCloud, path: *const c_char) -> PpcStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        write_cloud(&path_arg(path)?, &CloudData::new(cloud.inner.clone()), None)?;
        Ok(())
    })
}

/// Voxel then farthest-point downsampling. `voxel_size <= 0` skips the
/// voxel stage and `fps_target == 0` skips FPS. When the voxel stage
/// leaves fewer than `fps_target` points the voxel output is returned and
/// `*short_cloud` (if not `NULL`) is set.
///
/// # Safety
/// `cloud` must be a live handle; `out` a valid handle slot; `short_cloud`
/// `NULL` or writable.
#[no_mangle]
pub unsafe extern "C" fn ppc_downsample(
    cloud: *const PpcCloud,
    voxel_size: f64,
    fps_target: usize,
    seed_rule: PpcSeedRule,
    out: *mut *mut PpcCloud,
    short_cloud: *mut bool,
) -> PpcStatus {
    clear(out);
    guard(|| {
        let cloud = &deref(cloud, "cloud")?.inner;
        if voxel_size.is_nan() {
            return fail(PpcStatus::InvalidArgument, "voxel_size is NaN");
        }
        let (result, short) = match (voxel_size > 0.0, fps_target > 0) {
            (true, true) => {
                let d = downsample_pipeline(
                    cloud,
                    &VoxelParams::new(voxel_size)?,
                    &FpsParams::new(fps_target, seed_rule.into())?,
                )?;
                (d.cloud, d.short_cloud)
            }
            (true, false) => (voxel_downsample(cloud, &VoxelParams::new(voxel_size)?)?, false),
            (false, true) => {
                let idx = fps_select(cloud, &FpsParams::new(fps_target, seed_rule.into())?)?;
                (cloud.select(&idx)?, false)
            }
            (false, false) => (cloud.clone(), false),
        };
        if !short_cloud.is_null() {
            *short_cloud = short;
        }
        store(out, PpcCloud { inner: result })
    })
}

/// Canonicalizes `cloud`. `thresholds` may be `NULL` for the defaults.
/// Degenerate inputs still succeed; inspect [`ppc_canonical_degeneracy`].
///
/// # Safety
/// `cloud` must be a live handle; `thresholds` `NULL` or readable; `out` a
/// valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonicalize(
    cloud: *const PpcCloud,
    score: PpcScore,
    thresholds: *const PpcThresholds,
    out: *mut *mut PpcCanonical,
) -> PpcStatus {
    clear(out);
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        let t = thresholds
            .as_ref()
            .map_or_else(DegeneracyThresholds::default, |t| (*t).into());
        let inner = canonicalize(&cloud.inner, score.into(), &t)?;
        store(out, PpcCanonical { inner })
    })
}

/// # Safety
/// `result` must be `NULL` or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonical_free(result: *mut PpcCanonical) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// New cloud handle holding the canonical pose.
///
/// # Safety
/// `result` must be a live handle; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonical_cloud(
    result: *const PpcCanonical,
    out: *mut *mut PpcCloud,
) -> PpcStatus {
    clear(out);
    guard(|| {
        let r = deref(result, "result")?;
        store(
            out,
            PpcCloud {
                inner: r.inner.canonical.clone(),
            },
        )
    })
}

/// Canonical basis, row-major; its columns are the signed principal axes.
///
/// # Safety
/// `result` must be a live handle; `out` must hold 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonical_basis(result: *const PpcCanonical, out: *mut f64) -> PpcStatus {
    guard(|| {
        let r = deref(result, "result")?;
        if out.is_null() {
            return fail(PpcStatus::NullPointer, "out is NULL");
        }
        let flat: Vec<f64> = r.inner.basis.0.iter().flatten().copied().collect();
        ptr::copy_nonoverlapping(flat.as_ptr(), out, 9);
        Ok(())
    })
}

/// Centroid (3 doubles), eigenvalues in descending order (3 doubles),
/// score values of the first two axes (2 doubles) and axis signs
/// (3 values of ±1). Any output pointer may be `NULL` to skip it.
///
/// # Safety
/// `result` must be a live handle; non-`NULL` outputs must be writable for
/// the sizes above.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonical_frame(
    result: *const PpcCanonical,
    centroid: *mut f64,
    eigenvalues: *mut f64,
    phi: *mut f64,
    signs: *mut i8,
) -> PpcStatus {
    guard(|| {
        let r = &deref(result, "result")?.inner;
        if !centroid.is_null() {
            ptr::copy_nonoverlapping(r.centroid.as_ptr(), centroid, 3);
        }
        if !eigenvalues.is_null() {
            ptr::copy_nonoverlapping(r.eigen.eigenvalues.as_ptr(), eigenvalues, 3);
        }
        if !phi.is_null() {
            ptr::copy_nonoverlapping(r.phi_values.as_ptr(), phi, 2);
        }
        if !signs.is_null() {
            ptr::copy_nonoverlapping(r.signs.as_ptr(), signs, 3);
        }
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppc_canonical_degeneracy(
    result: *const PpcCanonical,
    out: *mut PpcDegeneracy,
) -> PpcStatus {
    guard(|| {
        let r = &deref(result, "result")?.inner.report;
        if out.is_null() {
            return fail(PpcStatus::NullPointer, "out is NULL");
        }
        *out = PpcDegeneracy {
            verdict: r.verdict.into(),
            spectrum_simple: r.spectrum_simple,
            phi_nondegenerate: r.phi_nondegenerate,
            gap_ratio_12: r.gap_ratio_12,
            gap_ratio_23: r.gap_ratio_23,
            phi_margin_1: r.phi_margin_1,
            phi_margin_2: r.phi_margin_2,
        };
        Ok(())
    })
}

/// Symmetric Chamfer distance; `brute` selects the exhaustive evaluation.
///
/// # Safety
/// `a` and `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppc_chamfer(
    a: *const PpcCloud,
    b: *const PpcCloud,
    brute: bool,
    out: *mut PpcChamfer,
) -> PpcStatus {
    guard(|| {
        let a = &deref(a, "a")?.inner;
        let b = &deref(b, "b")?.inner;
        if out.is_null() {
            return fail(PpcStatus::NullPointer, "out is NULL");
        }
        let r = if brute {
            chamfer_brute(a, b)?
        } else {
            chamfer_fast(a, b)?
        };
        *out = PpcChamfer {
            value: r.value,
            forward_mean: r.forward_mean,
            backward_mean: r.backward_mean,
        };
        Ok(())
    })
}
