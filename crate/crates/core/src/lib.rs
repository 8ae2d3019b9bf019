//! Rigid-motion invariant canonicalization of 3D point clouds.
//!
//! A cloud is centered, rotated into the eigenbasis of its covariance
//! (eigenvalues descending), and the eigenvector signs are fixed by an
//! asymmetry score so that every rigidly moved copy of the same cloud lands
//! on the same canonical pose. Around that core the crate provides the
//! voxel + farthest-point downsampling front end, Chamfer distance, file
//! I/O, deterministic synthetic scenes, and a benchmark harness.
//!
//! ```
//! use ppc::{canonicalize, DegeneracyThresholds, PointCloud, ScoreFunction};
//!
//! let cloud = PointCloud::new(vec![
//!     [4.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [-2.0, 0.0, 0.0],
//!     [0.0, 2.0, 0.0], [0.0, -1.0, 0.0], [0.0, -1.0, 0.0],
//!     [0.0, 0.0, 0.5], [0.0, 0.0, -0.5],
//! ]).unwrap();
//! let result = canonicalize(&cloud, ScoreFunction::Phi1Sq, &DegeneracyThresholds::default()).unwrap();
//! assert_eq!(result.canonical.len(), cloud.len());
//! ```

pub mod bench;
pub mod canonicalize;
pub mod cloud;
pub mod downsample;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod report;
pub mod score;
pub mod sum;
pub mod synth;

pub use canonicalize::{
    canonicalize, center, centroid, covariance, degeneracy_check, disambiguate, CanonicalResult,
    DegeneracyReport, DegeneracyThresholds, Disambiguation, Verdict,
};
pub use cloud::{validate_cloud, PointCloud};
pub use downsample::{
    downsample_pipeline, farthest_point_sample, voxel_downsample, Downsampled, FpsParams, SeedRule,
    VoxelParams,
};
pub use eigen::{eig3_sym, EigenResult};
pub use error::{PpcError, Result};
pub use geometry::{Mat3, RigidTransform, Vec3};
pub use metrics::{basis_distance, chamfer_brute, chamfer_fast, distance_preservation, ChamferResult};
pub use score::{score_phi, ScoreFunction};
pub use synth::{apply_rigid, generate, sample_rotation, SceneKind, SceneSpec};
