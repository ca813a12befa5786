//! Multi-view triangulation toolkit.
//!
//! * [`geometry`]: homogeneous points, the pinhole camera `P = K R [I | -C]`,
//!   camera centers and fundamental matrices.
//! * [`numeric`]: smallest singular vectors, real polynomial roots and a
//!   Levenberg–Marquardt driver.
//! * [`calibration`]: DLT estimation of `P` from 3D-2D correspondences.
//! * [`triangulation`]: linear, optimal two-view and refined n-view
//!   triangulation.
//! * [`scene`]: synthetic objects, camera rigs and noisy observations.
//! * [`bench`]: the two-view against three-view comparison harness.

pub mod bench;
pub mod calibration;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod scene;
pub mod triangulation;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, CameraView, HomoPoint2, HomoPoint3, ProjectionMatrix};
pub use triangulation::{Method, Observation, Track, TriangulationResult};
