//! Target-based extrinsic calibration between 3D LIDARs and pinhole cameras.
//!
//! The crate is `no_std` (it needs `alloc`) and holds everything that is pure
//! computation: rigid-body geometry, a feature-level scene simulator, feature
//! extraction (RANSAC planes, scan-edge lines, planar PnP), a Levenberg-Marquardt
//! engine over SE(3) with three calibration formulations and a global pose
//! graph, and the evaluation metrics. File formats, parallel drivers and the
//! command line live in the `extrinsiq` crate.
//!
//! The three calibration formulations are:
//!
//! * **PPC**: LIDAR points on the target must lie on the target plane measured
//!   by the camera (point-to-plane).
//! * **PBPC**: PPC followed by a refinement in which LIDAR points on the target
//!   edges must lie on the planes back-projected from the image edge lines.
//! * **MSG**: plane-to-plane constraints for every sensor pair (any modality),
//!   fused by a pose graph over all sensors.
#![no_std]

extern crate alloc;

mod error;
pub mod features;
pub mod geom;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use geom::{CameraIntrinsics, ImageLine, Plane, Pose, Rotation, Vec2, Vec3};

pub(crate) mod prelude {
    pub use alloc::format;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use num_traits::Float;

    pub use crate::geom::{Vec2, Vec3};
    pub use crate::{Error, Result};
}
