//! Rigid-body and projective primitives shared by every other module.
//!
//! Frames are right handed. Camera frames look down +z with +x right and +y
//! down in the image, LIDAR frames use +x forward and +z up. Angles are
//! radians throughout.

mod camera;
mod line;
mod plane;
mod pose;
mod rotation;

pub use camera::{backprojected_plane, project, project_homogeneous, CameraIntrinsics};
pub use line::{intersect_lines, ImageLine};
pub use plane::Plane;
pub use pose::Pose;
pub(crate) use rotation::left_jacobian_inverse;
pub use rotation::{exp_so3, log_so3, skew, Rotation};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Inputs this close to unit length are kept as given, so stored unit
/// vectors reload bit for bit.
pub(crate) const UNIT_SLACK: f64 = 4.0 * f64::EPSILON;
