//! Feature recovery from raw sensor data: plane segmentation, board edge
//! lines, and board pose from image corners.

use crate::Vec3;

mod corners;
mod edges;
mod plane;
mod pnp;

pub use corners::{canonical_corner_order, image_lines_from_corners};
pub use edges::{boundary_candidates, extract_edge_lines, EdgeLineFit};
pub use plane::{fit_plane_lsq, ransac_plane, restrict_to_board, PlaneFit, MIN_INLIER_RATIO};
pub use pnp::{planar_pnp, PnpSolution};

/// RANSAC distance threshold for a sensor with noise `sigma` (meters) and
/// confidence scale `scale`.
pub fn ransac_threshold(sigma: f64, scale: f64) -> f64 {
    (3.0 * sigma).max(0.01) * scale
}

/// Line threshold for boundary candidates once moved along their rays onto
/// the board: range noise is gone, and what remains is the scan spacing at
/// the candidates' mean range.
pub fn edge_threshold(candidates: &[Vec3], azimuth_step: f64, scale: f64) -> f64 {
    let range = candidates.iter().map(|p| p.norm()).sum::<f64>() / candidates.len().max(1) as f64;
    (range * azimuth_step).max(0.01) * scale
}
