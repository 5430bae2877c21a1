use crate::geom::{Pose, Vec3};
use crate::prelude::*;

/// Rectangular planar target. Corners are listed counterclockwise as seen
/// from the target's +z side, starting at `(+w/2, +h/2)`; edge `j` joins
/// corner `j` and corner `j + 1 (mod 4)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetModel {
    pub width: f64,
    pub height: f64,
}

impl Default for TargetModel {
    fn default() -> Self {
        Self {
            width: 0.8,
            height: 0.6,
        }
    }
}

impl TargetModel {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidInput(
                "target dimensions must be positive".into(),
            ));
        }
        Ok(Self { width, height })
    }

    pub fn corners(&self) -> [Vec3; 4] {
        let (w, h) = (0.5 * self.width, 0.5 * self.height);
        [
            Vec3::new(w, h, 0.0),
            Vec3::new(-w, h, 0.0),
            Vec3::new(-w, -h, 0.0),
            Vec3::new(w, -h, 0.0),
        ]
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.width.hypot(self.height)
    }

    /// Target edge index (in target order) whose midpoint is highest along
    /// `up`, and its height margin over the runner-up.
    pub fn top_edge(&self, frame_from_target: &Pose, up: &Vec3) -> (usize, f64) {
        let c = self
            .corners()
            .map(|x| frame_from_target.transform_point(&x));
        let mut heights = [0.0; 4];
        for j in 0..4 {
            heights[j] = up.dot(&(0.5 * (c[j] + c[(j + 1) % 4])));
        }
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|a, b| heights[*b].total_cmp(&heights[*a]));
        (order[0], heights[order[0]] - heights[order[1]])
    }

    /// Corners relabeled so that labeled edge 0 is the topmost edge (seen in
    /// the rig's up direction) and labels run counterclockwise as seen from
    /// the sensors.
    pub fn labeled_corners(&self, rig_from_target: &Pose) -> [Vec3; 4] {
        let (shift, _) = self.top_edge(rig_from_target, &Vec3::z());
        let c = self.corners();
        [
            c[shift],
            c[(shift + 1) % 4],
            c[(shift + 2) % 4],
            c[(shift + 3) % 4],
        ]
    }

    /// Label of target edge `j` after relabeling.
    pub fn edge_label(&self, rig_from_target: &Pose, j: usize) -> usize {
        let (shift, _) = self.top_edge(rig_from_target, &Vec3::z());
        (j + 4 - shift) % 4
    }
}
