use crate::geom::{backprojected_plane, skew, CameraIntrinsics, ImageLine, Plane, Pose};
use crate::prelude::*;

use super::lm::ResidualBlock;

/// Point-to-plane residual `n . (R P + t - d)` and its Jacobian `[dw, dt]`.
pub fn residual_ppc(pose: &Pose, point: &Vec3, plane: &Plane) -> (f64, [f64; 6]) {
    let n = plane.normal();
    let rp = pose.rotation * *point;
    let r = n.dot(&(rp + pose.translation)) - plane.offset();
    let dw = rp.cross(&n);
    (r, [dw.x, dw.y, dw.z, n.x, n.y, n.z])
}

/// Point to back-projected plane residual `m . (R Q + t)` with
/// `m = normalize(K^T l)`.
pub fn residual_pbpc(
    pose: &Pose,
    point: &Vec3,
    line: &ImageLine,
    k: &CameraIntrinsics,
) -> Result<(f64, [f64; 6])> {
    let plane = backprojected_plane(k, line)?;
    Ok(residual_ppc(pose, point, &plane))
}

/// Plane-pair residual for `pose = a_from_b`: normal alignment
/// `n_a - R n_b` and offset consistency `n_a . t + rho_b - rho_a`.
pub fn residual_msg_pair(
    pose: &Pose,
    plane_a: &Plane,
    plane_b: &Plane,
) -> ([f64; 4], [[f64; 6]; 4]) {
    let na = plane_a.normal();
    let rnb = pose.rotation * plane_b.normal();
    let d = na - rnb;
    let r = [
        d.x,
        d.y,
        d.z,
        na.dot(&pose.translation) + plane_b.offset() - plane_a.offset(),
    ];
    let s = skew(&rnb);
    let mut j = [[0.0; 6]; 4];
    for row in 0..3 {
        for c in 0..3 {
            j[row][c] = s[(row, c)];
        }
    }
    j[3][3] = na.x;
    j[3][4] = na.y;
    j[3][5] = na.z;
    (r, j)
}

/// Weighted point-to-plane term on pose `param`.
#[derive(Clone, Debug)]
pub struct PointToPlaneBlock {
    pub point: Vec3,
    pub plane: Plane,
    pub weight: f64,
    pub param: [usize; 1],
}

impl ResidualBlock for PointToPlaneBlock {
    fn dim(&self) -> usize {
        1
    }

    fn parameters(&self) -> &[usize] {
        &self.param
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (r, j) = residual_ppc(&poses[self.param[0]], &self.point, &self.plane);
        residual[0] = self.weight * r;
        if let Some(out) = jacobian {
            for (o, v) in out.iter_mut().zip(j) {
                *o = self.weight * v;
            }
        }
    }
}

/// Weighted point to back-projected plane term. The plane is built once from
/// the image line, so construction is where `DegenerateLine` surfaces.
#[derive(Clone, Debug)]
pub struct BackprojectedPlaneBlock {
    inner: PointToPlaneBlock,
}

impl BackprojectedPlaneBlock {
    pub fn new(
        point: Vec3,
        line: &ImageLine,
        k: &CameraIntrinsics,
        weight: f64,
        param: usize,
    ) -> Result<Self> {
        let plane = backprojected_plane(k, line)?;
        Ok(Self {
            inner: PointToPlaneBlock {
                point,
                plane,
                weight,
                param: [param],
            },
        })
    }
}

impl ResidualBlock for BackprojectedPlaneBlock {
    fn dim(&self) -> usize {
        1
    }

    fn parameters(&self) -> &[usize] {
        &self.inner.param
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        self.inner.evaluate(poses, residual, jacobian)
    }
}

/// Weighted plane-pair term on pose `param = a_from_b`.
#[derive(Clone, Debug)]
pub struct PlanePairBlock {
    pub plane_a: Plane,
    pub plane_b: Plane,
    pub weight: f64,
    pub param: [usize; 1],
}

impl ResidualBlock for PlanePairBlock {
    fn dim(&self) -> usize {
        4
    }

    fn parameters(&self) -> &[usize] {
        &self.param
    }

    fn evaluate(&self, poses: &[Pose], residual: &mut [f64], jacobian: Option<&mut [f64]>) {
        let (r, j) = residual_msg_pair(&poses[self.param[0]], &self.plane_a, &self.plane_b);
        for (o, v) in residual.iter_mut().zip(r) {
            *o = self.weight * v;
        }
        if let Some(out) = jacobian {
            for row in 0..4 {
                for c in 0..6 {
                    out[row * 6 + c] = self.weight * j[row][c];
                }
            }
        }
    }
}
