//! Evaluation metrics: line reprojection error, stereo consistency, pose
//! error, and random-initialization sweeps.

use alloc::string::ToString;

use rand_distr::{Distribution, Normal};

use crate::geom::{exp_so3, project, CameraIntrinsics, ImageLine, Pose};
use crate::prelude::*;
use crate::rng::{stream, Purpose};

/// LIDAR edge points associated with one image line.
#[derive(Clone, Debug, PartialEq)]
pub struct MlreLine {
    pub line: ImageLine,
    pub points: Vec<Vec3>,
}

/// The associated lines of one target view.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MlreFrame {
    pub lines: Vec<MlreLine>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlreReport {
    /// Mean over frames of the mean over lines of the mean point distance, pixels.
    pub mean: f64,
    /// Mean over all projected points, pixels.
    pub point_mean: f64,
    /// Per frame mean; `None` when nothing in the frame projected.
    pub per_frame: Vec<Option<f64>>,
    /// Per frame, per line mean; `None` for lines with no projected point.
    pub per_line: Vec<Vec<Option<f64>>>,
    pub points: usize,
    /// Points behind the camera, left out of every average.
    pub skipped: usize,
}

/// Mean line reprojection error of `camera_from_lidar`.
pub fn mlre(
    camera_from_lidar: &Pose,
    k: &CameraIntrinsics,
    frames: &[MlreFrame],
) -> Result<MlreReport> {
    let mut per_frame = Vec::with_capacity(frames.len());
    let mut per_line = Vec::with_capacity(frames.len());
    let (mut points, mut skipped, mut total) = (0usize, 0usize, 0.0);
    let mut last_depth = 0.0;
    for frame in frames {
        let mut lines = Vec::with_capacity(frame.lines.len());
        for l in &frame.lines {
            let (mut sum, mut count) = (0.0, 0usize);
            for q in &l.points {
                match project(k, camera_from_lidar, q) {
                    Ok(px) => {
                        let d = l.line.distance(&px);
                        sum += d;
                        total += d;
                        count += 1;
                    }
                    Err(Error::NonPositiveDepth(z)) => {
                        last_depth = z;
                        skipped += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            points += count;
            lines.push((count > 0).then(|| sum / count as f64));
        }
        let valid: Vec<f64> = lines.iter().flatten().copied().collect();
        per_frame.push((!valid.is_empty()).then(|| valid.iter().sum::<f64>() / valid.len() as f64));
        per_line.push(lines);
    }
    let frame_means: Vec<f64> = per_frame.iter().flatten().copied().collect();
    if frame_means.is_empty() {
        return Err(Error::NonPositiveDepth(last_depth));
    }
    Ok(MlreReport {
        mean: frame_means.iter().sum::<f64>() / frame_means.len() as f64,
        point_mean: total / points as f64,
        per_frame,
        per_line,
        points,
        skipped,
    })
}

/// Residual stereo extrinsic error, angles in degrees and translation in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoConsistencyError {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Intrinsic X-Y-Z Euler angles of `r = Rx(a) Ry(b) Rz(c)`, radians.
pub fn euler_xyz(r: &crate::geom::Rotation) -> Result<[f64; 3]> {
    let m = r.matrix();
    let sb = m[(0, 2)].clamp(-1.0, 1.0);
    let beta = sb.asin();
    if beta.abs() >= core::f64::consts::FRAC_PI_2 - 1e-6 {
        return Err(Error::DegenerateConfiguration(
            "Euler angles at gimbal lock",
        ));
    }
    Ok([
        (-m[(1, 2)]).atan2(m[(2, 2)]),
        beta,
        (-m[(0, 1)]).atan2(m[(0, 0)]),
    ])
}

/// Compares `c1_from_lidar * (c2_from_lidar)^-1` with the factory
/// `c1_from_c2`.
pub fn stereo_consistency(
    c1_from_lidar: &Pose,
    c2_from_lidar: &Pose,
    factory: &Pose,
) -> Result<StereoConsistencyError> {
    let estimate = *c1_from_lidar * c2_from_lidar.inverse();
    let err = factory.inverse() * estimate;
    let [a, b, c] = euler_xyz(&err.rotation)?;
    let t = err.translation;
    Ok(StereoConsistencyError {
        alpha: a.to_degrees(),
        beta: b.to_degrees(),
        gamma: c.to_degrees(),
        x: t.x,
        y: t.y,
        z: t.z,
    })
}

/// Rotation angle (degrees) and translation distance (meters) of
/// `truth^-1 * estimate`.
pub fn pose_error(estimate: &Pose, truth: &Pose) -> (f64, f64) {
    let d = truth.inverse() * *estimate;
    (d.rotation.angle().to_degrees(), d.translation.norm())
}

/// One random-initialization trial.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTrial {
    pub init: Pose,
    /// `None` when the solve failed outright.
    pub result: Option<SweepOutcome>,
    pub error: Option<Error>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOutcome {
    pub pose: Pose,
    pub cost: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCluster {
    pub representative: Pose,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub trials: Vec<SweepTrial>,
    /// Clusters of solved trials, largest first.
    pub clusters: Vec<SweepCluster>,
}

impl SweepReport {
    /// Trials in the largest cluster.
    pub fn modal_count(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.members.len())
    }

    /// Trials outside the modal cluster, failures included.
    pub fn divergent_count(&self) -> usize {
        self.trials.len() - self.modal_count()
    }
}

/// Initial poses for a sweep: `exp(w)` with `w ~ N(0, sigma_rot^2 I)` and
/// `t ~ N(0, sigma_t^2 I)`, one stream per trial.
pub fn sweep_inits(
    n_trials: usize,
    sigma_rot_deg: f64,
    sigma_t: f64,
    seed: u64,
) -> Result<Vec<Pose>> {
    if n_trials == 0 {
        return Err(Error::InvalidInput(
            "a sweep needs at least one trial".into(),
        ));
    }
    if !(sigma_rot_deg >= 0.0 && sigma_t >= 0.0) {
        return Err(Error::InvalidInput(
            "sweep sigmas must be non-negative".into(),
        ));
    }
    let rot = Normal::new(0.0, sigma_rot_deg.to_radians())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let tr = Normal::new(0.0, sigma_t).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok((0..n_trials)
        .map(|i| {
            let mut rng = stream(seed, Purpose::Sweep, i as u64, 0);
            let w = Vec3::new(
                rot.sample(&mut rng),
                rot.sample(&mut rng),
                rot.sample(&mut rng),
            );
            let t = Vec3::new(
                tr.sample(&mut rng),
                tr.sample(&mut rng),
                tr.sample(&mut rng),
            );
            Pose::new(exp_so3(&w), t)
        })
        .collect())
}

/// Groups solved trials whose poses agree within `tolerance` in both
/// rotation angle (radians) and translation (meters).
pub fn cluster_trials(trials: &[SweepTrial], tolerance: f64) -> Vec<SweepCluster> {
    let mut clusters: Vec<SweepCluster> = Vec::new();
    for (i, t) in trials.iter().enumerate() {
        let Some(out) = &t.result else { continue };
        let home = clusters.iter_mut().find(|c| {
            let d = c.representative.inverse() * out.pose;
            d.rotation.angle() < tolerance && d.translation.norm() < tolerance
        });
        match home {
            Some(c) => c.members.push(i),
            None => clusters.push(SweepCluster {
                representative: out.pose,
                members: vec![i],
            }),
        }
    }
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()));
    clusters
}

/// Runs `solve` from every initialization and clusters the outcomes.
pub fn random_init_sweep<F>(inits: &[Pose], tolerance: f64, mut solve: F) -> SweepReport
where
    F: FnMut(&Pose) -> Result<SweepOutcome>,
{
    let trials: Vec<SweepTrial> = inits
        .iter()
        .map(|init| sweep_trial(init, &mut solve))
        .collect();
    let clusters = cluster_trials(&trials, tolerance);
    SweepReport { trials, clusters }
}

/// A single trial; failures are recorded rather than raised.
pub fn sweep_trial<F>(init: &Pose, solve: &mut F) -> SweepTrial
where
    F: FnMut(&Pose) -> Result<SweepOutcome>,
{
    match solve(init) {
        Ok(out) => SweepTrial {
            init: *init,
            result: Some(out),
            error: None,
        },
        Err(e) => SweepTrial {
            init: *init,
            result: None,
            error: Some(e),
        },
    }
}
