use nalgebra::{Matrix3, SymmetricEigen};
use rand::seq::index::sample;
use rand::Rng;

use crate::geom::Plane;
use crate::prelude::*;

/// Below this fraction of consensus, a plane is not accepted.
pub const MIN_INLIER_RATIO: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFit {
    pub plane: Plane,
    pub inliers: Vec<usize>,
    /// RMS distance of the inliers to the plane, meters.
    pub rms: f64,
}

/// Least-squares plane through `points`: centroid and the eigenvector of the
/// smallest scatter eigenvalue. `None` for fewer than three points.
pub fn fit_plane_lsq<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Plane> {
    let pts: Vec<&Vec3> = points.into_iter().collect();
    if pts.len() < 3 {
        return None;
    }
    let centroid = pts.iter().fold(Vec3::zeros(), |a, p| a + *p) / pts.len() as f64;
    let scatter: Matrix3<f64> = pts
        .iter()
        .map(|p| {
            let d = *p - centroid;
            d * d.transpose()
        })
        .sum();
    let eig = SymmetricEigen::new(scatter);
    let i = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(i).into_owned();
    Plane::new(normal, centroid).ok()
}

fn inliers_of(points: &[Vec3], plane: &Plane, threshold: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| plane.signed_distance(&points[i]).abs() <= threshold)
        .collect()
}

/// Maximum-consensus plane over `max_iters` three-point samples, refined by
/// least squares on its inliers. The normal faces the sensor origin.
pub fn ransac_plane<R: Rng + ?Sized>(
    points: &[Vec3],
    threshold: f64,
    max_iters: usize,
    rng: &mut R,
) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::NoConsensus(0.0));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidInput(
            "plane threshold must be positive".into(),
        ));
    }
    let mut best: Option<(usize, Plane)> = None;
    for _ in 0..max_iters {
        let idx = sample(rng, points.len(), 3);
        let (a, b, c) = (
            points[idx.index(0)],
            points[idx.index(1)],
            points[idx.index(2)],
        );
        let n = (b - a).cross(&(c - a));
        if n.norm() < 1e-12 {
            continue;
        }
        let Ok(plane) = Plane::new(n, a) else {
            continue;
        };
        let count = points
            .iter()
            .filter(|p| plane.signed_distance(p).abs() <= threshold)
            .count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, plane));
        }
    }
    let Some((_, mut plane)) = best else {
        return Err(Error::NoConsensus(0.0));
    };
    let mut inliers = inliers_of(points, &plane, threshold);
    for _ in 0..3 {
        let Some(refined) = fit_plane_lsq(inliers.iter().map(|&i| &points[i])) else {
            break;
        };
        let next = inliers_of(points, &refined, threshold);
        if next.len() < 3 {
            break;
        }
        plane = refined;
        let done = next == inliers;
        inliers = next;
        if done {
            break;
        }
    }
    let ratio = inliers.len() as f64 / points.len() as f64;
    if inliers.len() < 3 || ratio < MIN_INLIER_RATIO {
        return Err(Error::NoConsensus(ratio));
    }
    let plane = plane.facing_origin();
    let rms = (inliers
        .iter()
        .map(|&i| plane.signed_distance(&points[i]).powi(2))
        .sum::<f64>()
        / inliers.len() as f64)
        .sqrt();
    Ok(PlaneFit {
        plane,
        inliers,
        rms,
    })
}

/// Drops inliers farther than `1.2 * half_diagonal` from their coordinate-wise
/// median: coplanar clutter beyond the board's extent.
pub fn restrict_to_board(points: &[Vec3], fit: &PlaneFit, half_diagonal: f64) -> Vec<usize> {
    if fit.inliers.is_empty() {
        return Vec::new();
    }
    let mut median = Vec3::zeros();
    for axis in 0..3 {
        let mut v: Vec<f64> = fit.inliers.iter().map(|&i| points[i][axis]).collect();
        v.sort_by(f64::total_cmp);
        median[axis] = v[v.len() / 2];
    }
    let limit = 1.2 * half_diagonal;
    fit.inliers
        .iter()
        .copied()
        .filter(|&i| (points[i] - median).norm() <= limit)
        .collect()
}
