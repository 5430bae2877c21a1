use rand::seq::index::sample;
use rand::Rng;

use crate::geom::Plane;
use crate::prelude::*;
use crate::sim::ScanPattern;

const LINE_ITERS: usize = 200;
const REASSIGN_ROUNDS: usize = 5;
const MIN_LINE_INLIERS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLineFit {
    /// Board edge index under the corner-order convention, 0-based.
    pub edge: usize,
    /// A point on the line, in the sensor frame.
    pub point: Vec3,
    /// Unit direction, counterclockwise around the board as seen by the sensor.
    pub direction: Vec3,
    /// Indices into the candidate list.
    pub inliers: Vec<usize>,
}

impl EdgeLineFit {
    pub fn distance(&self, x: &Vec3) -> f64 {
        let d = x - self.point;
        (d - self.direction * d.dot(&self.direction)).norm()
    }
}

/// Plane inliers at the ends of their scan-line runs. A run on one channel
/// ends where no inlier follows within a few azimuth steps.
pub fn boundary_candidates(
    points: &[Vec3],
    inliers: &[usize],
    pattern: &ScanPattern,
) -> Vec<usize> {
    if inliers.is_empty() {
        return Vec::new();
    }
    let center = inliers.iter().fold(Vec3::zeros(), |a, &i| a + points[i]);
    let ref_az = center.y.atan2(center.x);
    let mut rings: Vec<Vec<(f64, usize)>> = vec![Vec::new(); pattern.channels];
    for &i in inliers {
        let p = points[i];
        let Some(ch) = pattern.channel_of(&p) else {
            continue;
        };
        let mut az = p.y.atan2(p.x) - ref_az;
        if az > core::f64::consts::PI {
            az -= 2.0 * core::f64::consts::PI;
        } else if az < -core::f64::consts::PI {
            az += 2.0 * core::f64::consts::PI;
        }
        rings[ch].push((az, i));
    }
    // A board cuts each ring in one run; short gaps are dropped returns
    // rather than boundaries.
    let gap = 3.5 * pattern.azimuth_step;
    let mut out = Vec::new();
    for ring in &mut rings {
        ring.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut start = 0;
        for k in 1..=ring.len() {
            if k == ring.len() || ring[k].0 - ring[k - 1].0 > gap {
                out.push(ring[start].1);
                if k - 1 != start {
                    out.push(ring[k - 1].1);
                }
                start = k;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// 2D line as (point, unit direction).
#[derive(Clone, Copy)]
struct Line2 {
    point: Vec2,
    dir: Vec2,
}

impl Line2 {
    fn distance(&self, p: &Vec2) -> f64 {
        (p - self.point).perp(&self.dir).abs()
    }
}

fn intersect(a: &Line2, b: &Line2) -> Option<Vec2> {
    let den = a.dir.perp(&b.dir);
    if den.abs() < 1e-6 {
        return None;
    }
    Some(a.point + a.dir * ((b.point - a.point).perp(&b.dir) / den))
}

fn fit_line(pts: &[Vec2], idx: &[usize]) -> Option<Line2> {
    if idx.len() < 2 {
        return None;
    }
    let c = idx.iter().fold(Vec2::zeros(), |a, &i| a + pts[i]) / idx.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &i in idx {
        let d = pts[i] - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // Principal axis of the 2x2 scatter.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some(Line2 {
        point: c,
        dir: Vec2::new(theta.cos(), theta.sin()),
    })
}

/// Fits the four board edges to boundary candidates and labels them.
///
/// Candidates are LIDAR returns in the sensor frame. They are moved along
/// their rays onto `plane` and handled in a canonical sorted
/// order, so the result does not depend on the order of the input. Lines are
/// found by sequential RANSAC, then refined by alternating nearest-line
/// assignment and least squares. Edge midpoints come from the corners of
/// adjacent lines. Edge 0 is the line whose midpoint is highest along `up`;
/// the rest follow counterclockwise as seen from the sensor.
pub fn extract_edge_lines<R: Rng + ?Sized>(
    candidates: &[Vec3],
    plane: &Plane,
    up: &Vec3,
    threshold: f64,
    rng: &mut R,
) -> Result<[EdgeLineFit; 4]> {
    let n = plane.normal();
    let v_axis = up - n * up.dot(&n);
    if v_axis.norm() < 1e-6 {
        return Err(Error::DegenerateConfiguration(
            "board plane is perpendicular to the up direction",
        ));
    }
    let v_axis = v_axis.normalize();
    let u_axis = v_axis.cross(&n);
    // Range noise runs along the ray, so sliding each return along its ray
    // onto the plane removes most of it.
    let on_plane: Vec<Vec3> = candidates
        .iter()
        .map(|p| {
            let along = n.dot(p);
            if along.abs() > 1e-9 {
                p * (plane.offset() / along)
            } else {
                p - n * plane.signed_distance(p)
            }
        })
        .collect();
    let centroid = on_plane.iter().fold(Vec3::zeros(), |a, p| a + p) / on_plane.len().max(1) as f64;
    let origin = centroid - n * plane.signed_distance(&centroid);

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    let flat: Vec<Vec2> = on_plane
        .iter()
        .map(|p| {
            let d = p - origin;
            Vec2::new(d.dot(&u_axis), d.dot(&v_axis))
        })
        .collect();
    order.sort_by(|&a, &b| {
        flat[a]
            .x
            .total_cmp(&flat[b].x)
            .then(flat[a].y.total_cmp(&flat[b].y))
    });
    let pts: Vec<Vec2> = order.iter().map(|&i| flat[i]).collect();

    let mut remaining: Vec<usize> = (0..pts.len()).collect();
    let mut lines: Vec<Line2> = Vec::with_capacity(4);
    for found in 0..4 {
        let mut best: Option<(f64, usize, Line2)> = None;
        if remaining.len() >= 2 {
            for _ in 0..LINE_ITERS {
                let s = sample(rng, remaining.len(), 2);
                let (a, b) = (pts[remaining[s.index(0)]], pts[remaining[s.index(1)]]);
                let d = b - a;
                if d.norm() < 1e-9 {
                    continue;
                }
                let line = Line2 {
                    point: a,
                    dir: d.normalize(),
                };
                // Truncated quadratic score: ties in raw count go to the tighter line.
                let (score, count) = remaining.iter().fold((0.0, 0), |(s, c), &i| {
                    let d = line.distance(&pts[i]);
                    if d <= threshold {
                        (s + d * d, c + 1)
                    } else {
                        (s + threshold * threshold, c)
                    }
                });
                if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                    best = Some((score, count, line));
                }
            }
        }
        let count = best.as_ref().map_or(0, |b| b.1);
        if count < MIN_LINE_INLIERS {
            return Err(Error::MissingEdge {
                edge: found,
                inliers: count,
            });
        }
        let line = best.expect("count checked").2;
        remaining.retain(|&i| line.distance(&pts[i]) > threshold);
        lines.push(line);
    }

    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); 4];
    for _ in 0..REASSIGN_ROUNDS {
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); 4];
        for (i, p) in pts.iter().enumerate() {
            let (k, d) = (0..4)
                .map(|k| (k, lines[k].distance(p)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("four lines");
            if d <= threshold {
                next[k].push(i);
            }
        }
        for (k, idx) in next.iter().enumerate() {
            if idx.len() < MIN_LINE_INLIERS {
                return Err(Error::MissingEdge {
                    edge: k,
                    inliers: idx.len(),
                });
            }
            lines[k] = fit_line(&pts, idx).expect("enough points");
        }
        let done = next == assigned;
        assigned = next;
        if done {
            break;
        }
    }

    let means: Vec<Vec2> = assigned
        .iter()
        .map(|idx| idx.iter().fold(Vec2::zeros(), |a, &i| a + pts[i]) / idx.len() as f64)
        .collect();
    let center = means.iter().sum::<Vec2>() / 4.0;
    let polar = |p: Vec2| {
        let a = (p.y - center.y).atan2(p.x - center.x);
        if a < 0.0 {
            a + 2.0 * core::f64::consts::PI
        } else {
            a
        }
    };
    let mut cyclic = [0usize, 1, 2, 3];
    cyclic.sort_by(|&a, &b| polar(means[a]).total_cmp(&polar(means[b])));
    // Edge midpoints from the corners of cyclically adjacent lines; inlier
    // means drift toward whichever end of an edge the scan covers densely.
    let mut mids = means.clone();
    for i in 0..4 {
        let k = cyclic[i];
        let prev = intersect(&lines[cyclic[(i + 3) % 4]], &lines[k]);
        let next = intersect(&lines[k], &lines[cyclic[(i + 1) % 4]]);
        if let (Some(a), Some(b)) = (prev, next) {
            mids[k] = (a + b) * 0.5;
        }
    }
    let center = mids.iter().sum::<Vec2>() / 4.0;
    let top = (0..4)
        .max_by(|&a, &b| {
            mids[a]
                .y
                .total_cmp(&mids[b].y)
                .then(mids[b].x.total_cmp(&mids[a].x))
        })
        .expect("four lines");
    let start = cyclic
        .iter()
        .position(|&k| k == top)
        .expect("top is a line");
    let by_angle: [usize; 4] = core::array::from_fn(|i| cyclic[(start + i) % 4]);

    let fits: Vec<EdgeLineFit> = by_angle
        .iter()
        .enumerate()
        .map(|(edge, &k)| {
            let l = lines[k];
            let radial = mids[k] - center;
            let dir = if radial.perp(&l.dir) > 0.0 {
                l.dir
            } else {
                -l.dir
            };
            let mut inliers: Vec<usize> = assigned[k].iter().map(|&i| order[i]).collect();
            inliers.sort_unstable();
            EdgeLineFit {
                edge,
                point: origin + u_axis * l.point.x + v_axis * l.point.y,
                direction: (u_axis * dir.x + v_axis * dir.y).normalize(),
                inliers,
            }
        })
        .collect();
    Ok(fits.try_into().expect("four fits"))
}
