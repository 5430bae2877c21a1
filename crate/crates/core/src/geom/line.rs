use super::{Vec2, Vec3, UNIT_SLACK};
use crate::prelude::*;

/// Image line `a u + b v + c = 0`, stored with `a^2 + b^2 = 1` so that
/// `|l . [u, v, 1]|` is a distance in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageLine {
    coeffs: Vec3,
}

impl ImageLine {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_homogeneous(Vec3::new(a, b, c))
    }

    pub fn from_homogeneous(h: Vec3) -> Result<Self> {
        let n = (h.x * h.x + h.y * h.y).sqrt();
        if !(n.is_finite() && n > 1e-300) || !h.z.is_finite() {
            return Err(Error::DegenerateLine);
        }
        let coeffs = if (n - 1.0).abs() <= UNIT_SLACK {
            h
        } else {
            h / n
        };
        Ok(Self { coeffs })
    }

    /// Line through two pixels.
    pub fn through(p: &Vec2, q: &Vec2) -> Result<Self> {
        if (p - q).norm() < 1e-12 {
            return Err(Error::CoincidentCorners);
        }
        Self::from_homogeneous(Vec3::new(p.x, p.y, 1.0).cross(&Vec3::new(q.x, q.y, 1.0)))
    }

    pub fn coeffs(&self) -> Vec3 {
        self.coeffs
    }

    pub fn signed_distance(&self, p: &Vec2) -> f64 {
        self.coeffs.x * p.x + self.coeffs.y * p.y + self.coeffs.z
    }

    pub fn distance(&self, p: &Vec2) -> f64 {
        self.signed_distance(p).abs()
    }
}

/// Pixel where two lines meet.
pub fn intersect_lines(l1: &ImageLine, l2: &ImageLine) -> Result<Vec2> {
    let h = l1.coeffs.cross(&l2.coeffs);
    if h.z.abs() < 1e-12 * h.norm() || h.z == 0.0 {
        return Err(Error::ParallelLines);
    }
    Ok(Vec2::new(h.x / h.z, h.y / h.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn axis_intersections() {
        let x0 = ImageLine::new(1.0, 0.0, 0.0).unwrap();
        let y0 = ImageLine::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(intersect_lines(&x0, &y0).unwrap(), Vec2::new(0.0, 0.0));
        let x1 = ImageLine::new(1.0, 0.0, -1.0).unwrap();
        let y2 = ImageLine::new(0.0, 1.0, -2.0).unwrap();
        assert_relative_eq!(
            intersect_lines(&x1, &y2).unwrap(),
            Vec2::new(1.0, 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn diagonal_intersection() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let a = ImageLine::new(s, s, -2.0 * s).unwrap();
        let b = ImageLine::new(s, -s, 0.0).unwrap();
        // (1,1,-2) x (1,-1,0) = (-2, -2, -2)
        let h = Vec3::new(1.0, 1.0, -2.0).cross(&Vec3::new(1.0, -1.0, 0.0));
        let oracle = Vec2::new(h.x / h.z, h.y / h.z);
        assert_relative_eq!(intersect_lines(&a, &b).unwrap(), oracle, epsilon = 1e-15);
        assert_relative_eq!(oracle, Vec2::new(1.0, 1.0));
    }

    #[test]
    fn parallel_and_degenerate_lines() {
        let a = ImageLine::new(1.0, 0.0, 0.0).unwrap();
        let b = ImageLine::new(2.0, 0.0, -5.0).unwrap();
        assert_eq!(intersect_lines(&a, &b), Err(Error::ParallelLines));
        assert_eq!(ImageLine::new(0.0, 0.0, 1.0), Err(Error::DegenerateLine));
    }

    #[test]
    fn normalization_and_incidence() {
        let l = ImageLine::new(3.0, 4.0, 10.0).unwrap();
        let c = l.coeffs();
        assert!((c.x * c.x + c.y * c.y - 1.0).abs() < 1e-15);
        let p = Vec2::new(12.5, -3.0);
        let q = Vec2::new(-7.0, 40.0);
        let l = ImageLine::through(&p, &q).unwrap();
        assert!(l.distance(&p) < 1e-12 && l.distance(&q) < 1e-12);
        assert_eq!(ImageLine::through(&p, &p), Err(Error::CoincidentCorners));
    }
}
