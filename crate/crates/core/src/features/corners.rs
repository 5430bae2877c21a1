use crate::geom::ImageLine;
use crate::prelude::*;

/// Line `j` joins corner `j` and corner `j + 1 (mod 4)`.
pub fn image_lines_from_corners(corners: &[Vec2; 4]) -> Result<[ImageLine; 4]> {
    let mut lines = [ImageLine::new(1.0, 0.0, 0.0)?; 4];
    for j in 0..4 {
        lines[j] = ImageLine::through(&corners[j], &corners[(j + 1) % 4])?;
    }
    Ok(lines)
}

/// Orders image corners counterclockwise as seen by the camera (image v
/// grows downward), starting so that edge 0 is the topmost edge. Returns the
/// indices into `corners` in canonical order.
pub fn canonical_corner_order(corners: &[Vec2; 4]) -> [usize; 4] {
    let c = corners.iter().sum::<Vec2>() / 4.0;
    let angle = |p: &Vec2| (c.y - p.y).atan2(p.x - c.x);
    let mut ccw = [0usize, 1, 2, 3];
    ccw.sort_by(|&a, &b| angle(&corners[a]).total_cmp(&angle(&corners[b])));
    let mid = |k: usize| 0.5 * (corners[ccw[k]] + corners[ccw[(k + 1) % 4]]);
    let top = (0..4)
        .min_by(|&a, &b| {
            let (ma, mb) = (mid(a), mid(b));
            ma.y.total_cmp(&mb.y).then(ma.x.total_cmp(&mb.x))
        })
        .unwrap_or(0);
    [
        ccw[top],
        ccw[(top + 1) % 4],
        ccw[(top + 2) % 4],
        ccw[(top + 3) % 4],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::intersect_lines;

    #[test]
    fn unit_square_lines() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        let lines = image_lines_from_corners(&sq).unwrap();
        let expected = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, -1.0],
            [1.0, 0.0, -1.0],
            [0.0, 1.0, 0.0],
        ];
        for (l, e) in lines.iter().zip(expected) {
            let h = l.coeffs();
            let same = (h - Vec3::from(e)).norm() < 1e-12 || (h + Vec3::from(e)).norm() < 1e-12;
            assert!(same, "{h:?}");
        }
    }

    #[test]
    fn lines_pass_through_endpoints_and_meet_at_corners() {
        let c = [
            Vec2::new(410.0, 120.5),
            Vec2::new(150.2, 170.0),
            Vec2::new(190.0, 420.0),
            Vec2::new(470.7, 380.1),
        ];
        let lines = image_lines_from_corners(&c).unwrap();
        for j in 0..4 {
            assert!(lines[j].coeffs().dot(&c[j].push(1.0)).abs() < 1e-12);
            assert!(lines[j].coeffs().dot(&c[(j + 1) % 4].push(1.0)).abs() < 1e-12);
            let p = intersect_lines(&lines[j], &lines[(j + 1) % 4]).unwrap();
            assert!((p - c[(j + 1) % 4]).norm() < 1e-9);
        }
        let dup = [c[0], c[0], c[2], c[3]];
        assert_eq!(
            image_lines_from_corners(&dup).unwrap_err(),
            Error::CoincidentCorners
        );
    }

    #[test]
    fn canonical_order_starts_at_top_edge() {
        // Top-right, top-left, bottom-left, bottom-right on screen.
        let c = [
            Vec2::new(400.0, 100.0),
            Vec2::new(100.0, 130.0),
            Vec2::new(120.0, 400.0),
            Vec2::new(420.0, 380.0),
        ];
        assert_eq!(canonical_corner_order(&c), [0, 1, 2, 3]);
        let shuffled = [c[2], c[0], c[3], c[1]];
        assert_eq!(canonical_corner_order(&shuffled), [1, 3, 0, 2]);
    }
}
