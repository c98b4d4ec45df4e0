//! Planar segment predicates used for cable-crossing detection.

use crate::farm::Point;

/// Collinearity threshold on the orientation cross product. Grid layouts
/// produce exactly collinear candidates, so the tolerance stays tight.
pub const COLLINEAR_EPS: f64 = 1e-9;

/// Sign of the cross product (b - a) x (c - a): +1 counter-clockwise,
/// -1 clockwise, 0 collinear within `COLLINEAR_EPS`.
pub fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if cross > COLLINEAR_EPS {
        1
    } else if cross < -COLLINEAR_EPS {
        -1
    } else {
        0
    }
}

/// True iff the open interiors of the two segments intersect, or the
/// segments are collinear with overlapping interiors. Sharing only an
/// endpoint (or touching in a T) does not count.
pub fn segments_cross(a: (Point, Point), b: (Point, Point)) -> bool {
    let o1 = orientation(a.0, a.1, b.0);
    let o2 = orientation(a.0, a.1, b.1);
    let o3 = orientation(b.0, b.1, a.0);
    let o4 = orientation(b.0, b.1, a.1);

    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }

    if o1 == 0 && o2 == 0 {
        // Collinear: project on the dominant axis and require the open
        // intervals to overlap by more than the tolerance.
        let dx = (a.0.x - a.1.x).abs().max((b.0.x - b.1.x).abs());
        let dy = (a.0.y - a.1.y).abs().max((b.0.y - b.1.y).abs());
        let key = |p: Point| if dx >= dy { p.x } else { p.y };
        let (a_lo, a_hi) = ordered(key(a.0), key(a.1));
        let (b_lo, b_hi) = ordered(key(b.0), key(b.1));
        return a_lo.max(b_lo) + COLLINEAR_EPS < a_hi.min(b_hi);
    }

    false
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn proper_crossing() {
        assert!(segments_cross((p(0.0, 0.0), p(1.0, 1.0)), (p(0.0, 1.0), p(1.0, 0.0))));
    }

    #[test]
    fn shared_endpoint_is_not_a_crossing() {
        assert!(!segments_cross((p(0.0, 0.0), p(1.0, 0.0)), (p(1.0, 0.0), p(2.0, 1.0))));
    }

    #[test]
    fn collinear_overlap_counts() {
        assert!(segments_cross((p(0.0, 0.0), p(2.0, 0.0)), (p(1.0, 0.0), p(3.0, 0.0))));
    }

    #[test]
    fn collinear_touching_end_to_end_does_not() {
        assert!(!segments_cross((p(0.0, 0.0), p(1.0, 0.0)), (p(1.0, 0.0), p(2.0, 0.0))));
    }

    #[test]
    fn t_junction_does_not_count() {
        // Endpoint of one segment in the interior of the other: interiors
        // do not intersect.
        assert!(!segments_cross((p(0.0, 0.0), p(2.0, 0.0)), (p(1.0, 0.0), p(1.0, 1.0))));
    }

    #[test]
    fn containment_of_collinear_segment_counts() {
        assert!(segments_cross((p(0.0, 0.0), p(3.0, 0.0)), (p(1.0, 0.0), p(2.0, 0.0))));
    }

    #[test]
    fn disjoint_parallel_segments_do_not_cross() {
        assert!(!segments_cross((p(0.0, 0.0), p(1.0, 0.0)), (p(0.0, 1.0), p(1.0, 1.0))));
    }

    #[test]
    fn crossing_is_symmetric() {
        let cases = [
            ((p(0.0, 0.0), p(1.0, 1.0)), (p(0.0, 1.0), p(1.0, 0.0))),
            ((p(0.0, 0.0), p(2.0, 0.0)), (p(1.0, 0.0), p(3.0, 0.0))),
            ((p(0.0, 0.0), p(1.0, 0.0)), (p(1.0, 0.0), p(2.0, 1.0))),
            ((p(0.0, 0.0), p(2.0, 0.0)), (p(1.0, 0.0), p(1.0, 1.0))),
        ];
        for (a, b) in cases {
            assert_eq!(segments_cross(a, b), segments_cross(b, a));
        }
    }
}
