use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::WorldError;

/// A point or free vector in meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Reflection across the world x-axis.
    pub fn mirrored(self) -> Point2 {
        Point2::new(self.x, -self.y)
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn angle_wrap(theta: f64) -> Result<f64, WorldError> {
    if !theta.is_finite() {
        return Err(WorldError::NonFinite("angle"));
    }
    Ok(wrap(theta))
}

/// Infallible wrap for values already known to be finite.
pub(crate) fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Express a world point in the frame of `robot`: `R(-θ)·(p - t)`.
pub fn world_to_robot(point: Point2, robot: &super::Pose2D) -> Point2 {
    let (s, c) = (libm::sin(robot.theta), libm::cos(robot.theta));
    let dx = point.x - robot.x;
    let dy = point.y - robot.y;
    Point2::new(c * dx + s * dy, -s * dx + c * dy)
}

/// Inverse of [`world_to_robot`].
pub fn robot_to_world(point: Point2, robot: &super::Pose2D) -> Point2 {
    let (s, c) = (libm::sin(robot.theta), libm::cos(robot.theta));
    Point2::new(
        robot.x + c * point.x - s * point.y,
        robot.y + s * point.x + c * point.y,
    )
}

/// Rotate a free vector into the robot frame (no translation).
pub fn rotate_into(v: Point2, theta: f64) -> Point2 {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Point2::new(c * v.x + s * v.y, -s * v.x + c * v.y)
}

/// Euclidean distance from `p` to the closed segment `a`–`b`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return ap.norm();
    }
    let t = (ap.dot(ab) / len2).clamp(0.0, 1.0);
    let foot = Point2::new(a.x + t * ab.x, a.y + t * ab.y);
    p.distance(foot)
}

/// Distance from a point to a wall.
pub fn point_segment_distance(point: Point2, wall: &super::Wall) -> f64 {
    segment_distance(point, wall.p1(), wall.p2())
}

const BOUNDARY_EPS: f64 = 1e-12;

/// Even-odd containment; points on the boundary count as inside.
pub fn point_in_polygon(polygon: &[Point2], p: Point2) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        if segment_distance(p, a, b) <= BOUNDARY_EPS {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Shoelace signed area; positive for counter-clockwise winding.
pub fn signed_area(polygon: &[Point2]) -> f64 {
    let n = polygon.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if (o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0) && o1 != 0.0 && o2 != 0.0 && o3 != 0.0 && o4 != 0.0 {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// True when no two non-adjacent edges touch and no edge is degenerate.
pub fn is_simple_polygon(polygon: &[Point2]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if polygon[i] == polygon[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]) {
                return false;
            }
        }
    }
    signed_area(polygon) != 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Pose2D;
    use proptest::prelude::*;

    fn unit_square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    fn l_room() -> Vec<Point2> {
        // [0,4]² minus [2,4]×[2,4]
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 2.0),
            Point2::new(2.0, 2.0),
            Point2::new(2.0, 4.0),
            Point2::new(0.0, 4.0),
        ]
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(angle_wrap(0.0).unwrap(), 0.0);
        assert!((angle_wrap(3.0 * PI).unwrap() - PI).abs() < 1e-12);
        assert_eq!(angle_wrap(-PI).unwrap(), PI);
        assert_eq!(angle_wrap(PI).unwrap(), PI);
        assert!(angle_wrap(f64::NAN).is_err());
        assert!(angle_wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn transform_examples() {
        let p = world_to_robot(Point2::new(1.0, 0.0), &Pose2D::new(1.0, 0.0, 0.0));
        assert_eq!(p, Point2::new(0.0, 0.0));
        let p = world_to_robot(Point2::new(0.0, 1.0), &Pose2D::new(0.0, 0.0, PI / 2.0));
        assert!((p.x - 1.0).abs() < 1e-12 && p.y.abs() < 1e-12);
    }

    #[test]
    fn segment_distance_examples() {
        let a = Point2::new(-1.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        assert_eq!(segment_distance(Point2::new(0.0, 1.0), a, b), 1.0);
        assert_eq!(segment_distance(Point2::new(2.0, 0.0), a, b), 1.0);
    }

    #[test]
    fn containment_examples() {
        assert!(point_in_polygon(&unit_square(), Point2::new(0.5, 0.5)));
        assert!(!point_in_polygon(&unit_square(), Point2::new(2.0, 0.0)));
        assert!(point_in_polygon(&unit_square(), Point2::new(1.0, 0.3)));
        assert!(point_in_polygon(&unit_square(), Point2::new(0.0, 0.0)));
        assert!(!point_in_polygon(&l_room(), Point2::new(3.0, 3.0)));
        assert!(point_in_polygon(&l_room(), Point2::new(1.0, 3.0)));
        assert!(point_in_polygon(&l_room(), Point2::new(3.0, 1.0)));
    }

    /// Brute-force oracle for the L-room: sample a grid and compare against
    /// the set description `[0,4]² \ (2,4]×(2,4]`.
    #[test]
    fn l_room_grid_oracle() {
        let poly = l_room();
        for i in 0..=90 {
            for j in 0..=90 {
                let p = Point2::new(-0.5 + i as f64 * 0.0557, -0.5 + j as f64 * 0.0557);
                let in_square = (0.0..=4.0).contains(&p.x) && (0.0..=4.0).contains(&p.y);
                let in_notch = p.x > 2.0 && p.y > 2.0;
                assert_eq!(point_in_polygon(&poly, p), in_square && !in_notch, "{p:?}");
            }
        }
    }

    #[test]
    fn simple_and_area() {
        assert!(is_simple_polygon(&unit_square()));
        assert!(is_simple_polygon(&l_room()));
        assert_eq!(signed_area(&l_room()), 12.0);
        let bowtie = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(!is_simple_polygon(&bowtie));
        let mut cw = unit_square();
        cw.reverse();
        assert!(signed_area(&cw) < 0.0);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_congruent(theta in -1e4f64..1e4) {
            let w = angle_wrap(theta).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(angle_wrap(w).unwrap(), w);
            let k = ((theta - w) / TAU).round();
            prop_assert!((theta - w - k * TAU).abs() < 1e-9);
        }

        #[test]
        fn transform_is_rigid(
            ax in -20.0f64..20.0, ay in -20.0f64..20.0,
            bx in -20.0f64..20.0, by in -20.0f64..20.0,
            rx in -20.0f64..20.0, ry in -20.0f64..20.0, th in -PI..PI,
        ) {
            let robot = Pose2D::new(rx, ry, th);
            let a = Point2::new(ax, ay);
            let b = Point2::new(bx, by);
            let ta = world_to_robot(a, &robot);
            let tb = world_to_robot(b, &robot);
            prop_assert!((ta.distance(tb) - a.distance(b)).abs() < 1e-12);
            let back = robot_to_world(ta, &robot);
            prop_assert!(back.distance(a) < 1e-12);
            prop_assert_eq!(world_to_robot(Point2::new(rx, ry), &robot), Point2::new(0.0, 0.0));
        }
    }
}
