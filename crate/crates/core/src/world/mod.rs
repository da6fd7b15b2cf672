//! Scene entities, holonomic kinematics and per-frame snapshots.
//!
//! Angles are counter-clockwise from +x and always wrapped to `(-π, π]`.
//! Field names on the serialized forms follow the published topic schemas
//! (`x`, `y`, `angle`, `ix`, `sideX`, `wall_id`, `identifier`, ...).

mod geometry;
mod kinematics;

pub use geometry::{
    angle_wrap, is_simple_polygon, point_in_polygon, point_segment_distance, robot_to_world,
    rotate_into, segment_distance, signed_area, world_to_robot, Point2,
};
pub(crate) use geometry::wrap;
pub use kinematics::{disc_fits, step_robot, step_robot_in_room, Command, Label, SpeedCaps};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("invalid room: {0}")]
    InvalidRoom(String),
    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "angle")]
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: wrap(theta),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn mirrored(&self) -> Pose2D {
        Pose2D {
            x: self.x,
            y: -self.y,
            theta: wrap(-self.theta),
        }
    }
}

/// Per-tick pose change of a human (`ix`, `iy`, `iangle` on the wire):
/// velocity × dt.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseIncrement {
    pub ix: f64,
    pub iy: f64,
    pub iangle: f64,
}

impl PoseIncrement {
    pub const ZERO: PoseIncrement = PoseIncrement {
        ix: 0.0,
        iy: 0.0,
        iangle: 0.0,
    };

    /// `(vx, vy, vtheta)` for a tick of length `dt`.
    pub fn velocity(&self, dt: f64) -> (f64, f64, f64) {
        (self.ix / dt, self.iy / dt, self.iangle / dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mobility {
    Static,
    Walker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Human {
    pub id: u32,
    #[serde(flatten)]
    pub pose: Pose2D,
    #[serde(flatten)]
    pub increment: PoseIncrement,
    pub mobility: Mobility,
    pub group_id: Option<u32>,
    /// Current navigation target of a walker.
    pub waypoint: Option<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Table,
    Laptop,
    Plant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    #[serde(flatten)]
    pub pose: Pose2D,
    #[serde(rename = "sideX")]
    pub side_x: f64,
    #[serde(rename = "sideY")]
    pub side_y: f64,
    pub kind: ObjectKind,
}

impl SceneObject {
    /// Radius of the disc circumscribing the footprint.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.side_x.hypot(self.side_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    #[serde(rename = "wall_id")]
    pub id: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Wall {
    pub fn new(id: u32, p1: Point2, p2: Point2) -> Self {
        Wall {
            id,
            x1: p1.x,
            y1: p1.y,
            x2: p2.x,
            y2: p2.y,
        }
    }

    pub fn p1(&self) -> Point2 {
        Point2::new(self.x1, self.y1)
    }

    pub fn p2(&self) -> Point2 {
        Point2::new(self.x2, self.y2)
    }

    pub fn length(&self) -> f64 {
        self.p1().distance(self.p2())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    #[serde(rename = "identifier")]
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

impl Goal {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    HumanHumanTalking,
    HumanLaptopInteraction,
    HumanHumanWalking,
}

impl InteractionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InteractionKind::HumanHumanTalking => "human_human_talking",
            InteractionKind::HumanLaptopInteraction => "human_laptop_interaction",
            InteractionKind::HumanHumanWalking => "human_human_walking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub entity1_id: u32,
    pub entity2_id: u32,
    #[serde(rename = "interaction_type")]
    pub kind: InteractionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomShape {
    Rectangle,
    LShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub shape: RoomShape,
    pub polygon: Vec<Point2>,
}

impl Room {
    /// Axis-aligned rectangle centered at the origin.
    pub fn rectangle(width: f64, height: f64) -> Room {
        let (w, h) = (width / 2.0, height / 2.0);
        Room {
            shape: RoomShape::Rectangle,
            polygon: vec![
                Point2::new(-w, -h),
                Point2::new(w, -h),
                Point2::new(w, h),
                Point2::new(-w, h),
            ],
        }
    }

    /// A `width × height` rectangle centered at `center` with its top-right
    /// `cut_w × cut_h` corner removed.
    pub fn l_shape(center: Point2, width: f64, height: f64, cut_w: f64, cut_h: f64) -> Room {
        let (x0, x1) = (center.x - width / 2.0, center.x + width / 2.0);
        let (y0, y1) = (center.y - height / 2.0, center.y + height / 2.0);
        Room {
            shape: RoomShape::LShape,
            polygon: vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1 - cut_h),
                Point2::new(x1 - cut_w, y1 - cut_h),
                Point2::new(x1 - cut_w, y1),
                Point2::new(x0, y1),
            ],
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_polygon(&self.polygon, p)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.polygon).abs()
    }

    pub fn is_ccw(&self) -> bool {
        signed_area(&self.polygon) > 0.0
    }

    /// `(min, max)` corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.polygon {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.polygon.len();
        (0..n).map(move |i| (self.polygon[i], self.polygon[(i + 1) % n]))
    }

    /// Walls along the polygon edges, ids assigned from `first_id`.
    pub fn walls(&self, first_id: u32) -> Vec<Wall> {
        self.edges()
            .enumerate()
            .map(|(i, (a, b))| Wall::new(first_id + i as u32, a, b))
            .collect()
    }

    pub fn wall_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reflection across the x-axis. The winding flips to clockwise.
    pub fn mirrored(&self) -> Room {
        Room {
            shape: self.shape,
            polygon: self.polygon.iter().map(|p| p.mirrored()).collect(),
        }
    }

    /// Checks the vertex count for the shape and simplicity. Winding is
    /// checked separately because mirrored rooms are clockwise.
    pub fn validate(&self) -> Result<(), WorldError> {
        let expected = match self.shape {
            RoomShape::Rectangle => 4,
            RoomShape::LShape => 6,
        };
        if self.polygon.len() != expected {
            return Err(WorldError::InvalidRoom(format!(
                "{:?} room needs {expected} vertices, found {}",
                self.shape,
                self.polygon.len()
            )));
        }
        if self.polygon.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(WorldError::InvalidRoom("non-finite vertex".into()));
        }
        if !is_simple_polygon(&self.polygon) {
            return Err(WorldError::InvalidRoom("polygon is not simple".into()));
        }
        Ok(())
    }
}

/// Scene state at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub frame_id: u64,
    pub sim_time: f64,
    pub robot: Pose2D,
    pub room: Room,
    pub humans: Vec<Human>,
    pub objects: Vec<SceneObject>,
    pub walls: Vec<Wall>,
    pub goal: Goal,
    pub interactions: Vec<Interaction>,
}

impl WorldSnapshot {
    pub fn human(&self, id: u32) -> Option<&Human> {
        self.humans.iter().find(|h| h.id == id)
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Position of a human or object by id.
    pub fn entity_position(&self, id: u32) -> Option<Point2> {
        self.human(id)
            .map(|h| h.pose.position())
            .or_else(|| self.object(id).map(|o| o.pose.position()))
    }

    /// Ids of every human, object, wall and the goal.
    pub fn entity_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .humans
            .iter()
            .map(|h| h.id)
            .chain(self.objects.iter().map(|o| o.id))
            .chain(self.walls.iter().map(|w| w.id))
            .collect();
        ids.push(self.goal.id);
        ids
    }

    /// Reflection across the world x-axis: `y → -y`, `θ → -θ`, and the same
    /// for increments, waypoints, wall endpoints and the goal.
    pub fn mirrored(&self) -> WorldSnapshot {
        WorldSnapshot {
            frame_id: self.frame_id,
            sim_time: self.sim_time,
            robot: self.robot.mirrored(),
            room: self.room.mirrored(),
            humans: self
                .humans
                .iter()
                .map(|h| Human {
                    pose: h.pose.mirrored(),
                    increment: PoseIncrement {
                        ix: h.increment.ix,
                        iy: -h.increment.iy,
                        iangle: -h.increment.iangle,
                    },
                    waypoint: h.waypoint.map(Point2::mirrored),
                    ..h.clone()
                })
                .collect(),
            objects: self
                .objects
                .iter()
                .map(|o| SceneObject {
                    pose: o.pose.mirrored(),
                    ..o.clone()
                })
                .collect(),
            walls: self
                .walls
                .iter()
                .map(|w| Wall {
                    y1: -w.y1,
                    y2: -w.y2,
                    ..w.clone()
                })
                .collect(),
            goal: Goal {
                y: -self.goal.y,
                ..self.goal.clone()
            },
            interactions: self.interactions.clone(),
        }
    }

    /// Structural invariants of a single snapshot. `ccw` selects the
    /// expected room winding.
    pub fn validate(&self, ccw: bool) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidSnapshot(m));
        self.room.validate()?;
        if self.room.is_ccw() != ccw {
            return bad(format!(
                "room winding is {}, expected {}",
                if self.room.is_ccw() { "counter-clockwise" } else { "clockwise" },
                if ccw { "counter-clockwise" } else { "clockwise" }
            ));
        }
        if !(self.sim_time >= 0.0) {
            return bad(format!("sim_time {} is negative", self.sim_time));
        }

        let ids = self.entity_ids();
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(*id) {
                return bad(format!("duplicate entity id {id}"));
            }
        }

        let edges: Vec<_> = self.room.edges().collect();
        if edges.len() != self.walls.len() {
            return bad(format!(
                "{} walls for a room with {} edges",
                self.walls.len(),
                edges.len()
            ));
        }
        for (wall, (a, b)) in self.walls.iter().zip(edges) {
            if wall.p1() == wall.p2() {
                return bad(format!("wall {} is degenerate", wall.id));
            }
            if wall.p1() != a || wall.p2() != b {
                return bad(format!("wall {} does not match its room edge", wall.id));
            }
        }

        for o in &self.objects {
            if !(o.side_x > 0.0 && o.side_y > 0.0) {
                return bad(format!("object {} has a non-positive side", o.id));
            }
        }
        for h in &self.humans {
            if h.pose.theta <= -std::f64::consts::PI || h.pose.theta > std::f64::consts::PI {
                return bad(format!("human {} angle not wrapped", h.id));
            }
        }

        for i in &self.interactions {
            if i.entity1_id == i.entity2_id {
                return bad(format!("interaction links entity {} to itself", i.entity1_id));
            }
            for id in [i.entity1_id, i.entity2_id] {
                if self.entity_position(id).is_none() {
                    return bad(format!("interaction references unknown entity {id}"));
                }
            }
        }

        if !self.room.contains(self.goal.position()) {
            return bad("goal lies outside the room".into());
        }
        Ok(())
    }
}
