use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{GraphError, NodeType};
use crate::controller::R_GOAL;
use crate::world::{rotate_into, segment_distance, wrap, world_to_robot, Point2, Pose2D, SpeedCaps, WorldSnapshot};

pub const FEATURE_LEN: usize = 42;
pub const MAX_FRAMES: usize = 3;

pub const ONE_HOT_TYPE: Range<usize> = 0..5;
pub const ONE_HOT_FRAME: Range<usize> = 5..8;
pub const TIME_BLOCK: Range<usize> = 8..10;
pub const PERSON_BLOCK: Range<usize> = 10..18;
pub const OBJECT_BLOCK: Range<usize> = 18..26;
pub const ROOM_BLOCK: Range<usize> = 26..30;
pub const WALL_BLOCK: Range<usize> = 30..38;
pub const GOAL_BLOCK: Range<usize> = 38..42;

/// Linear normalizer in meters.
pub const NORM_DISTANCE: f64 = 6.0;
const NORM_TIME: f64 = 100.0;
const NORM_STEPS: f64 = 1000.0;
const NORM_COUNT: f64 = 10.0;
const NORM_AREA: f64 = 100.0;

/// Column names, in order.
pub const FEATURE_NAMES: [&str; FEATURE_LEN] = [
    "type_human",
    "type_object",
    "type_wall",
    "type_goal",
    "type_room",
    "frame_0",
    "frame_1",
    "frame_2",
    "ts_time",
    "ts_step",
    "human_x",
    "human_y",
    "human_sin",
    "human_cos",
    "human_vx",
    "human_vy",
    "human_vangle",
    "human_dist",
    "object_x",
    "object_y",
    "object_sin",
    "object_cos",
    "object_side_x",
    "object_side_y",
    "object_dist",
    "object_half_diagonal",
    "room_humans",
    "room_objects",
    "room_walls",
    "room_area",
    "wall_x1",
    "wall_y1",
    "wall_x2",
    "wall_y2",
    "wall_sin",
    "wall_cos",
    "wall_length",
    "wall_dist",
    "goal_x",
    "goal_y",
    "goal_dist",
    "goal_reached",
];

/// Columns that change sign under reflection across the world x-axis.
const MIRROR_NEGATED: [usize; 10] = [11, 12, 15, 16, 19, 20, 31, 33, 34, 39];

/// Node of one frame, by entity id where it has one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "id")]
pub enum NodeRef {
    Human(u32),
    Object(u32),
    Wall(u32),
    Goal(u32),
    Room,
}

impl NodeRef {
    pub fn node_type(self) -> NodeType {
        match self {
            NodeRef::Human(_) => NodeType::Human,
            NodeRef::Object(_) => NodeType::Object,
            NodeRef::Wall(_) => NodeType::Wall,
            NodeRef::Goal(_) => NodeType::Goal,
            NodeRef::Room => NodeType::Room,
        }
    }

    pub fn entity_id(self) -> Option<u32> {
        match self {
            NodeRef::Human(id) | NodeRef::Object(id) | NodeRef::Wall(id) | NodeRef::Goal(id) => Some(id),
            NodeRef::Room => None,
        }
    }
}

/// Normalizers that come from the episode rather than the layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub caps: SpeedCaps,
    /// Tick length, to turn human pose increments into velocities.
    pub dt: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            caps: SpeedCaps::default(),
            dt: crate::controller::DEFAULT_DT,
        }
    }
}

/// Feature row of one node. Geometry is expressed in the frame of `robot`,
/// linear quantities are divided by [`NORM_DISTANCE`] and velocities by the
/// speed caps; blocks not owned by the node type stay zero.
pub fn featurize_node(
    node: NodeRef,
    snapshot: &WorldSnapshot,
    robot: &Pose2D,
    t: f64,
    step: u64,
    frame_index: usize,
    params: &FeatureParams,
) -> Result<[f64; FEATURE_LEN], GraphError> {
    if frame_index >= MAX_FRAMES {
        return Err(GraphError::FrameIndex(frame_index));
    }
    let mut row = [0.0; FEATURE_LEN];
    row[ONE_HOT_TYPE.start + node.node_type().index()] = 1.0;
    row[ONE_HOT_FRAME.start + frame_index] = 1.0;
    row[TIME_BLOCK.start] = (t / NORM_TIME).min(1.0);
    row[TIME_BLOCK.start + 1] = (step as f64 / NORM_STEPS).min(1.0);

    let d = NORM_DISTANCE;
    let local = |p: Point2| world_to_robot(p, robot);
    let unknown = || GraphError::UnknownNode(node);
    let block: Vec<f64> = match node {
        NodeRef::Human(id) => {
            let h = snapshot.human(id).ok_or_else(unknown)?;
            let p = local(h.pose.position());
            let rel = wrap(h.pose.theta - robot.theta);
            let (vx, vy, va) = h.increment.velocity(params.dt);
            let v = rotate_into(Point2::new(vx, vy), robot.theta);
            vec![
                p.x / d,
                p.y / d,
                libm::sin(rel),
                libm::cos(rel),
                v.x / params.caps.advance,
                v.y / params.caps.lateral,
                va / params.caps.rotation,
                p.norm() / d,
            ]
        }
        NodeRef::Object(id) => {
            let o = snapshot.object(id).ok_or_else(unknown)?;
            let p = local(o.pose.position());
            let rel = wrap(o.pose.theta - robot.theta);
            vec![
                p.x / d,
                p.y / d,
                libm::sin(rel),
                libm::cos(rel),
                o.side_x / d,
                o.side_y / d,
                p.norm() / d,
                o.half_diagonal() / d,
            ]
        }
        NodeRef::Wall(id) => {
            let w = snapshot.walls.iter().find(|w| w.id == id).ok_or_else(unknown)?;
            let a = local(w.p1());
            let b = local(w.p2());
            let len = a.distance(b);
            let (sin, cos) = if len > 0.0 {
                ((b.y - a.y) / len, (b.x - a.x) / len)
            } else {
                (0.0, 1.0)
            };
            vec![
                a.x / d,
                a.y / d,
                b.x / d,
                b.y / d,
                sin,
                cos,
                len / d,
                segment_distance(Point2::new(0.0, 0.0), a, b) / d,
            ]
        }
        NodeRef::Goal(id) => {
            if snapshot.goal.id != id {
                return Err(unknown());
            }
            let p = local(snapshot.goal.position());
            let reached = robot.position().distance(snapshot.goal.position()) < R_GOAL;
            vec![p.x / d, p.y / d, p.norm() / d, if reached { 1.0 } else { 0.0 }]
        }
        NodeRef::Room => vec![
            snapshot.humans.len() as f64 / NORM_COUNT,
            snapshot.objects.len() as f64 / NORM_COUNT,
            snapshot.walls.len() as f64 / NORM_COUNT,
            snapshot.room.area() / NORM_AREA,
        ],
    };
    row[node.node_type().block()].copy_from_slice(&block);
    Ok(row)
}

/// The feature row of the mirrored node: y coordinates, sines, lateral and
/// angular velocities change sign, everything else is kept.
pub fn mirror_feature_row(row: &[f64]) -> Vec<f64> {
    let mut out = row.to_vec();
    for i in MIRROR_NEGATED {
        out[i] = -out[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Goal, Room};

    fn snapshot() -> WorldSnapshot {
        let room = Room::rectangle(8.0, 6.0);
        WorldSnapshot {
            frame_id: 50,
            sim_time: 5.0,
            robot: Pose2D::new(1.0, 1.0, 0.3),
            walls: room.walls(1),
            room,
            humans: vec![],
            objects: vec![],
            goal: Goal { id: 9, x: 1.0, y: 1.0 },
            interactions: vec![],
        }
    }

    #[test]
    fn layout_adds_up() {
        let blocks = [
            ONE_HOT_TYPE,
            ONE_HOT_FRAME,
            TIME_BLOCK,
            PERSON_BLOCK,
            OBJECT_BLOCK,
            ROOM_BLOCK,
            WALL_BLOCK,
            GOAL_BLOCK,
        ];
        let mut next = 0;
        for b in blocks {
            assert_eq!(b.start, next);
            next = b.end;
        }
        assert_eq!(next, FEATURE_LEN);
        for i in MIRROR_NEGATED {
            let name = FEATURE_NAMES[i];
            assert!(name.contains('y') || name.contains("sin") || name.contains("vangle"), "{name}");
        }
    }

    #[test]
    fn goal_under_robot() {
        let s = snapshot();
        let row = featurize_node(NodeRef::Goal(9), &s, &s.robot, 5.0, 50, 0, &FeatureParams::default()).unwrap();
        assert_eq!(&row[GOAL_BLOCK], &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(&row[ONE_HOT_TYPE], &[0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(&row[TIME_BLOCK], &[0.05, 0.05]);
        assert!(row[PERSON_BLOCK.start..GOAL_BLOCK.start].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn time_saturates() {
        let s = snapshot();
        let row = featurize_node(NodeRef::Room, &s, &s.robot, 250.0, 5000, 2, &FeatureParams::default()).unwrap();
        assert_eq!(&row[TIME_BLOCK], &[1.0, 1.0]);
        assert_eq!(&row[ONE_HOT_FRAME], &[0.0, 0.0, 1.0]);
        assert_eq!(&row[ROOM_BLOCK], &[0.0, 0.0, 0.4, 0.48]);
    }

    #[test]
    fn unknown_node_and_frame() {
        let s = snapshot();
        let p = FeatureParams::default();
        assert!(matches!(
            featurize_node(NodeRef::Human(3), &s, &s.robot, 0.0, 0, 0, &p),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(matches!(
            featurize_node(NodeRef::Room, &s, &s.robot, 0.0, 0, 3, &p),
            Err(GraphError::FrameIndex(3))
        ));
    }

    #[test]
    fn wall_in_robot_frame() {
        let mut s = snapshot();
        s.robot = Pose2D::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        // Bottom wall of the 8x6 room runs from (-4,-3) to (4,-3); seen from a
        // robot facing +y it lies behind, running right to left.
        let row = featurize_node(NodeRef::Wall(1), &s, &s.robot, 0.0, 0, 0, &FeatureParams::default()).unwrap();
        let w = &row[WALL_BLOCK];
        let expect = [-3.0 / 6.0, 4.0 / 6.0, -3.0 / 6.0, -4.0 / 6.0, -1.0, 0.0, 8.0 / 6.0, 0.5];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }
}
