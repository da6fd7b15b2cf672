use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{featurize_node, EdgeRelation, FeatureParams, GraphError, NodeRef, NodeType, FEATURE_LEN};
use crate::canonical;
use crate::recorder::Episode;
use crate::world::{Label, Pose2D, WorldSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    #[serde(rename = "type")]
    pub node_type: NodeType,
    /// 0 is the newest frame of the window.
    pub frame_index: usize,
    /// Human, object, wall or goal id; `None` for the room node.
    pub entity_id: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub relation: EdgeRelation,
}

/// The graph of a single frame. Node order: humans, objects, walls, goal,
/// room.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGraph {
    pub frame_id: u64,
    pub frame_index: usize,
    pub nodes: Vec<NodeRef>,
    pub edges: Vec<GraphEdge>,
    pub features: Vec<[f64; FEATURE_LEN]>,
}

/// A bonded window of frame graphs with its command label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSample {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    /// One row of [`FEATURE_LEN`] columns per node.
    pub features: Vec<Vec<f64>>,
    pub label: Label,
}

impl GraphSample {
    /// The value this sample becomes after an export/import round trip.
    pub fn canonical(&self) -> GraphSample {
        canonical::canonicalize(self).expect("features are finite")
    }

    pub fn count_relation(&self, relation: EdgeRelation) -> usize {
        self.edges.iter().filter(|e| e.relation == relation).count()
    }
}

pub fn build_frame_graph(
    snapshot: &WorldSnapshot,
    robot: &Pose2D,
    t: f64,
    step: u64,
    frame_index: usize,
    params: &FeatureParams,
) -> Result<FrameGraph, GraphError> {
    let mut nodes: Vec<NodeRef> = Vec::with_capacity(
        snapshot.humans.len() + snapshot.objects.len() + snapshot.walls.len() + 2,
    );
    nodes.extend(snapshot.humans.iter().map(|h| NodeRef::Human(h.id)));
    nodes.extend(snapshot.objects.iter().map(|o| NodeRef::Object(o.id)));
    nodes.extend(snapshot.walls.iter().map(|w| NodeRef::Wall(w.id)));
    nodes.push(NodeRef::Goal(snapshot.goal.id));
    nodes.push(NodeRef::Room);
    let room = nodes.len() - 1;

    let features = nodes
        .iter()
        .map(|n| featurize_node(*n, snapshot, robot, t, step, frame_index, params))
        .collect::<Result<Vec<_>, _>>()?;

    let mut edges = Vec::with_capacity(3 * nodes.len() + 2 * snapshot.interactions.len());
    for i in 0..room {
        edges.push(GraphEdge { src: room, dst: i, relation: EdgeRelation::RoomLink });
        edges.push(GraphEdge { src: i, dst: room, relation: EdgeRelation::RoomLinkRev });
    }
    let index: HashMap<u32, usize> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            NodeRef::Human(id) | NodeRef::Object(id) => Some((*id, i)),
            _ => None,
        })
        .collect();
    for inter in &snapshot.interactions {
        if let (Some(&a), Some(&b)) = (index.get(&inter.entity1_id), index.get(&inter.entity2_id)) {
            edges.push(GraphEdge { src: a, dst: b, relation: EdgeRelation::Interaction });
            edges.push(GraphEdge { src: b, dst: a, relation: EdgeRelation::InteractionRev });
        }
    }
    for i in 0..nodes.len() {
        edges.push(GraphEdge { src: i, dst: i, relation: EdgeRelation::SelfLoop });
    }
    Ok(FrameGraph {
        frame_id: snapshot.frame_id,
        frame_index,
        nodes,
        edges,
        features,
    })
}

/// Disjoint union of 2 or 3 frame graphs, `frames[0]` newest, plus one
/// temporal edge per node from each older frame to the next newer one.
pub fn assemble_window(frames: &[FrameGraph], label: Label) -> Result<GraphSample, GraphError> {
    if !(2..=super::MAX_FRAMES).contains(&frames.len()) {
        return Err(GraphError::Window(frames.len()));
    }
    for (k, f) in frames.iter().enumerate() {
        if f.frame_index != k {
            return Err(GraphError::NotConsecutive(format!(
                "frame at position {k} has frame_index {}",
                f.frame_index
            )));
        }
        if k > 0 && f.frame_id + 1 != frames[k - 1].frame_id {
            return Err(GraphError::NotConsecutive(format!(
                "frame {} does not directly precede frame {}",
                f.frame_id,
                frames[k - 1].frame_id
            )));
        }
    }
    let mut offsets = Vec::with_capacity(frames.len());
    let mut sample = GraphSample {
        nodes: Vec::new(),
        edges: Vec::new(),
        features: Vec::new(),
        label,
    };
    for f in frames {
        let offset = sample.nodes.len();
        offsets.push(offset);
        for (i, n) in f.nodes.iter().enumerate() {
            sample.nodes.push(GraphNode {
                id: offset + i,
                node_type: n.node_type(),
                frame_index: f.frame_index,
                entity_id: n.entity_id(),
            });
        }
        sample.edges.extend(f.edges.iter().map(|e| GraphEdge {
            src: e.src + offset,
            dst: e.dst + offset,
            relation: e.relation,
        }));
        sample.features.extend(f.features.iter().map(|r| r.to_vec()));
    }
    for k in 1..frames.len() {
        let (newer, older) = (&frames[k - 1], &frames[k]);
        let position: HashMap<NodeRef, usize> =
            newer.nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        if older.nodes.len() != newer.nodes.len() {
            return Err(GraphError::EntityMismatch { newer: newer.frame_id, older: older.frame_id });
        }
        for (i, n) in older.nodes.iter().enumerate() {
            let j = *position
                .get(n)
                .ok_or(GraphError::EntityMismatch { newer: newer.frame_id, older: older.frame_id })?;
            sample.edges.push(GraphEdge {
                src: offsets[k] + i,
                dst: offsets[k - 1] + j,
                relation: EdgeRelation::Temporal,
            });
        }
    }
    Ok(sample)
}

/// Sliding windows over an episode. A sample is emitted for every step with
/// `window - 1` predecessors, every `stride` steps. All frames of a window
/// use the newest frame's robot pose as reference.
pub fn episode_to_samples(episode: &Episode, window: usize, stride: usize) -> Result<Vec<GraphSample>, GraphError> {
    if !(2..=super::MAX_FRAMES).contains(&window) {
        return Err(GraphError::Window(window));
    }
    if stride == 0 {
        return Err(GraphError::Stride);
    }
    let params = FeatureParams {
        caps: episode.metadata.caps,
        dt: episode.metadata.dt,
    };
    let steps = &episode.steps;
    let mut out = Vec::new();
    let mut i = window - 1;
    while i < steps.len() {
        let robot = steps[i].snapshot.robot;
        let frames = (0..window)
            .map(|k| {
                let s = &steps[i - k].snapshot;
                build_frame_graph(s, &robot, s.sim_time, s.frame_id, k, &params)
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(assemble_window(&frames, steps[i].label)?);
        i += stride;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Goal, Human, Interaction, InteractionKind, Mobility, ObjectKind, PoseIncrement, Room, SceneObject};

    fn scene(humans: usize, objects: usize, talking: bool) -> WorldSnapshot {
        let room = Room::rectangle(8.0, 6.0);
        let humans: Vec<Human> = (0..humans)
            .map(|i| Human {
                id: 10 + i as u32,
                pose: Pose2D::new(i as f64, 1.0, 0.0),
                increment: PoseIncrement::ZERO,
                mobility: Mobility::Static,
                group_id: None,
                waypoint: None,
            })
            .collect();
        let objects = (0..objects)
            .map(|i| SceneObject {
                id: 20 + i as u32,
                pose: Pose2D::new(i as f64, -1.0, 0.0),
                side_x: 0.5,
                side_y: 0.5,
                kind: ObjectKind::Plant,
            })
            .collect();
        let interactions = if talking {
            vec![Interaction {
                entity1_id: 10,
                entity2_id: 11,
                kind: InteractionKind::HumanHumanTalking,
            }]
        } else {
            vec![]
        };
        WorldSnapshot {
            frame_id: 7,
            sim_time: 0.7,
            robot: Pose2D::new(0.0, 0.0, 0.0),
            walls: room.walls(1),
            room,
            humans,
            objects,
            goal: Goal { id: 5, x: 2.0, y: 2.0 },
            interactions,
        }
    }

    fn frame(s: &WorldSnapshot, k: usize) -> FrameGraph {
        let mut s = s.clone();
        s.frame_id -= k as u64;
        build_frame_graph(&s, &s.robot.clone(), s.sim_time, s.frame_id, k, &FeatureParams::default()).unwrap()
    }

    #[test]
    fn frame_counts() {
        let g = frame(&scene(2, 1, false), 0);
        assert_eq!(g.nodes.len(), 9);
        let count = |r| g.edges.iter().filter(|e| e.relation == r).count();
        assert_eq!(count(EdgeRelation::RoomLink) + count(EdgeRelation::RoomLinkRev), 16);
        assert_eq!(count(EdgeRelation::SelfLoop), 9);
        assert_eq!(g.edges.len(), 25);

        let empty = frame(&scene(0, 0, false), 0);
        assert_eq!(empty.nodes.len(), 6);
        assert_eq!(empty.edges.len(), 10 + 6);

        let talk = frame(&scene(2, 1, true), 0);
        assert_eq!(talk.edges.len(), 27);
    }

    #[test]
    fn window_counts() {
        let s = scene(2, 1, false);
        let w3 = assemble_window(&[frame(&s, 0), frame(&s, 1), frame(&s, 2)], Label::default()).unwrap();
        assert_eq!(w3.nodes.len(), 27);
        assert_eq!(w3.count_relation(EdgeRelation::Temporal), 18);
        let w2 = assemble_window(&[frame(&s, 0), frame(&s, 1)], Label::default()).unwrap();
        assert_eq!(w2.count_relation(EdgeRelation::Temporal), 9);
        // Temporal edges point from older to newer frames.
        for e in w3.edges.iter().filter(|e| e.relation == EdgeRelation::Temporal) {
            assert_eq!(w3.nodes[e.src].frame_index, w3.nodes[e.dst].frame_index + 1);
            assert_eq!(w3.nodes[e.src].entity_id, w3.nodes[e.dst].entity_id);
        }
    }

    #[test]
    fn vanished_human_rejected() {
        let s = scene(2, 1, false);
        let mut older = s.clone();
        older.humans.pop();
        let err = assemble_window(&[frame(&s, 0), frame(&older, 1)], Label::default()).unwrap_err();
        assert!(matches!(err, GraphError::EntityMismatch { .. }));
    }

    #[test]
    fn gaps_and_sizes_rejected() {
        let s = scene(1, 0, false);
        assert!(matches!(
            assemble_window(&[frame(&s, 0), frame(&s, 2)], Label::default()),
            Err(GraphError::NotConsecutive(_))
        ));
        assert!(matches!(assemble_window(&[frame(&s, 0)], Label::default()), Err(GraphError::Window(1))));
    }
}
