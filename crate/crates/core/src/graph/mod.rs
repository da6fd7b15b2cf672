//! Temporal scene graphs for relational GNN training: one node per human,
//! object, wall, goal and room per frame, windows of 2 or 3 frames bonded by
//! temporal edges, and 42-column node features in the robot frame.

mod build;
mod export;
mod features;

pub use build::{
    assemble_window, build_frame_graph, episode_to_samples, FrameGraph, GraphEdge, GraphNode,
    GraphSample,
};
pub use export::{export_graph_dataset, import_graph_dataset, schema, schema_path};
pub use features::{
    featurize_node, mirror_feature_row, FeatureParams, NodeRef, FEATURE_LEN, FEATURE_NAMES,
    GOAL_BLOCK, MAX_FRAMES, NORM_DISTANCE, OBJECT_BLOCK, ONE_HOT_FRAME, ONE_HOT_TYPE,
    PERSON_BLOCK, ROOM_BLOCK, TIME_BLOCK, WALL_BLOCK,
};

use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    Human = 0,
    Object = 1,
    Wall = 2,
    Goal = 3,
    Room = 4,
}

impl NodeType {
    pub const ALL: [NodeType; 5] = [
        NodeType::Human,
        NodeType::Object,
        NodeType::Wall,
        NodeType::Goal,
        NodeType::Room,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Geometric block this node type fills.
    pub fn block(self) -> Range<usize> {
        match self {
            NodeType::Human => PERSON_BLOCK,
            NodeType::Object => OBJECT_BLOCK,
            NodeType::Wall => WALL_BLOCK,
            NodeType::Goal => GOAL_BLOCK,
            NodeType::Room => ROOM_BLOCK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRelation {
    RoomLink,
    RoomLinkRev,
    Interaction,
    InteractionRev,
    Temporal,
    SelfLoop,
}

impl EdgeRelation {
    pub const ALL: [EdgeRelation; 6] = [
        EdgeRelation::RoomLink,
        EdgeRelation::RoomLinkRev,
        EdgeRelation::Interaction,
        EdgeRelation::InteractionRev,
        EdgeRelation::Temporal,
        EdgeRelation::SelfLoop,
    ];
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("node {0:?} is not in the snapshot")]
    UnknownNode(NodeRef),
    #[error("frame_index {0} outside 0..{MAX_FRAMES}")]
    FrameIndex(usize),
    #[error("window must be 2 or 3 frames, got {0}")]
    Window(usize),
    #[error("frames are not consecutive: {0}")]
    NotConsecutive(String),
    #[error("entity sets differ between frames {newer} and {older}")]
    EntityMismatch { newer: u64, older: u64 },
    #[error("stride must be positive")]
    Stride,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Record { path: String, line: usize, message: String },
}
