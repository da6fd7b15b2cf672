//! Randomized, reproducible scene generation from per-entity count ranges.

mod generator;
mod grid;
mod ranges;

pub use generator::{generate_room, generate_scene, generate_world, sample_free_pose};
pub use grid::OccupancyGrid;
pub use ranges::{CountRange, GenerationRanges};

use serde::{Deserialize, Serialize};

use crate::world::{Point2, RoomShape, WorldSnapshot};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("invalid generation ranges: {0}")]
    InvalidRanges(String),
    #[error("could not place {entity} after {attempts} attempts")]
    Unsatisfiable { entity: &'static str, attempts: u32 },
    #[error("configuration: {0}")]
    Config(String),
}

/// Circular footprint used for spawn clearance and occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub center: Point2,
    pub radius: f64,
}

impl Footprint {
    pub fn new(center: Point2, radius: f64) -> Self {
        Footprint { center, radius }
    }

    /// Gap between the two discs; negative when they overlap.
    pub fn gap(&self, other: &Footprint) -> f64 {
        self.center.distance(other.center) - self.radius - other.radius
    }

    pub fn mirrored(&self) -> Footprint {
        Footprint::new(self.center.mirrored(), self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomShapeChoice {
    Rectangle,
    LShape,
    #[default]
    Random,
}

impl From<RoomShape> for RoomShapeChoice {
    fn from(shape: RoomShape) -> Self {
        match shape {
            RoomShape::Rectangle => RoomShapeChoice::Rectangle,
            RoomShape::LShape => RoomShapeChoice::LShape,
        }
    }
}

impl std::str::FromStr for RoomShapeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rectangle" => Ok(RoomShapeChoice::Rectangle),
            "l_shape" | "l-shape" => Ok(RoomShapeChoice::LShape),
            "random" => Ok(RoomShapeChoice::Random),
            other => Err(format!("unknown room shape {other:?}")),
        }
    }
}

/// Geometry constants of scene generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub room_shape: RoomShapeChoice,
    /// Room side length bounds in meters.
    pub room_side: (f64, f64),
    /// L-shape cut-out as a fraction of the parent side.
    pub cut_fraction: (f64, f64),
    /// Minimum gap between spawned footprints and between footprints and walls.
    pub clearance: f64,
    /// Rejection-sampling attempts per entity.
    pub max_attempts: u32,
    pub human_radius: f64,
    pub robot_radius: f64,
    pub min_goal_distance: f64,
    /// Center distance between talking humans.
    pub talk_distance: (f64, f64),
    /// Center distance between a laptop user and the laptop.
    pub laptop_distance: (f64, f64),
    /// Side-by-side spacing of walking group members.
    pub group_spacing: f64,
    pub walker_speed: (f64, f64),
    pub waypoint_clearance: f64,
    pub grid_resolution: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            room_shape: RoomShapeChoice::Random,
            room_side: (6.0, 12.0),
            cut_fraction: (0.3, 0.6),
            clearance: 0.3,
            max_attempts: 200,
            human_radius: 0.2,
            robot_radius: 0.25,
            min_goal_distance: 2.0,
            talk_distance: (0.8, 1.5),
            laptop_distance: (0.5, 1.0),
            group_spacing: 0.8,
            walker_speed: (0.3, 0.8),
            waypoint_clearance: 0.4,
            grid_resolution: 0.25,
        }
    }
}

impl SceneParams {
    pub fn with_shape(shape: RoomShapeChoice) -> Self {
        SceneParams {
            room_shape: shape,
            ..SceneParams::default()
        }
    }

    /// Footprints of everything that does not move on its own: objects and
    /// static humans.
    pub fn static_footprints(&self, snapshot: &WorldSnapshot) -> Vec<Footprint> {
        snapshot
            .objects
            .iter()
            .map(|o| Footprint::new(o.pose.position(), o.half_diagonal()))
            .chain(
                snapshot
                    .humans
                    .iter()
                    .filter(|h| h.mobility == crate::world::Mobility::Static)
                    .map(|h| Footprint::new(h.pose.position(), self.human_radius)),
            )
            .collect()
    }
}
