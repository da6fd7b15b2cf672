//! Wire payloads, one per topic. Field names are the wire contract.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::BusError;
use crate::scene::GenerationRanges;
use crate::world::{Goal, Human, Interaction, InteractionKind, Pose2D, SceneObject, Wall};

pub const HUMANS: &str = "humans";
pub const WALLS: &str = "walls";
pub const GOAL: &str = "goal";
pub const JOYSTICK: &str = "joystick";
pub const OBJECTS: &str = "objects";
pub const INTERACTIONS: &str = "interactions";
pub const ROBOT: &str = "robot";
pub const EPISODE: &str = "episode";
pub const CONTROL: &str = "control";

/// Every topic the bus knows out of the box.
pub const ALL_TOPICS: [&str; 9] = [
    HUMANS,
    WALLS,
    GOAL,
    JOYSTICK,
    OBJECTS,
    INTERACTIONS,
    ROBOT,
    EPISODE,
    CONTROL,
];

/// Topics the simulator publishes every tick, in publish order.
pub const SIMULATOR_TOPICS: [&str; 6] = [HUMANS, OBJECTS, WALLS, GOAL, INTERACTIONS, ROBOT];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanMsg {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    pub ix: f64,
    pub iy: f64,
    pub iangle: f64,
}

impl From<&Human> for HumanMsg {
    fn from(h: &Human) -> Self {
        HumanMsg {
            id: h.id,
            x: h.pose.x,
            y: h.pose.y,
            angle: h.pose.theta,
            ix: h.increment.ix,
            iy: h.increment.iy,
            iangle: h.increment.iangle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallMsg {
    pub wall_id: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl From<&Wall> for WallMsg {
    fn from(w: &Wall) -> Self {
        WallMsg {
            wall_id: w.id,
            x1: w.x1,
            y1: w.y1,
            x2: w.x2,
            y2: w.y2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalMsg {
    pub identifier: u32,
    pub x: f64,
    pub y: f64,
}

impl From<&Goal> for GoalMsg {
    fn from(g: &Goal) -> Self {
        GoalMsg {
            identifier: g.id,
            x: g.x,
            y: g.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoystickMsg {
    pub axis_id: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectMsg {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    #[serde(rename = "sideX")]
    pub side_x: f64,
    #[serde(rename = "sideY")]
    pub side_y: f64,
}

impl From<&SceneObject> for ObjectMsg {
    fn from(o: &SceneObject) -> Self {
        ObjectMsg {
            id: o.id,
            x: o.pose.x,
            y: o.pose.y,
            angle: o.pose.theta,
            side_x: o.side_x,
            side_y: o.side_y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionMsg {
    pub entity1_id: u32,
    pub entity2_id: u32,
    pub interaction_type: InteractionKind,
}

impl From<&Interaction> for InteractionMsg {
    fn from(i: &Interaction) -> Self {
        InteractionMsg {
            entity1_id: i.entity1_id,
            entity2_id: i.entity2_id,
            interaction_type: i.kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotMsg {
    pub x: f64,
    pub y: f64,
    pub angle: f64,
}

impl From<&Pose2D> for RobotMsg {
    fn from(p: &Pose2D) -> Self {
        RobotMsg {
            x: p.x,
            y: p.y,
            angle: p.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodePhase {
    Running,
    Reached,
    Saved,
    Discarded,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeMsg {
    pub state: EpisodePhase,
    pub frame_id: u64,
    /// Human-readable detail: saved file name or error text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlAction {
    Regenerate,
    Save,
    Discard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlMsg {
    pub action: ControlAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<GenerationRanges>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A topic payload. Serializes as the bare payload record.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Humans(Vec<HumanMsg>),
    Walls(Vec<WallMsg>),
    Goal(GoalMsg),
    Joystick(JoystickMsg),
    Objects(Vec<ObjectMsg>),
    Interactions(Vec<InteractionMsg>),
    Robot(RobotMsg),
    Episode(EpisodeMsg),
    Control(ControlMsg),
}

impl Payload {
    /// Topic this payload belongs on.
    pub fn topic(&self) -> &'static str {
        match self {
            Payload::Humans(_) => HUMANS,
            Payload::Walls(_) => WALLS,
            Payload::Goal(_) => GOAL,
            Payload::Joystick(_) => JOYSTICK,
            Payload::Objects(_) => OBJECTS,
            Payload::Interactions(_) => INTERACTIONS,
            Payload::Robot(_) => ROBOT,
            Payload::Episode(_) => EPISODE,
            Payload::Control(_) => CONTROL,
        }
    }

    /// Decode and schema-check an untyped payload for `topic`.
    pub fn from_value(topic: &str, value: Value) -> Result<Payload, BusError> {
        fn typed<T: serde::de::DeserializeOwned>(topic: &str, value: Value) -> Result<T, BusError> {
            serde_json::from_value(value).map_err(|e| BusError::Schema {
                topic: topic.to_string(),
                message: e.to_string(),
            })
        }
        Ok(match topic {
            HUMANS => Payload::Humans(typed(topic, value)?),
            WALLS => Payload::Walls(typed(topic, value)?),
            GOAL => Payload::Goal(typed(topic, value)?),
            JOYSTICK => Payload::Joystick(typed(topic, value)?),
            OBJECTS => Payload::Objects(typed(topic, value)?),
            INTERACTIONS => Payload::Interactions(typed(topic, value)?),
            ROBOT => Payload::Robot(typed(topic, value)?),
            EPISODE => Payload::Episode(typed(topic, value)?),
            CONTROL => Payload::Control(typed(topic, value)?),
            other => return Err(BusError::UnknownTopic(other.to_string())),
        })
    }

    /// Angles wrapped and numbers finite; the checks `publish` enforces on
    /// typed payloads.
    pub fn validate(&self) -> Result<(), BusError> {
        let topic = self.topic();
        let bad = |field: &str, why: &str| BusError::Schema {
            topic: topic.to_string(),
            message: format!("field `{field}` {why}"),
        };
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(bad(field, "is not finite"))
            }
        };
        let angle = |field: &str, v: f64| {
            finite(field, v)?;
            if v > -std::f64::consts::PI && v <= std::f64::consts::PI {
                Ok(())
            } else {
                Err(bad(field, "is outside (-pi, pi]"))
            }
        };
        match self {
            Payload::Humans(hs) => hs.iter().try_for_each(|h| {
                finite("x", h.x)?;
                finite("y", h.y)?;
                angle("angle", h.angle)?;
                finite("ix", h.ix)?;
                finite("iy", h.iy)?;
                finite("iangle", h.iangle)
            }),
            Payload::Walls(ws) => ws.iter().try_for_each(|w| {
                finite("x1", w.x1)?;
                finite("y1", w.y1)?;
                finite("x2", w.x2)?;
                finite("y2", w.y2)
            }),
            Payload::Goal(g) => {
                finite("x", g.x)?;
                finite("y", g.y)
            }
            Payload::Joystick(j) => finite("value", j.value),
            Payload::Objects(os) => os.iter().try_for_each(|o| {
                finite("x", o.x)?;
                finite("y", o.y)?;
                angle("angle", o.angle)?;
                finite("sideX", o.side_x)?;
                finite("sideY", o.side_y)
            }),
            Payload::Interactions(_) | Payload::Episode(_) => Ok(()),
            Payload::Robot(r) => {
                finite("x", r.x)?;
                finite("y", r.y)?;
                angle("angle", r.angle)
            }
            Payload::Control(c) => match &c.ranges {
                Some(r) => r.validate().map_err(|e| bad("ranges", &e.to_string())),
                None => Ok(()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn human_wire_fields_are_exact() {
        let msg = HumanMsg {
            id: 3,
            x: 1.0,
            y: 2.0,
            angle: 0.5,
            ix: 0.01,
            iy: 0.0,
            iangle: 0.0,
        };
        let v = serde_json::to_value(Payload::Humans(vec![msg])).unwrap();
        let keys: Vec<&str> = v[0].as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["id", "x", "y", "angle", "ix", "iy", "iangle"]);
    }

    #[test]
    fn object_and_goal_field_names() {
        let o = serde_json::to_value(ObjectMsg {
            id: 1,
            x: 0.0,
            y: 0.0,
            angle: 0.0,
            side_x: 1.0,
            side_y: 0.5,
        })
        .unwrap();
        assert!(o.get("sideX").is_some() && o.get("sideY").is_some());
        let g = serde_json::to_value(GoalMsg { identifier: 9, x: 1.0, y: 2.0 }).unwrap();
        assert_eq!(g, json!({"identifier": 9, "x": 1.0, "y": 2.0}));
    }

    #[test]
    fn missing_identifier_is_named() {
        let err = Payload::from_value(GOAL, json!({"x": 1.0, "y": 2.0})).unwrap_err();
        assert!(err.to_string().contains("identifier"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = Payload::from_value(ROBOT, json!({"x": 1.0, "y": 2.0, "angle": 0.0, "z": 1}))
            .unwrap_err();
        assert!(err.to_string().contains('z'), "{err}");
    }

    #[test]
    fn control_payload_variants() {
        let p = Payload::from_value(CONTROL, json!({"action": "regenerate", "seed": 5})).unwrap();
        assert_eq!(
            p,
            Payload::Control(ControlMsg {
                action: ControlAction::Regenerate,
                ranges: None,
                seed: Some(5)
            })
        );
        assert!(Payload::from_value(CONTROL, json!({"action": "explode"})).is_err());
    }

    #[test]
    fn unwrapped_angle_rejected() {
        let p = Payload::Robot(RobotMsg { x: 0.0, y: 0.0, angle: 4.0 });
        assert!(p.validate().is_err());
    }
}
