//! Re-simulation of recorded episodes from `(seed, ranges, labels)`.

use serde_json::Value;

use crate::canonical;
use crate::recorder::Episode;
use crate::scene::{generate_world, SceneError};
use crate::sim::StepError;
use crate::world::Command;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayReport {
    Exact { frames: usize },
    /// First frame whose canonical snapshot differs, with the JSON path of
    /// the first differing field.
    Diverged { frame_id: u64, field: String },
}

impl std::fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReplayReport::Exact { .. } => write!(f, "exact"),
            ReplayReport::Diverged { frame_id, field } => {
                write!(f, "diverged at frame {frame_id}: {field}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("cannot regenerate the scene: {0}")]
    Scene(#[from] SceneError),
    #[error("simulation failed: {0}")]
    Step(#[from] StepError),
    #[error("episode must start at frame 1, starts at {0}")]
    Start(u64),
    #[error("empty episode")]
    Empty,
}

/// Regenerate the scene (mirrored if the episode is), drive it with the
/// recorded labels and compare every snapshot at stored precision.
pub fn replay_episode(episode: &Episode) -> Result<ReplayReport, ReplayError> {
    let m = &episode.metadata;
    let first = episode.steps.first().ok_or(ReplayError::Empty)?;
    if first.snapshot.frame_id != 1 {
        return Err(ReplayError::Start(first.snapshot.frame_id));
    }
    let mut world = generate_world(&m.ranges, &m.scene, m.seed)?;
    if m.mirrored {
        world = world.mirrored();
    }
    for step in &episode.steps {
        let cmd = Command::from_label(&step.label, &m.caps);
        world.step(cmd, m.dt, m.scene.robot_radius, &m.behavior)?;
        let ours = to_value(&world.state);
        let stored = to_value(&step.snapshot);
        if ours != stored {
            let field = first_difference(&stored, &ours, "$".into()).unwrap_or_else(|| "$".into());
            return Ok(ReplayReport::Diverged {
                frame_id: step.snapshot.frame_id,
                field,
            });
        }
    }
    Ok(ReplayReport::Exact {
        frames: episode.steps.len(),
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    let text = canonical::to_string(x).expect("snapshots are finite");
    serde_json::from_str(&text).expect("canonical text parses")
}

fn first_difference(a: &Value, b: &Value, path: String) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                match y.get(k) {
                    Some(w) => {
                        if let Some(p) = first_difference(v, w, format!("{path}.{k}")) {
                            return Some(p);
                        }
                    }
                    None => return Some(format!("{path}.{k}")),
                }
            }
            (x.len() != y.len()).then_some(path)
        }
        (Value::Array(x), Value::Array(y)) => {
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                if let Some(p) = first_difference(v, w, format!("{path}[{i}]")) {
                    return Some(p);
                }
            }
            (x.len() != y.len()).then_some(path)
        }
        _ => (a != b).then(|| format!("{path}: stored {a}, replayed {b}")),
    }
}
