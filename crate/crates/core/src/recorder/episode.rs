use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RecorderError;
use crate::canonical;
use crate::humans::BehaviorParams;
use crate::rng::Seed;
use crate::scene::{GenerationRanges, SceneParams};
use crate::world::{Label, SpeedCaps, WorldSnapshot};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative slack when checking `sim_time == frame_id * dt` on stored,
/// rounded values.
const TIME_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub user_id: String,
    /// Unix seconds.
    pub created_at: u64,
    pub seed: Seed,
    pub ranges: GenerationRanges,
    pub dt: f64,
    pub caps: SpeedCaps,
    pub toolkit_version: String,
    /// Set on episodes produced by reflection across the world x-axis.
    pub mirrored: bool,
    /// Goal radius used to end the episode.
    pub r_goal: f64,
    pub scene: SceneParams,
    pub behavior: BehaviorParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub snapshot: WorldSnapshot,
    /// Normalized command `[advance, lateral, rotation]` in `[-1, 1]`.
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Episode {
    pub metadata: Metadata,
    pub steps: Vec<Step>,
}

impl Episode {
    /// Checks every file invariant; the error names the failing rule.
    pub fn validate(&self) -> Result<(), RecorderError> {
        let bad = |msg: String| Err(RecorderError::Invalid(msg));
        let m = &self.metadata;
        if !is_valid_user_id(&m.user_id) {
            return Err(RecorderError::UserId(m.user_id.clone()));
        }
        if !(m.dt.is_finite() && m.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", m.dt));
        }
        if !(m.r_goal.is_finite() && m.r_goal > 0.0) {
            return bad(format!("r_goal must be positive, got {}", m.r_goal));
        }
        let Some(first) = self.steps.first() else {
            return bad("steps must not be empty".into());
        };
        let ids = first.snapshot.entity_ids();
        for (i, step) in self.steps.iter().enumerate() {
            let s = &step.snapshot;
            let expected = first.snapshot.frame_id + i as u64;
            if s.frame_id != expected {
                return bad(format!(
                    "frame_ids must be contiguous: step {i} has frame_id {} (expected {expected})",
                    s.frame_id
                ));
            }
            let t = s.frame_id as f64 * m.dt;
            if (s.sim_time - t).abs() > TIME_TOLERANCE * t.abs().max(1.0) {
                return bad(format!(
                    "sim_time {} at frame {} does not equal frame_id * dt",
                    s.sim_time, s.frame_id
                ));
            }
            if !step.label.is_normalized() {
                return bad(format!("label at frame {} outside [-1, 1]", s.frame_id));
            }
            s.validate(!m.mirrored)
                .map_err(|e| RecorderError::Invalid(format!("frame {}: {e}", s.frame_id)))?;
            if s.entity_ids() != ids {
                return bad(format!("entity set changed at frame {}", s.frame_id));
            }
        }
        let last = &self.steps[self.steps.len() - 1].snapshot;
        let d = last.robot.position().distance(last.goal.position());
        if d >= m.r_goal {
            return bad(format!(
                "last step must reach the goal: distance {d} >= r_goal {}",
                m.r_goal
            ));
        }
        Ok(())
    }

    /// The value this episode becomes after a write/load round trip.
    pub fn canonical(&self) -> Episode {
        canonical::canonicalize(self).expect("episodes hold only finite numbers")
    }

    /// Reflection across the world x-axis; see [`mirror_episode`].
    pub fn mirrored(&self) -> Episode {
        Episode {
            metadata: Metadata {
                mirrored: !self.metadata.mirrored,
                ..self.metadata.clone()
            },
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    snapshot: s.snapshot.mirrored(),
                    label: s.label.mirrored(),
                })
                .collect(),
        }
    }
}

/// Reflect every step across the world x-axis: `y → -y`, `θ → -θ`,
/// lateral and rotational labels negate. Applying it twice is the identity.
pub fn mirror_episode(episode: &Episode) -> Episode {
    episode.mirrored()
}

pub trait Clock {
    fn now_unix(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_unix(&self) -> u64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub u64);

impl Clock for FixedClock {
    fn now_unix(&self) -> u64 {
        self.0
    }
}

pub fn is_valid_user_id(user_id: &str) -> bool {
    !user_id.is_empty() && user_id.bytes().all(|b| b.is_ascii_alphanumeric())
}

/// `<user>_<unix>.json`, or `<user>_<unix>_<n>.json` for the n-th collision.
pub fn episode_file_name(user_id: &str, unix: u64, collision: u32) -> String {
    if collision == 0 {
        format!("{user_id}_{unix}.json")
    } else {
        format!("{user_id}_{unix}_{collision}.json")
    }
}

/// Validate and write atomically into `dir`, named after the episode's user
/// and the clock. Never overwrites an existing file.
///
/// Validation runs on the canonical form, i.e. on exactly what a later
/// `load_episode` will see.
pub fn write_episode(episode: &Episode, dir: &Path, clock: &dyn Clock) -> Result<PathBuf, RecorderError> {
    episode.canonical().validate()?;
    let bytes = canonical::to_vec(episode).map_err(|source| RecorderError::Format {
        path: dir.to_path_buf(),
        source,
    })?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RecorderError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(&bytes).map_err(io(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io(tmp.path()))?;
    let unix = clock.now_unix();
    let mut collision = 0;
    loop {
        let path = dir.join(episode_file_name(&episode.metadata.user_id, unix, collision));
        match tmp.persist_noclobber(&path) {
            Ok(_) => return Ok(path),
            Err(e) if e.error.kind() == std::io::ErrorKind::AlreadyExists => {
                tmp = e.file;
                collision += 1;
            }
            Err(e) => return Err(RecorderError::Io { path, source: e.error }),
        }
    }
}

/// Parse and re-validate an episode file.
pub fn load_episode(path: &Path) -> Result<Episode, RecorderError> {
    let bytes = std::fs::read(path).map_err(|source| RecorderError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let episode: Episode = canonical::from_slice(&bytes).map_err(|source| RecorderError::Format {
        path: path.to_path_buf(),
        source,
    })?;
    episode.validate()?;
    Ok(episode)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::world::{Goal, Pose2D, Room};

    /// Tiny two-step episode in an empty room ending on the goal.
    pub(crate) fn tiny_episode() -> Episode {
        let room = Room::rectangle(6.0, 6.0);
        let walls = room.walls(1);
        let snapshot = |frame_id: u64, x: f64| WorldSnapshot {
            frame_id,
            sim_time: frame_id as f64 * 0.1,
            robot: Pose2D::new(x, 0.5, 0.25),
            room: room.clone(),
            humans: vec![],
            objects: vec![],
            walls: walls.clone(),
            goal: Goal { id: 5, x: 0.3, y: 0.5 },
            interactions: vec![],
        };
        Episode {
            metadata: Metadata {
                user_id: "u03".into(),
                created_at: 1_700_000_000,
                seed: Seed(4),
                ranges: GenerationRanges::empty(),
                dt: 0.1,
                caps: SpeedCaps::default(),
                toolkit_version: TOOLKIT_VERSION.into(),
                mirrored: false,
                r_goal: 0.5,
                scene: SceneParams::default(),
                behavior: BehaviorParams::default(),
            },
            steps: vec![
                Step {
                    snapshot: snapshot(1, 0.1),
                    label: Label([1.0, 0.2, -0.3]),
                },
                Step {
                    snapshot: snapshot(2, 0.2),
                    label: Label([1.0, 0.0, 0.0]),
                },
            ],
        }
    }

    #[test]
    fn file_naming() {
        let dir = tempfile::tempdir().unwrap();
        let ep = tiny_episode();
        let a = write_episode(&ep, dir.path(), &FixedClock(1_700_000_000)).unwrap();
        let b = write_episode(&ep, dir.path(), &FixedClock(1_700_000_000)).unwrap();
        let c = write_episode(&ep, dir.path(), &FixedClock(1_700_000_000)).unwrap();
        let name = |p: &Path| p.file_name().unwrap().to_str().unwrap().to_string();
        assert_eq!(name(&a), "u03_1700000000.json");
        assert_eq!(name(&b), "u03_1700000000_1.json");
        assert_eq!(name(&c), "u03_1700000000_2.json");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ep = tiny_episode();
        let path = write_episode(&ep, dir.path(), &SystemClock).unwrap();
        let loaded = load_episode(&path).unwrap();
        assert_eq!(loaded, ep.canonical());
        let again = write_episode(&loaded, dir.path(), &FixedClock(1)).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn rejects_gap_in_frames() {
        let mut ep = tiny_episode();
        ep.steps[1].snapshot.frame_id = 3;
        ep.steps[1].snapshot.sim_time = 0.3;
        let err = ep.validate().unwrap_err().to_string();
        assert!(err.contains("contiguous"), "{err}");
    }

    #[test]
    fn rejects_empty_steps() {
        let mut ep = tiny_episode();
        ep.steps.clear();
        assert!(ep.validate().unwrap_err().to_string().contains("empty"));
        let dir = tempfile::tempdir().unwrap();
        assert!(write_episode(&ep, dir.path(), &FixedClock(1)).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn rejects_unreached_goal() {
        let mut ep = tiny_episode();
        ep.steps[1].snapshot.robot.x = 2.0;
        assert!(ep.validate().unwrap_err().to_string().contains("goal"));
    }

    #[test]
    fn rejects_bad_user_id() {
        let mut ep = tiny_episode();
        ep.metadata.user_id = "a_b".into();
        assert!(matches!(ep.validate(), Err(RecorderError::UserId(_))));
    }

    #[test]
    fn load_reports_parse_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, b"{\"metadata\": [").unwrap();
        let err = load_episode(&path).unwrap_err().to_string();
        assert!(err.contains("byte"), "{err}");
    }

    #[test]
    fn mirror_signs() {
        let ep = tiny_episode();
        let m = mirror_episode(&ep);
        assert!(m.metadata.mirrored);
        assert_eq!(m.steps[0].label, Label([1.0, -0.2, 0.3]));
        assert_eq!(m.steps[0].snapshot.robot, Pose2D::new(0.1, -0.5, -0.25));
        m.validate().unwrap();
        assert_eq!(mirror_episode(&m), ep);
    }
}
