//! Episode lifecycle: joystick events become robot commands, each tick
//! advances the world and records `(snapshot, label)`, and reaching the goal
//! hands the episode to the user to save or discard.
//!
//! Frame numbering: regenerating produces frame 0, the spawn state, which is
//! published but not recorded. Tick `k` records the post-step snapshot with
//! `frame_id = k`, so a saved episode holds frames `1..=N`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::bus::topics::{
    EpisodeMsg, EpisodePhase, GoalMsg, HumanMsg, InteractionMsg, JoystickMsg, ObjectMsg, RobotMsg,
    WallMsg, EPISODE, GOAL, HUMANS, INTERACTIONS, OBJECTS, ROBOT, WALLS,
};
use crate::bus::{Bus, BusError, Payload};
use crate::canonical::round_f64;
use crate::humans::BehaviorParams;
use crate::recorder::{write_episode, Clock, Episode, Metadata, RecorderError, Step, TOOLKIT_VERSION};
use crate::rng::Seed;
use crate::scene::{generate_world, GenerationRanges, SceneError, SceneParams};
use crate::sim::{StepError, World};
use crate::world::{Command, Goal, Label, Pose2D, SpeedCaps, WorldSnapshot};

/// Goal radius in meters; reached iff the robot center is strictly closer.
pub const R_GOAL: f64 = 0.5;

pub const DEFAULT_DT: f64 = 0.1;

pub fn goal_reached(robot: &Pose2D, goal: &Goal) -> bool {
    goal_distance(robot, goal) < R_GOAL
}

fn goal_distance(robot: &Pose2D, goal: &Goal) -> f64 {
    robot.position().distance(goal.position())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Running,
    Reached,
    Saved,
    Discarded,
}

impl From<Phase> for EpisodePhase {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Running => EpisodePhase::Running,
            Phase::Reached => EpisodePhase::Reached,
            Phase::Saved => EpisodePhase::Saved,
            Phase::Discarded => EpisodePhase::Discarded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Save,
    Discard,
}

#[derive(Debug, thiserror::Error)]
pub enum ControllerError {
    #[error("tick requires a running episode, phase is {0:?}")]
    NotRunning(Phase),
    #[error("finish requires a reached goal, phase is {0:?}")]
    NotReached(Phase),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Recorder(#[from] RecorderError),
    #[error(transparent)]
    Bus(#[from] BusError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub user_id: String,
    pub dt: f64,
    pub caps: SpeedCaps,
    pub scene: SceneParams,
    pub behavior: BehaviorParams,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let scene = SceneParams::default();
        ControllerConfig {
            user_id: "anonymous".into(),
            dt: DEFAULT_DT,
            caps: SpeedCaps::default(),
            behavior: behavior_for(&scene),
            scene,
        }
    }
}

/// Behavior parameters consistent with a scene's geometry.
pub fn behavior_for(scene: &SceneParams) -> BehaviorParams {
    BehaviorParams {
        human_radius: scene.human_radius,
        robot_radius: scene.robot_radius,
        waypoint_clearance: scene.waypoint_clearance,
        max_attempts: scene.max_attempts,
        ..BehaviorParams::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub frame_id: u64,
    pub reached: bool,
    pub goal_distance: f64,
}

/// Single-writer controller. Bus publishing is optional so headless runs
/// can skip it.
#[derive(Debug)]
pub struct EpisodeController {
    config: ControllerConfig,
    world: World,
    seed: Seed,
    ranges: GenerationRanges,
    phase: Phase,
    label: Label,
    steps: Vec<Step>,
    bus: Option<Arc<Bus>>,
    /// Session time at the start of the current episode; keeps bus stamps
    /// non-decreasing across regenerations.
    stamp_offset: f64,
    ignored_inputs: u64,
}

impl EpisodeController {
    /// Generate the first scene and publish frame 0.
    pub fn new(
        config: ControllerConfig,
        ranges: GenerationRanges,
        seed: Seed,
        bus: Option<Arc<Bus>>,
    ) -> Result<Self, ControllerError> {
        let world = generate_world(&ranges, &config.scene, seed)?;
        Self::from_world(config, world, ranges, seed, bus)
    }

    /// Start an episode on an arbitrary world, e.g. a hand-built scenario.
    pub fn from_world(
        config: ControllerConfig,
        world: World,
        ranges: GenerationRanges,
        seed: Seed,
        bus: Option<Arc<Bus>>,
    ) -> Result<Self, ControllerError> {
        let c = EpisodeController {
            config,
            world,
            seed,
            ranges,
            phase: Phase::Running,
            label: Label::default(),
            steps: Vec::new(),
            bus,
            stamp_offset: 0.0,
            ignored_inputs: 0,
        };
        c.publish_frame()?;
        c.publish_episode(None)?;
        Ok(c)
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn ranges(&self) -> &GenerationRanges {
        &self.ranges
    }

    pub fn frame_id(&self) -> u64 {
        self.world.state.frame_id
    }

    pub fn snapshot(&self) -> &WorldSnapshot {
        &self.world.state
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn command(&self) -> Command {
        Command::from_label(&self.label, &self.config.caps)
    }

    /// Joystick events with an unknown axis or a non-finite value.
    pub fn ignored_inputs(&self) -> u64 {
        self.ignored_inputs
    }

    /// Bus stamp of the current frame.
    pub fn stamp(&self) -> f64 {
        self.stamp_offset + self.world.state.sim_time
    }

    /// Fold one joystick event into the held command. Values are clamped to
    /// `[-1, 1]` and kept at the precision episode files store, so replaying
    /// a saved label trace reproduces the exact commands.
    pub fn apply_input(&mut self, event: JoystickMsg) -> Command {
        let axis = event.axis_id as usize;
        if axis > 2 || !event.value.is_finite() {
            self.ignored_inputs += 1;
            log::warn!("ignoring joystick event {event:?}");
            return self.command();
        }
        self.label.0[axis] = round_f64(event.value.clamp(-1.0, 1.0));
        self.command()
    }

    /// Set all three axes at once, as a scripted driver would.
    pub fn set_label(&mut self, label: Label) -> Command {
        for axis in 0..3 {
            self.apply_input(JoystickMsg {
                axis_id: axis as u32,
                value: label.0[axis],
            });
        }
        self.command()
    }

    pub fn tick(&mut self) -> Result<StepOutcome, ControllerError> {
        if self.phase != Phase::Running {
            return Err(ControllerError::NotRunning(self.phase));
        }
        let cmd = self.command();
        self.world.step(
            cmd,
            self.config.dt,
            self.config.scene.robot_radius,
            &self.config.behavior,
        )?;
        self.publish_frame()?;
        self.steps.push(Step {
            snapshot: self.world.snapshot(),
            label: self.label,
        });
        let state = &self.world.state;
        // Judged on the stored precision so a saved episode's last step
        // passes the goal check after loading.
        let robot = Pose2D {
            x: round_f64(state.robot.x),
            y: round_f64(state.robot.y),
            theta: state.robot.theta,
        };
        let goal = Goal {
            id: state.goal.id,
            x: round_f64(state.goal.x),
            y: round_f64(state.goal.y),
        };
        let goal_distance = goal_distance(&robot, &goal);
        let reached = goal_reached(&robot, &goal);
        if reached {
            self.phase = Phase::Reached;
            self.publish_episode(None)?;
        }
        Ok(StepOutcome {
            frame_id: state.frame_id,
            reached,
            goal_distance,
        })
    }

    /// Drop the current buffer and start over on a freshly generated scene.
    /// On error the current episode is left untouched.
    pub fn regenerate(&mut self, ranges: GenerationRanges, seed: Seed) -> Result<(), ControllerError> {
        let world = generate_world(&ranges, &self.config.scene, seed)?;
        // One tick past the last frame, so frame 0 of the new episode has a
        // stamp of its own.
        self.stamp_offset = self.stamp() + self.config.dt;
        self.world = world;
        self.ranges = ranges;
        self.seed = seed;
        self.steps.clear();
        self.label = Label::default();
        self.phase = Phase::Running;
        self.publish_frame()?;
        self.publish_episode(None)
    }

    /// The recorded episode so far.
    pub fn episode(&self, created_at: u64) -> Episode {
        Episode {
            metadata: Metadata {
                user_id: self.config.user_id.clone(),
                created_at,
                seed: self.seed,
                ranges: self.ranges,
                dt: self.config.dt,
                caps: self.config.caps,
                toolkit_version: TOOLKIT_VERSION.into(),
                mirrored: !self.world.state.room.is_ccw(),
                r_goal: R_GOAL,
                scene: self.config.scene,
                behavior: self.config.behavior,
            },
            steps: self.steps.clone(),
        }
    }

    /// Save (returns the written path) or discard a finished episode.
    pub fn finish(
        &mut self,
        decision: Decision,
        dir: &Path,
        clock: &dyn Clock,
    ) -> Result<Option<PathBuf>, ControllerError> {
        if self.phase != Phase::Reached {
            return Err(ControllerError::NotReached(self.phase));
        }
        let out = match decision {
            Decision::Save => {
                let now = clock.now_unix();
                let path = write_episode(&self.episode(now), dir, &crate::recorder::FixedClock(now))?;
                self.phase = Phase::Saved;
                Some(path)
            }
            Decision::Discard => {
                self.phase = Phase::Discarded;
                None
            }
        };
        self.steps.clear();
        let message = out
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned());
        self.publish_episode(message)?;
        Ok(out)
    }

    fn publish_frame(&self) -> Result<(), ControllerError> {
        let Some(bus) = &self.bus else {
            return Ok(());
        };
        let s = &self.world.state;
        let stamp = self.stamp();
        bus.publish(HUMANS, Payload::Humans(s.humans.iter().map(HumanMsg::from).collect()), stamp)?;
        bus.publish(OBJECTS, Payload::Objects(s.objects.iter().map(ObjectMsg::from).collect()), stamp)?;
        bus.publish(WALLS, Payload::Walls(s.walls.iter().map(WallMsg::from).collect()), stamp)?;
        bus.publish(GOAL, Payload::Goal(GoalMsg::from(&s.goal)), stamp)?;
        bus.publish(
            INTERACTIONS,
            Payload::Interactions(s.interactions.iter().map(InteractionMsg::from).collect()),
            stamp,
        )?;
        bus.publish(ROBOT, Payload::Robot(RobotMsg::from(&s.robot)), stamp)?;
        Ok(())
    }

    fn publish_episode(&self, message: Option<String>) -> Result<(), ControllerError> {
        if let Some(bus) = &self.bus {
            bus.publish(
                EPISODE,
                Payload::Episode(EpisodeMsg {
                    state: self.phase.into(),
                    frame_id: self.frame_id(),
                    message,
                }),
                self.stamp(),
            )?;
        }
        Ok(())
    }
}
