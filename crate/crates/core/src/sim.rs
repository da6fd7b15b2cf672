//! Live simulation state: the current snapshot plus the hidden state needed
//! to advance it (walker targets and the behavior random stream).

use crate::humans::{step_humans, BehaviorParams, WalkerState};
use crate::rng::SplitMix64;
use crate::scene::SceneError;
use crate::world::{step_robot_in_room, Command, WorldError, WorldSnapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub state: WorldSnapshot,
    pub walkers: Vec<WalkerState>,
    pub rng: SplitMix64,
}

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

impl World {
    /// A world with no walkers; the random stream only matters once walkers
    /// need new waypoints.
    pub fn from_snapshot(state: WorldSnapshot, rng: SplitMix64) -> World {
        World {
            state,
            walkers: Vec::new(),
            rng,
        }
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        self.state.clone()
    }

    /// Robot first, then humans; advances `frame_id` and `sim_time`.
    pub fn step(
        &mut self,
        cmd: Command,
        dt: f64,
        robot_radius: f64,
        behavior: &BehaviorParams,
    ) -> Result<(), StepError> {
        self.state.robot = step_robot_in_room(&self.state.room, self.state.robot, cmd, dt, robot_radius)?;
        step_humans(&mut self.state, &mut self.walkers, &mut self.rng, dt, behavior)?;
        self.state.frame_id += 1;
        self.state.sim_time = self.state.frame_id as f64 * dt;
        Ok(())
    }

    /// Reflection across the world x-axis, including hidden walker state.
    pub fn mirrored(&self) -> World {
        World {
            state: self.state.mirrored(),
            walkers: self.walkers.iter().map(WalkerState::mirrored).collect(),
            rng: self.rng.clone(),
        }
    }
}
