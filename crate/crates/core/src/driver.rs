//! Scripted driver for headless episodes: follows a grid path to the goal
//! and emits the joystick label a teleoperator would hold each tick.

use crate::controller::{ControllerError, EpisodeController, Phase};
use crate::scene::{OccupancyGrid, SceneParams};
use crate::world::{rotate_into, Label, Point2, WorldSnapshot};

#[derive(Debug, thiserror::Error)]
pub enum DriveError {
    #[error("no path from the robot to the goal")]
    NoPath,
    #[error("goal not reached within {0} ticks")]
    Timeout(u64),
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autopilot {
    path: Vec<Point2>,
    cursor: usize,
    /// Fraction of the linear caps to drive at.
    pub speed: f64,
    /// Meters ahead on the path to steer toward.
    pub lookahead: f64,
}

impl Autopilot {
    /// Plan on the static layout; walkers are ignored.
    pub fn plan(snapshot: &WorldSnapshot, scene: &SceneParams) -> Result<Autopilot, DriveError> {
        let grid = OccupancyGrid::new(
            &snapshot.room,
            &scene.static_footprints(snapshot),
            scene.robot_radius,
            scene.grid_resolution,
        );
        let mut path = grid
            .path(snapshot.robot.position(), snapshot.goal.position())
            .ok_or(DriveError::NoPath)?;
        path.push(snapshot.goal.position());
        Ok(Autopilot {
            path,
            cursor: 0,
            speed: 0.6,
            lookahead: 0.4,
        })
    }

    pub fn path(&self) -> &[Point2] {
        &self.path
    }

    /// Label for the next tick: translate toward the lookahead point and turn
    /// to face the direction of travel.
    pub fn next_label(&mut self, snapshot: &WorldSnapshot) -> Label {
        let robot = snapshot.robot.position();
        // Advance the cursor past path points already within reach.
        while self.cursor + 1 < self.path.len() && robot.distance(self.path[self.cursor]) < self.lookahead {
            self.cursor += 1;
        }
        let target = self.path[self.cursor];
        let delta = target.sub(robot);
        let dist = delta.norm();
        if dist < 1e-9 {
            return Label::default();
        }
        let local = rotate_into(delta, snapshot.robot.theta);
        let speed = self.speed * (dist / self.lookahead).min(1.0);
        let heading_error = libm::atan2(local.y, local.x);
        Label([
            (speed * local.x / dist).clamp(-1.0, 1.0),
            (speed * local.y / dist).clamp(-1.0, 1.0),
            heading_error.clamp(-1.0, 1.0),
        ])
    }
}

/// Tick until the goal is reached; returns the number of ticks taken.
pub fn drive_to_goal(controller: &mut EpisodeController, max_ticks: u64) -> Result<u64, DriveError> {
    let mut pilot = Autopilot::plan(controller.snapshot(), &controller.config().scene)?;
    let mut ticks = 0;
    while controller.phase() == Phase::Running {
        if ticks == max_ticks {
            return Err(DriveError::Timeout(max_ticks));
        }
        if ticks > 0 && ticks % 200 == 0 {
            // Re-plan from wherever the robot ended up.
            pilot = Autopilot::plan(controller.snapshot(), &controller.config().scene)?;
        }
        let label = pilot.next_label(controller.snapshot());
        controller.set_label(label);
        controller.tick()?;
        ticks += 1;
    }
    Ok(ticks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControllerConfig;
    use crate::rng::Seed;
    use crate::scene::GenerationRanges;

    #[test]
    fn reaches_goal_on_generated_scenes() {
        for seed in 0..20 {
            let mut c = EpisodeController::new(
                ControllerConfig::default(),
                GenerationRanges::default(),
                Seed(seed),
                None,
            )
            .unwrap();
            let ticks = drive_to_goal(&mut c, 3000).unwrap();
            assert_eq!(c.phase(), Phase::Reached);
            assert_eq!(c.steps().len() as u64, ticks);
            assert!(c.steps().iter().all(|s| s.label.is_normalized()));
        }
    }
}
