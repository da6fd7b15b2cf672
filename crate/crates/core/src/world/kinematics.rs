use serde::{Deserialize, Serialize};

use super::geometry::{point_in_polygon, segment_distance, wrap};
use super::{Pose2D, Room, WorldError};

/// Physical speed limits of the holonomic base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedCaps {
    pub advance: f64,
    pub lateral: f64,
    pub rotation: f64,
}

impl Default for SpeedCaps {
    fn default() -> Self {
        SpeedCaps {
            advance: 1.0,
            lateral: 1.0,
            rotation: 1.5,
        }
    }
}

/// Velocity command in the robot frame: advance along the heading, lateral
/// toward robot-left, rotation counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Command {
    pub advance: f64,
    pub lateral: f64,
    pub rotation: f64,
}

impl Command {
    pub const ZERO: Command = Command {
        advance: 0.0,
        lateral: 0.0,
        rotation: 0.0,
    };

    pub fn new(advance: f64, lateral: f64, rotation: f64) -> Self {
        Command {
            advance,
            lateral,
            rotation,
        }
    }

    pub fn within(&self, caps: &SpeedCaps) -> bool {
        self.advance.abs() <= caps.advance
            && self.lateral.abs() <= caps.lateral
            && self.rotation.abs() <= caps.rotation
    }

    pub fn clamped(&self, caps: &SpeedCaps) -> Command {
        Command {
            advance: self.advance.clamp(-caps.advance, caps.advance),
            lateral: self.lateral.clamp(-caps.lateral, caps.lateral),
            rotation: self.rotation.clamp(-caps.rotation, caps.rotation),
        }
    }

    pub fn from_label(label: &Label, caps: &SpeedCaps) -> Command {
        Command {
            advance: label.0[0] * caps.advance,
            lateral: label.0[1] * caps.lateral,
            rotation: label.0[2] * caps.rotation,
        }
    }

    /// Linear speed in m/s.
    pub fn speed(&self) -> f64 {
        self.advance.hypot(self.lateral)
    }
}

/// A command normalized by the caps into `[-1, 1]³`, ordered
/// `[advance, lateral, rotation]`. This is what episodes record.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub [f64; 3]);

impl Label {
    pub fn advance(&self) -> f64 {
        self.0[0]
    }

    pub fn lateral(&self) -> f64 {
        self.0[1]
    }

    pub fn rotation(&self) -> f64 {
        self.0[2]
    }

    pub fn is_normalized(&self) -> bool {
        self.0.iter().all(|v| v.is_finite() && (-1.0..=1.0).contains(v))
    }

    /// Reflection across the world x-axis flips lateral and rotation.
    pub fn mirrored(&self) -> Label {
        Label([self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Forward-Euler step using the heading at the start of the step.
pub fn step_robot(pose: Pose2D, cmd: Command, dt: f64) -> Result<Pose2D, WorldError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(WorldError::InvalidTimeStep(dt));
    }
    Ok(integrate(pose, cmd, dt))
}

pub(crate) fn integrate(pose: Pose2D, cmd: Command, dt: f64) -> Pose2D {
    let (s, c) = (libm::sin(pose.theta), libm::cos(pose.theta));
    Pose2D {
        x: pose.x + dt * (cmd.advance * c - cmd.lateral * s),
        y: pose.y + dt * (cmd.advance * s + cmd.lateral * c),
        theta: wrap(pose.theta + dt * cmd.rotation),
    }
}

/// True when a disc of `radius` centered at `p` lies inside the room.
pub fn disc_fits(room: &Room, p: super::Point2, radius: f64) -> bool {
    if !point_in_polygon(&room.polygon, p) {
        return false;
    }
    let n = room.polygon.len();
    (0..n).all(|i| segment_distance(p, room.polygon[i], room.polygon[(i + 1) % n]) >= radius)
}

/// [`step_robot`] followed by wall handling: a move that would leave the
/// room keeps only the axis components (world frame) that stay inside.
pub fn step_robot_in_room(
    room: &Room,
    pose: Pose2D,
    cmd: Command,
    dt: f64,
    radius: f64,
) -> Result<Pose2D, WorldError> {
    let next = step_robot(pose, cmd, dt)?;
    let candidates = [
        super::Point2::new(next.x, next.y),
        super::Point2::new(next.x, pose.y),
        super::Point2::new(pose.x, next.y),
    ];
    let position = candidates
        .into_iter()
        .find(|p| disc_fits(room, *p, radius))
        .unwrap_or(super::Point2::new(pose.x, pose.y));
    Ok(Pose2D {
        x: position.x,
        y: position.y,
        theta: next.theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Point2, RoomShape};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn close(a: Pose2D, b: Pose2D) -> bool {
        (a.x - b.x).abs() < TOL && (a.y - b.y).abs() < TOL && (a.theta - b.theta).abs() < TOL
    }

    #[test]
    fn hand_evaluated_steps() {
        let p = step_robot(Pose2D::new(0.0, 0.0, 0.0), Command::new(1.0, 0.0, 0.0), 0.1).unwrap();
        assert!(close(p, Pose2D::new(0.1, 0.0, 0.0)), "{p:?}");
        let p = step_robot(Pose2D::new(0.0, 0.0, PI / 2.0), Command::new(1.0, 0.0, 0.0), 0.1).unwrap();
        assert!(close(p, Pose2D::new(0.0, 0.1, PI / 2.0)), "{p:?}");
        let p = step_robot(Pose2D::new(0.0, 0.0, 0.0), Command::new(1.0, 0.0, 1.0), 0.1).unwrap();
        assert!(close(p, Pose2D::new(0.1, 0.0, 0.1)), "{p:?}");
    }

    #[test]
    fn rejects_bad_dt() {
        let p = Pose2D::default();
        assert!(step_robot(p, Command::ZERO, 0.0).is_err());
        assert!(step_robot(p, Command::ZERO, -0.1).is_err());
        assert!(step_robot(p, Command::ZERO, f64::NAN).is_err());
    }

    #[test]
    fn slides_along_wall() {
        let room = Room::rectangle(4.0, 4.0);
        // Robot near the right wall (x = 2), pushing diagonally.
        let pose = Pose2D::new(1.7, 0.0, PI / 4.0);
        let next = step_robot_in_room(&room, pose, Command::new(1.0, 0.0, 0.0), 0.1, 0.25).unwrap();
        assert_eq!(next.x, 1.7);
        assert!(next.y > 0.0);
        assert_eq!(room.shape, RoomShape::Rectangle);
    }

    proptest! {
        #[test]
        fn zero_command_is_identity(x in -5.0f64..5.0, y in -5.0f64..5.0, th in -3.0f64..3.0) {
            let p = Pose2D::new(x, y, th);
            prop_assert_eq!(step_robot(p, Command::ZERO, 0.1).unwrap(), p);
        }

        #[test]
        fn translation_composes(
            x in -5.0f64..5.0, y in -5.0f64..5.0, th in -3.0f64..3.0,
            a in -1.0f64..1.0, l in -1.0f64..1.0, dt in 0.01f64..0.5,
        ) {
            let p = Pose2D::new(x, y, th);
            let c = Command::new(a, l, 0.0);
            let twice = step_robot(step_robot(p, c, dt).unwrap(), c, dt).unwrap();
            let once = step_robot(p, c, 2.0 * dt).unwrap();
            prop_assert!(close(twice, once));
        }

        #[test]
        fn stays_inside_room(
            a in -1.0f64..1.0, l in -1.0f64..1.0, r in -1.5f64..1.5, steps in 1usize..200,
        ) {
            let room = Room::l_shape(Point2::new(0.0, 0.0), 8.0, 6.0, 3.0, 2.5);
            let mut pose = Pose2D::new(-2.0, -1.5, 0.3);
            for _ in 0..steps {
                pose = step_robot_in_room(&room, pose, Command::new(a, l, r), 0.1, 0.25).unwrap();
                prop_assert!(room.contains(Point2::new(pose.x, pose.y)));
            }
        }
    }
}
