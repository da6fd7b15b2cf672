//! Per-tick human motion: walkers steer toward waypoints, walking groups move
//! as rigid formations, static and interacting humans hold their pose.
//!
//! Avoidance is a halt rule: a walker does not translate on a tick where the
//! robot, another human or an object is within `halt_distance` ahead of it.
//! Walkers blocked by an object, a wall, or for too long pick a new waypoint.

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::scene::{sample_free_pose, Footprint, SceneError};
use crate::world::{disc_fits, wrap, Mobility, Point2, PoseIncrement, Room, WorldSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formation {
    pub leader: u32,
    /// Fixed world-frame offset from the leader's waypoint.
    pub offset: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerState {
    pub human_id: u32,
    pub waypoint: Point2,
    /// m/s, within `[0.3, 0.8]`.
    pub speed: f64,
    /// Set for group members other than the leader.
    pub formation: Option<Formation>,
    pub halted_ticks: u32,
}

impl WalkerState {
    pub fn mirrored(&self) -> WalkerState {
        WalkerState {
            waypoint: self.waypoint.mirrored(),
            formation: self.formation.map(|f| Formation {
                leader: f.leader,
                offset: f.offset.mirrored(),
            }),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorParams {
    /// rad/s
    pub max_turn_rate: f64,
    pub arrival_radius: f64,
    pub halt_distance: f64,
    pub human_radius: f64,
    pub robot_radius: f64,
    pub waypoint_clearance: f64,
    /// Ticks a walker waits behind a moving obstacle before re-planning.
    pub patience_ticks: u32,
    pub max_attempts: u32,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            max_turn_rate: 1.5,
            arrival_radius: 0.3,
            halt_distance: 0.4,
            human_radius: 0.2,
            robot_radius: 0.25,
            waypoint_clearance: 0.4,
            patience_ticks: 30,
            max_attempts: 200,
        }
    }
}

/// Uniform free point at least `waypoint_clearance` from walls and static
/// footprints.
pub fn pick_waypoint(
    room: &Room,
    static_footprints: &[Footprint],
    params: &BehaviorParams,
    rng: &mut SplitMix64,
) -> Result<Point2, SceneError> {
    sample_free_pose(
        room,
        static_footprints,
        0.0,
        params.waypoint_clearance,
        rng,
        params.max_attempts,
        "waypoint",
    )
    .map(|p| p.position())
}

fn waypoint_is_free(room: &Room, p: Point2, statics: &[Footprint], clearance: f64) -> bool {
    disc_fits(room, p, clearance)
        && statics
            .iter()
            .all(|s| Footprint::new(p, 0.0).gap(s) >= clearance)
}

/// Waypoint for a walker unit: the leader's point plus every member offset
/// must be free.
pub(crate) fn pick_unit_waypoint(
    room: &Room,
    statics: &[Footprint],
    offsets: &[Point2],
    params: &BehaviorParams,
    rng: &mut SplitMix64,
) -> Result<Point2, SceneError> {
    for _ in 0..params.max_attempts {
        let wp = pick_waypoint(room, statics, params, rng)?;
        if offsets
            .iter()
            .all(|o| waypoint_is_free(room, wp.add(*o), statics, params.waypoint_clearance))
        {
            return Ok(wp);
        }
    }
    Err(SceneError::Unsatisfiable {
        entity: "group waypoint",
        attempts: params.max_attempts,
    })
}

fn static_footprints(state: &WorldSnapshot, params: &BehaviorParams) -> Vec<Footprint> {
    state
        .objects
        .iter()
        .map(|o| Footprint::new(o.pose.position(), o.half_diagonal()))
        .chain(
            state
                .humans
                .iter()
                .filter(|h| h.mobility == Mobility::Static)
                .map(|h| Footprint::new(h.pose.position(), params.human_radius)),
        )
        .collect()
}

enum Blocked {
    No,
    /// Robot or another human: wait.
    Moving,
    /// Object or wall: re-plan.
    Fixed,
}

/// Advance every walker by one tick. Static humans keep their pose and get
/// a zero increment.
pub fn step_humans(
    state: &mut WorldSnapshot,
    walkers: &mut [WalkerState],
    rng: &mut SplitMix64,
    dt: f64,
    params: &BehaviorParams,
) -> Result<(), SceneError> {
    for h in &mut state.humans {
        h.increment = PoseIncrement::ZERO;
    }
    if walkers.is_empty() {
        return Ok(());
    }
    let statics = static_footprints(state, params);
    let objects: Vec<Footprint> = state
        .objects
        .iter()
        .map(|o| Footprint::new(o.pose.position(), o.half_diagonal()))
        .collect();
    let robot = Footprint::new(state.robot.position(), params.robot_radius);
    let max_turn = params.max_turn_rate * dt;

    let leaders: Vec<usize> = (0..walkers.len())
        .filter(|i| walkers[*i].formation.is_none())
        .collect();

    for li in leaders {
        let leader_id = walkers[li].human_id;
        let members: Vec<usize> = std::iter::once(li)
            .chain((0..walkers.len()).filter(|i| {
                walkers[*i].formation.is_some_and(|f| f.leader == leader_id)
            }))
            .collect();
        let offsets: Vec<Point2> = members
            .iter()
            .map(|i| walkers[*i].formation.map_or(Point2::default(), |f| f.offset))
            .collect();

        let leader_pos = human_position(state, leader_id);
        if leader_pos.distance(walkers[li].waypoint) < params.arrival_radius {
            walkers[li].waypoint = pick_unit_waypoint(&state.room, &statics, &offsets, params, rng)?;
        }
        let waypoint = walkers[li].waypoint;
        let speed = walkers[li].speed;

        // Proposed motion of every member.
        let mut proposals = Vec::with_capacity(members.len());
        let mut blocked = Blocked::No;
        for (k, wi) in members.iter().enumerate() {
            let id = walkers[*wi].human_id;
            let h = state.human(id).expect("walker has a human");
            let target = waypoint.add(offsets[k]);
            let to_target = target.sub(h.pose.position());
            let desired = libm::atan2(to_target.y, to_target.x);
            let turn = wrap(desired - h.pose.theta).clamp(-max_turn, max_turn);
            let heading = wrap(h.pose.theta + turn);
            let step = speed * dt;
            let (s, c) = (libm::sin(heading), libm::cos(heading));
            let next = Point2::new(h.pose.x + step * c, h.pose.y + step * s);
            let forward = Point2::new(c, s);
            let me = Footprint::new(h.pose.position(), params.human_radius);

            let ahead = |o: &Footprint| {
                me.gap(o) < params.halt_distance && o.center.sub(me.center).dot(forward) > 0.0
            };
            if !disc_fits(&state.room, next, params.human_radius) || objects.iter().any(ahead) {
                blocked = Blocked::Fixed;
            } else if matches!(blocked, Blocked::No) {
                let other_human = state.humans.iter().any(|o| {
                    o.id != id
                        && !members.iter().any(|m| walkers[*m].human_id == o.id)
                        && ahead(&Footprint::new(o.pose.position(), params.human_radius))
                });
                if ahead(&robot) || other_human {
                    blocked = Blocked::Moving;
                }
            }
            proposals.push((id, heading, next));
        }

        let replan = match blocked {
            Blocked::No => {
                walkers[li].halted_ticks = 0;
                false
            }
            Blocked::Moving => {
                walkers[li].halted_ticks += 1;
                walkers[li].halted_ticks > params.patience_ticks
            }
            Blocked::Fixed => true,
        };

        for (id, heading, next) in proposals {
            let h = state
                .humans
                .iter_mut()
                .find(|h| h.id == id)
                .expect("walker has a human");
            let old = h.pose;
            h.pose.theta = heading;
            if matches!(blocked, Blocked::No) {
                h.pose.x = next.x;
                h.pose.y = next.y;
            }
            h.increment = PoseIncrement {
                ix: h.pose.x - old.x,
                iy: h.pose.y - old.y,
                iangle: wrap(h.pose.theta - old.theta),
            };
        }

        if replan {
            walkers[li].halted_ticks = 0;
            walkers[li].waypoint = pick_unit_waypoint(&state.room, &statics, &offsets, params, rng)?;
        }
        for wi in &members {
            let id = walkers[*wi].human_id;
            let wp = waypoint_for(walkers, *wi, walkers[li].waypoint);
            if let Some(h) = state.humans.iter_mut().find(|h| h.id == id) {
                h.waypoint = Some(wp);
            }
        }
    }
    Ok(())
}

fn waypoint_for(walkers: &[WalkerState], index: usize, leader_waypoint: Point2) -> Point2 {
    match walkers[index].formation {
        Some(f) => leader_waypoint.add(f.offset),
        None => walkers[index].waypoint,
    }
}

fn human_position(state: &WorldSnapshot, id: u32) -> Point2 {
    state
        .human(id)
        .map(|h| h.pose.position())
        .expect("walker has a human")
}
