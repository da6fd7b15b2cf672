use std::f64::consts::PI;

use super::{Footprint, GenerationRanges, OccupancyGrid, RoomShapeChoice, SceneError, SceneParams};
use crate::humans::{pick_unit_waypoint, BehaviorParams, Formation, WalkerState};
use crate::rng::{Seed, SplitMix64};
use crate::sim::World;
use crate::world::{
    disc_fits, wrap, Goal, Human, Interaction, InteractionKind, Mobility, ObjectKind, Point2,
    Pose2D, PoseIncrement, Room, SceneObject, WorldSnapshot,
};

const LAPTOP_SIDES: (f64, f64) = (0.35, 0.25);
const PLANT_SIDES: (f64, f64) = (0.4, 0.4);
const TABLE_SIDE_X: (f64, f64) = (0.8, 1.6);
const TABLE_SIDE_Y: (f64, f64) = (0.6, 1.0);

/// Rectangle with sides in `params.room_side`, centered at the origin; the
/// L variant removes one randomly chosen corner rectangle whose sides are a
/// `params.cut_fraction` share of the parent's. Counter-clockwise.
pub fn generate_room(choice: RoomShapeChoice, params: &SceneParams, rng: &mut SplitMix64) -> Room {
    let (lo, hi) = params.room_side;
    let width = rng.uniform(lo, hi);
    let height = rng.uniform(lo, hi);
    let l_shape = match choice {
        RoomShapeChoice::Rectangle => false,
        RoomShapeChoice::LShape => true,
        RoomShapeChoice::Random => rng.below(2) == 1,
    };
    if !l_shape {
        return Room::rectangle(width, height);
    }
    let (flo, fhi) = params.cut_fraction;
    let cut_w = width * rng.uniform(flo, fhi);
    let cut_h = height * rng.uniform(flo, fhi);
    let corner = rng.below(4);
    let base = Room::l_shape(Point2::new(0.0, 0.0), width, height, cut_w, cut_h);
    // 0: top-right, 1: top-left, 2: bottom-left, 3: bottom-right.
    let (fx, fy) = match corner {
        0 => (1.0, 1.0),
        1 => (-1.0, 1.0),
        2 => (-1.0, -1.0),
        _ => (1.0, -1.0),
    };
    let mut polygon: Vec<Point2> = base
        .polygon
        .iter()
        .map(|p| Point2::new(fx * p.x, fy * p.y))
        .collect();
    if fx * fy < 0.0 {
        polygon.reverse();
    }
    Room {
        shape: base.shape,
        polygon,
    }
}

/// Rejection sampling over the room's bounding box. A candidate disc of
/// `radius` is accepted when it lies inside the room with at least
/// `clearance` to every wall and every occupied footprint.
///
/// Clockwise (mirrored) rooms are sampled in their reflection so that a
/// mirrored world draws the mirror image of the original's samples.
pub fn sample_free_pose(
    room: &Room,
    occupied: &[Footprint],
    radius: f64,
    clearance: f64,
    rng: &mut SplitMix64,
    max_attempts: u32,
    entity: &'static str,
) -> Result<Pose2D, SceneError> {
    if !room.is_ccw() {
        let reflected: Vec<Footprint> = occupied.iter().map(Footprint::mirrored).collect();
        return sample_free_pose(&room.mirrored(), &reflected, radius, clearance, rng, max_attempts, entity)
            .map(|p| p.mirrored());
    }
    let (lo, hi) = room.bounding_box();
    for _ in 0..max_attempts {
        let p = Point2::new(rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y));
        let theta = wrap(rng.uniform(-PI, PI));
        if fits(room, occupied, p, radius, clearance) {
            return Ok(Pose2D { x: p.x, y: p.y, theta });
        }
    }
    Err(SceneError::Unsatisfiable {
        entity,
        attempts: max_attempts,
    })
}

fn fits(room: &Room, occupied: &[Footprint], p: Point2, radius: f64, clearance: f64) -> bool {
    disc_fits(room, p, radius + clearance)
        && occupied
            .iter()
            .all(|o| Footprint::new(p, radius).gap(o) >= clearance)
}

struct Builder<'a> {
    params: &'a SceneParams,
    room: Room,
    rng: SplitMix64,
    occupied: Vec<Footprint>,
    next_id: u32,
    humans: Vec<Human>,
    objects: Vec<SceneObject>,
    interactions: Vec<Interaction>,
    walkers: Vec<WalkerState>,
}

impl Builder<'_> {
    fn id(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn unsatisfiable(&self, entity: &'static str) -> SceneError {
        SceneError::Unsatisfiable {
            entity,
            attempts: self.params.max_attempts,
        }
    }

    fn place_object(&mut self, kind: ObjectKind, entity: &'static str) -> Result<u32, SceneError> {
        let (side_x, side_y) = match kind {
            ObjectKind::Table => (
                self.rng.uniform(TABLE_SIDE_X.0, TABLE_SIDE_X.1),
                self.rng.uniform(TABLE_SIDE_Y.0, TABLE_SIDE_Y.1),
            ),
            ObjectKind::Laptop => LAPTOP_SIDES,
            ObjectKind::Plant => PLANT_SIDES,
        };
        let radius = 0.5 * side_x.hypot(side_y);
        let pose = sample_free_pose(
            &self.room,
            &self.occupied,
            radius,
            self.params.clearance,
            &mut self.rng,
            self.params.max_attempts,
            entity,
        )?;
        let id = self.id();
        self.occupied.push(Footprint::new(pose.position(), radius));
        self.objects.push(SceneObject {
            id,
            pose,
            side_x,
            side_y,
            kind,
        });
        Ok(id)
    }

    fn push_human(&mut self, pose: Pose2D, mobility: Mobility, group_id: Option<u32>) -> u32 {
        let id = self.id();
        self.occupied
            .push(Footprint::new(pose.position(), self.params.human_radius));
        self.humans.push(Human {
            id,
            pose,
            increment: PoseIncrement::ZERO,
            mobility,
            group_id,
            waypoint: None,
        });
        id
    }

    fn human_fits(&self, p: Point2) -> bool {
        fits(&self.room, &self.occupied, p, self.params.human_radius, self.params.clearance)
    }

    fn place_laptop_user(&mut self, laptop: u32) -> Result<(), SceneError> {
        let obj = self.objects.iter().find(|o| o.id == laptop).expect("laptop exists");
        let center = obj.pose.position();
        let lo = self
            .params
            .laptop_distance
            .0
            .max(self.params.human_radius + obj.half_diagonal() + self.params.clearance);
        let hi = self.params.laptop_distance.1;
        if lo > hi {
            return Err(self.unsatisfiable("laptop user"));
        }
        for _ in 0..self.params.max_attempts {
            let bearing = self.rng.uniform(-PI, PI);
            let d = self.rng.uniform(lo, hi);
            let p = Point2::new(
                center.x + d * libm::cos(bearing),
                center.y + d * libm::sin(bearing),
            );
            if self.human_fits(p) {
                let pose = Pose2D::new(p.x, p.y, bearing + PI);
                let id = self.push_human(pose, Mobility::Static, None);
                self.interactions.push(Interaction {
                    entity1_id: id,
                    entity2_id: laptop,
                    kind: InteractionKind::HumanLaptopInteraction,
                });
                return Ok(());
            }
        }
        Err(self.unsatisfiable("laptop user"))
    }

    fn place_talking_pair(&mut self) -> Result<(), SceneError> {
        let lo = self
            .params
            .talk_distance
            .0
            .max(2.0 * self.params.human_radius + self.params.clearance);
        let hi = self.params.talk_distance.1;
        let (box_lo, box_hi) = self.room.bounding_box();
        for _ in 0..self.params.max_attempts {
            let c = Point2::new(
                self.rng.uniform(box_lo.x, box_hi.x),
                self.rng.uniform(box_lo.y, box_hi.y),
            );
            let phi = self.rng.uniform(-PI, PI);
            let d = self.rng.uniform(lo, hi);
            let (s, co) = (libm::sin(phi), libm::cos(phi));
            let a = Point2::new(c.x - 0.5 * d * co, c.y - 0.5 * d * s);
            let b = Point2::new(c.x + 0.5 * d * co, c.y + 0.5 * d * s);
            if self.human_fits(a) && self.human_fits(b) {
                let ia = self.push_human(Pose2D::new(a.x, a.y, phi), Mobility::Static, None);
                let ib = self.push_human(Pose2D::new(b.x, b.y, phi + PI), Mobility::Static, None);
                self.interactions.push(Interaction {
                    entity1_id: ia,
                    entity2_id: ib,
                    kind: InteractionKind::HumanHumanTalking,
                });
                return Ok(());
            }
        }
        Err(self.unsatisfiable("talking pair"))
    }

    fn place_static_human(&mut self) -> Result<(), SceneError> {
        let pose = sample_free_pose(
            &self.room,
            &self.occupied,
            self.params.human_radius,
            self.params.clearance,
            &mut self.rng,
            self.params.max_attempts,
            "static human",
        )?;
        self.push_human(pose, Mobility::Static, None);
        Ok(())
    }

    fn static_footprints(&self) -> Vec<Footprint> {
        self.objects
            .iter()
            .map(|o| Footprint::new(o.pose.position(), o.half_diagonal()))
            .chain(
                self.humans
                    .iter()
                    .filter(|h| h.mobility == Mobility::Static)
                    .map(|h| Footprint::new(h.pose.position(), self.params.human_radius)),
            )
            .collect()
    }

    fn behavior(&self) -> BehaviorParams {
        BehaviorParams {
            human_radius: self.params.human_radius,
            robot_radius: self.params.robot_radius,
            waypoint_clearance: self.params.waypoint_clearance,
            max_attempts: self.params.max_attempts,
            ..BehaviorParams::default()
        }
    }

    /// One walker, or a side-by-side group of two when `group` is set.
    fn place_walker_unit(&mut self, group: Option<u32>) -> Result<(), SceneError> {
        let entity = if group.is_some() { "walking group" } else { "walking human" };
        let spacing = self.params.group_spacing;
        let mut placed = None;
        for _ in 0..self.params.max_attempts {
            let lead = sample_free_pose(
                &self.room,
                &self.occupied,
                self.params.human_radius,
                self.params.clearance,
                &mut self.rng,
                self.params.max_attempts,
                entity,
            )?;
            let offset = Point2::new(
                -spacing * libm::sin(lead.theta),
                spacing * libm::cos(lead.theta),
            );
            if group.is_none() {
                placed = Some((lead, Vec::new()));
                break;
            }
            let follower = lead.position().add(offset);
            if self.human_fits(follower) {
                placed = Some((lead, vec![offset]));
                break;
            }
        }
        let (lead, offsets) = placed.ok_or_else(|| self.unsatisfiable(entity))?;

        let statics = self.static_footprints();
        let behavior = self.behavior();
        let mut unit_offsets = vec![Point2::default()];
        unit_offsets.extend(offsets.iter().copied());
        let waypoint = pick_unit_waypoint(&self.room, &statics, &unit_offsets, &behavior, &mut self.rng)
            .map_err(|_| self.unsatisfiable(entity))?;
        let speed = self
            .rng
            .uniform(self.params.walker_speed.0, self.params.walker_speed.1);
        let to_wp = waypoint.sub(lead.position());
        let heading = libm::atan2(to_wp.y, to_wp.x);

        let leader_id = self.push_human(Pose2D::new(lead.x, lead.y, heading), Mobility::Walker, group);
        self.walkers.push(WalkerState {
            human_id: leader_id,
            waypoint,
            speed,
            formation: None,
            halted_ticks: 0,
        });
        self.humans.last_mut().unwrap().waypoint = Some(waypoint);
        for offset in offsets {
            let p = lead.position().add(offset);
            let id = self.push_human(Pose2D::new(p.x, p.y, heading), Mobility::Walker, group);
            self.humans.last_mut().unwrap().waypoint = Some(waypoint.add(offset));
            self.walkers.push(WalkerState {
                human_id: id,
                waypoint: waypoint.add(offset),
                speed,
                formation: Some(Formation {
                    leader: leader_id,
                    offset,
                }),
                halted_ticks: 0,
            });
            self.interactions.push(Interaction {
                entity1_id: leader_id,
                entity2_id: id,
                kind: InteractionKind::HumanHumanWalking,
            });
        }
        Ok(())
    }
}

struct Counts {
    talking: u32,
    laptop_users: u32,
    groups: u32,
    humans_static: u32,
    humans_walking: u32,
    tables: u32,
    laptops: u32,
    plants: u32,
}

/// Interaction counts first, then entity counts with their lower bounds
/// raised so every interaction has the entities it consumes.
fn draw_counts(r: &GenerationRanges, rng: &mut SplitMix64) -> Counts {
    let talk_hi = r
        .human_human_talking
        .max
        .min((r.humans_static.max - r.human_laptop_interaction.min) / 2);
    let talking = rng.range_inclusive(r.human_human_talking.min, talk_hi);
    let lap_hi = r
        .human_laptop_interaction
        .max
        .min(r.humans_static.max - 2 * talking)
        .min(r.laptops.max);
    let laptop_users = rng.range_inclusive(r.human_laptop_interaction.min, lap_hi);
    let groups_hi = r.walking_groups.max.min(r.humans_walking.max / 2);
    let groups = rng.range_inclusive(r.walking_groups.min, groups_hi);

    let humans_static = rng.range_inclusive(
        r.humans_static.min.max(2 * talking + laptop_users),
        r.humans_static.max,
    );
    let humans_walking =
        rng.range_inclusive(r.humans_walking.min.max(2 * groups), r.humans_walking.max);
    let tables = rng.range_inclusive(r.tables.min, r.tables.max);
    let laptops = rng.range_inclusive(r.laptops.min.max(laptop_users), r.laptops.max);
    let plants = rng.range_inclusive(r.plants.min, r.plants.max);
    Counts {
        talking,
        laptop_users,
        groups,
        humans_static,
        humans_walking,
        tables,
        laptops,
        plants,
    }
}

/// Full generated world: snapshot at frame 0 plus walker state and the
/// random stream that drives later behavior.
pub fn generate_world(
    ranges: &GenerationRanges,
    params: &SceneParams,
    seed: Seed,
) -> Result<World, SceneError> {
    ranges.validate()?;
    let mut rng = SplitMix64::new(seed);
    let room = generate_room(params.room_shape, params, &mut rng);
    let counts = draw_counts(ranges, &mut rng);

    let mut b = Builder {
        params,
        room,
        rng,
        occupied: Vec::new(),
        next_id: 1,
        humans: Vec::new(),
        objects: Vec::new(),
        interactions: Vec::new(),
        walkers: Vec::new(),
    };

    for _ in 0..counts.tables {
        b.place_object(ObjectKind::Table, "table")?;
    }
    for _ in 0..counts.plants {
        b.place_object(ObjectKind::Plant, "plant")?;
    }
    let mut laptops = Vec::new();
    for _ in 0..counts.laptops {
        laptops.push(b.place_object(ObjectKind::Laptop, "laptop")?);
    }
    for laptop in laptops.iter().take(counts.laptop_users as usize) {
        b.place_laptop_user(*laptop)?;
    }
    for _ in 0..counts.talking {
        b.place_talking_pair()?;
    }
    for _ in (2 * counts.talking + counts.laptop_users)..counts.humans_static {
        b.place_static_human()?;
    }
    for g in 0..counts.groups {
        b.place_walker_unit(Some(g + 1))?;
    }
    for _ in (2 * counts.groups)..counts.humans_walking {
        b.place_walker_unit(None)?;
    }

    let robot = sample_free_pose(
        &b.room,
        &b.occupied,
        params.robot_radius,
        params.clearance,
        &mut b.rng,
        params.max_attempts,
        "robot",
    )?;
    b.occupied
        .push(Footprint::new(robot.position(), params.robot_radius));

    let grid = OccupancyGrid::new(
        &b.room,
        &b.static_footprints(),
        params.robot_radius,
        params.grid_resolution,
    );
    let mut goal_position = None;
    for _ in 0..params.max_attempts {
        let candidate = sample_free_pose(
            &b.room,
            &b.occupied,
            params.robot_radius,
            params.clearance,
            &mut b.rng,
            params.max_attempts,
            "goal",
        )?
        .position();
        if candidate.distance(robot.position()) >= params.min_goal_distance
            && grid.reachable(robot.position(), candidate)
        {
            goal_position = Some(candidate);
            break;
        }
    }
    let goal_position = goal_position.ok_or_else(|| b.unsatisfiable("goal"))?;

    let walls = b.room.walls(b.next_id);
    let goal_id = b.next_id + walls.len() as u32;
    let state = WorldSnapshot {
        frame_id: 0,
        sim_time: 0.0,
        robot,
        room: b.room,
        humans: b.humans,
        objects: b.objects,
        walls,
        goal: Goal {
            id: goal_id,
            x: goal_position.x,
            y: goal_position.y,
        },
        interactions: b.interactions,
    };
    Ok(World {
        state,
        walkers: b.walkers,
        rng: b.rng,
    })
}

/// Frame-0 snapshot for `(ranges, seed)` with default geometry.
pub fn generate_scene(ranges: &GenerationRanges, seed: Seed) -> Result<WorldSnapshot, SceneError> {
    generate_world(ranges, &SceneParams::default(), seed).map(|w| w.state)
}
