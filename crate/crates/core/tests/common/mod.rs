//! Helpers and independent oracles shared by the integration tests. The
//! geometry here is deliberately re-derived instead of calling the library.
#![allow(dead_code)]

use std::collections::VecDeque;

use sonata::controller::{ControllerConfig, EpisodeController};
use sonata::driver::drive_to_goal;
use sonata::recorder::Episode;
use sonata::rng::{Seed, SplitMix64};
use sonata::scene::{CountRange, GenerationRanges, RoomShapeChoice, SceneParams};
use sonata::world::{Mobility, Point2, WorldSnapshot};

/// Even-odd containment, boundary counted as inside.
pub fn inside(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if seg_dist(p, a, b) <= 1e-12 {
            return true;
        }
    }
    let mut odd = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                odd = !odd;
            }
        }
    }
    odd
}

pub fn seg_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

pub fn dist(a: Point2, b: Point2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

pub fn wall_gap(poly: &[Point2], p: Point2) -> f64 {
    (0..poly.len())
        .map(|i| seg_dist(p, poly[i], poly[(i + 1) % poly.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// Flood fill over a grid of `res`-sized cells covering the room's bounding
/// box, in the configuration space of a disc of radius `r`. Obstacles are
/// objects (circumscribed disc) and static humans. The robot and goal are
/// attached to any free cell center within `res` of them.
pub fn goal_reachable(s: &WorldSnapshot, params: &SceneParams, res: f64) -> bool {
    let poly = &s.room.polygon;
    let r = params.robot_radius;
    let min_x = poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_x = poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let max_y = poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let cols = ((max_x - min_x) / res).ceil() as usize;
    let rows = ((max_y - min_y) / res).ceil() as usize;
    let mut obstacles: Vec<(Point2, f64)> = s
        .objects
        .iter()
        .map(|o| (Point2::new(o.pose.x, o.pose.y), (o.side_x.powi(2) + o.side_y.powi(2)).sqrt() / 2.0))
        .collect();
    obstacles.extend(
        s.humans
            .iter()
            .filter(|h| h.mobility == Mobility::Static)
            .map(|h| (Point2::new(h.pose.x, h.pose.y), params.human_radius)),
    );
    let center = |c: usize, row: usize| {
        Point2::new(min_x + (c as f64 + 0.5) * res, min_y + (row as f64 + 0.5) * res)
    };
    let free: Vec<bool> = (0..rows * cols)
        .map(|k| {
            let p = center(k % cols, k / cols);
            inside(poly, p)
                && wall_gap(poly, p) >= r
                && obstacles.iter().all(|(c, rad)| dist(p, *c) >= rad + r)
        })
        .collect();
    let near = |q: Point2| -> Vec<usize> {
        (0..rows * cols)
            .filter(|&k| free[k] && dist(center(k % cols, k / cols), q) <= res)
            .collect()
    };
    let starts = near(Point2::new(s.robot.x, s.robot.y));
    let goals = near(Point2::new(s.goal.x, s.goal.y));
    let mut seen = vec![false; rows * cols];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for k in starts {
        seen[k] = true;
        queue.push_back(k);
    }
    while let Some(k) = queue.pop_front() {
        if goals.contains(&k) {
            return true;
        }
        let (c, row) = (k % cols, k / cols);
        let mut push = |n: usize| {
            if free[n] && !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        };
        if c + 1 < cols {
            push(k + 1);
        }
        if c > 0 {
            push(k - 1);
        }
        if row + 1 < rows {
            push(k + cols);
        }
        if row > 0 {
            push(k - cols);
        }
    }
    false
}

/// A satisfiable range set drawn from `rng`, small enough to place reliably.
pub fn random_ranges(rng: &mut SplitMix64) -> GenerationRanges {
    let mut pick = |lo: u32, hi: u32| {
        let a = rng.range_inclusive(lo, hi);
        let b = rng.range_inclusive(a, hi);
        CountRange::new(a, b)
    };
    let mut r = GenerationRanges {
        humans_static: pick(0, 4),
        humans_walking: pick(0, 3),
        tables: pick(0, 2),
        laptops: pick(0, 2),
        plants: pick(0, 2),
        human_human_talking: pick(0, 1),
        human_laptop_interaction: pick(0, 1),
        walking_groups: pick(0, 1),
    };
    // Make the interaction minima fit the entity maxima.
    if 2 * r.human_human_talking.min + r.human_laptop_interaction.min > r.humans_static.max {
        r.humans_static.max = 2 * r.human_human_talking.min + r.human_laptop_interaction.min;
        r.humans_static.min = r.humans_static.min.min(r.humans_static.max);
    }
    if r.human_laptop_interaction.min > r.laptops.max {
        r.laptops.max = r.human_laptop_interaction.min;
    }
    if 2 * r.walking_groups.min > r.humans_walking.max {
        r.humans_walking.max = 2 * r.walking_groups.min;
    }
    r.validate().expect("random ranges are satisfiable");
    r
}

pub fn random_shape(rng: &mut SplitMix64) -> RoomShapeChoice {
    match rng.below(3) {
        0 => RoomShapeChoice::Rectangle,
        1 => RoomShapeChoice::LShape,
        _ => RoomShapeChoice::Random,
    }
}

/// Drive a generated scene to its goal with the autopilot and return the
/// recorded episode in its stored (canonical) form.
pub fn autopilot_episode(seed: u64, ranges: GenerationRanges, shape: RoomShapeChoice) -> Episode {
    let mut config = ControllerConfig {
        user_id: "autopilot".into(),
        ..ControllerConfig::default()
    };
    config.scene.room_shape = shape;
    let mut c = EpisodeController::new(config, ranges, Seed(seed), None)
        .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    drive_to_goal(&mut c, 5000).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    c.episode(1_700_000_000 + seed).canonical()
}

/// `n` autopilot episodes over random ranges and room shapes, skipping
/// range draws that do not fit a room.
pub fn random_episodes(n: usize, seed: u64) -> Vec<Episode> {
    let mut rng = SplitMix64::new(Seed(seed));
    let mut out = Vec::with_capacity(n);
    let mut s = seed.wrapping_mul(1000);
    while out.len() < n {
        let ranges = random_ranges(&mut rng);
        let shape = random_shape(&mut rng);
        s += 1;
        let mut config = ControllerConfig {
            user_id: "autopilot".into(),
            ..ControllerConfig::default()
        };
        config.scene.room_shape = shape;
        let Ok(mut c) = EpisodeController::new(config, ranges, Seed(s), None) else {
            continue;
        };
        if drive_to_goal(&mut c, 5000).is_ok() {
            out.push(c.episode(1_700_000_000 + s).canonical());
        }
    }
    out
}
