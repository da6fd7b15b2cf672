use std::collections::VecDeque;

use super::Footprint;
use crate::world::{Point2, Room};

/// Coarse occupancy grid over the room's bounding box, in the configuration
/// space of a disc robot: a cell is free when its center is inside the room,
/// at least `robot_radius` from every wall, and outside every obstacle disc
/// inflated by `robot_radius`.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    origin: Point2,
    resolution: f64,
    cols: usize,
    rows: usize,
    free: Vec<bool>,
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

impl OccupancyGrid {
    pub fn new(room: &Room, obstacles: &[Footprint], robot_radius: f64, resolution: f64) -> Self {
        let (lo, hi) = room.bounding_box();
        let cols = ((hi.x - lo.x) / resolution).ceil().max(1.0) as usize;
        let rows = ((hi.y - lo.y) / resolution).ceil().max(1.0) as usize;
        let mut free = vec![false; cols * rows];
        for r in 0..rows {
            for c in 0..cols {
                let p = Point2::new(
                    lo.x + (c as f64 + 0.5) * resolution,
                    lo.y + (r as f64 + 0.5) * resolution,
                );
                free[r * cols + c] = room.contains(p)
                    && room.wall_distance(p) >= robot_radius
                    && obstacles
                        .iter()
                        .all(|o| p.distance(o.center) >= o.radius + robot_radius);
            }
        }
        OccupancyGrid {
            origin: lo,
            resolution,
            cols,
            rows,
            free,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn center(&self, cell: (usize, usize)) -> Point2 {
        Point2::new(
            self.origin.x + (cell.0 as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.1 as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_free(&self, cell: (usize, usize)) -> bool {
        cell.0 < self.cols && cell.1 < self.rows && self.free[cell.1 * self.cols + cell.0]
    }

    pub fn free_cells(&self) -> usize {
        self.free.iter().filter(|f| **f).count()
    }

    /// Free cells whose centers lie within one resolution step of `p`.
    fn anchors(&self, p: Point2) -> Vec<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.resolution).floor() as i64;
        let r = ((p.y - self.origin.y) / self.resolution).floor() as i64;
        let mut out = Vec::new();
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (cc, rr) = (c + dc, r + dr);
                if cc < 0 || rr < 0 {
                    continue;
                }
                let cell = (cc as usize, rr as usize);
                if self.is_free(cell) && self.center(cell).distance(p) <= self.resolution {
                    out.push(cell);
                }
            }
        }
        out.sort_by(|a, b| {
            self.center(*a)
                .distance(p)
                .total_cmp(&self.center(*b).distance(p))
        });
        out
    }

    fn step_allowed(&self, from: (usize, usize), dc: i64, dr: i64) -> Option<(usize, usize)> {
        let c = from.0 as i64 + dc;
        let r = from.1 as i64 + dr;
        if c < 0 || r < 0 {
            return None;
        }
        let to = (c as usize, r as usize);
        if !self.is_free(to) {
            return None;
        }
        // Diagonal moves may not cut corners.
        if dc != 0 && dr != 0
            && !(self.is_free((c as usize, from.1)) && self.is_free((from.0, r as usize)))
        {
            return None;
        }
        Some(to)
    }

    /// Breadth-first search between the cells anchored at `from` and `to`;
    /// returns the cell-center path including both anchor cells.
    pub fn path(&self, from: Point2, to: Point2) -> Option<Vec<Point2>> {
        let starts = self.anchors(from);
        let goals = self.anchors(to);
        if starts.is_empty() || goals.is_empty() {
            return None;
        }
        let idx = |cell: (usize, usize)| cell.1 * self.cols + cell.0;
        let mut parent = vec![usize::MAX; self.free.len()];
        let mut queue = VecDeque::new();
        for s in &starts {
            parent[idx(*s)] = idx(*s);
            queue.push_back(*s);
        }
        let mut reached = None;
        while let Some(cell) = queue.pop_front() {
            if goals.contains(&cell) {
                reached = Some(cell);
                break;
            }
            for (dc, dr) in NEIGHBORS {
                if let Some(next) = self.step_allowed(cell, dc, dr) {
                    if parent[idx(next)] == usize::MAX {
                        parent[idx(next)] = idx(cell);
                        queue.push_back(next);
                    }
                }
            }
        }
        let mut cell = idx(reached?);
        let mut out = Vec::new();
        loop {
            out.push(self.center((cell % self.cols, cell / self.cols)));
            if parent[cell] == cell {
                break;
            }
            cell = parent[cell];
        }
        out.reverse();
        Some(out)
    }

    pub fn reachable(&self, from: Point2, to: Point2) -> bool {
        self.path(from, to).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_room_is_connected() {
        let room = Room::rectangle(6.0, 6.0);
        let grid = OccupancyGrid::new(&room, &[], 0.25, 0.25);
        let path = grid.path(Point2::new(-2.0, -2.0), Point2::new(2.0, 2.0)).unwrap();
        assert!(path.len() >= 2);
        assert!(path.first().unwrap().distance(Point2::new(-2.0, -2.0)) <= 0.25);
        assert!(path.last().unwrap().distance(Point2::new(2.0, 2.0)) <= 0.25);
    }

    #[test]
    fn barrier_blocks_path() {
        let room = Room::rectangle(6.0, 2.0);
        // A column of discs spanning the corridor height.
        let wall: Vec<Footprint> = (0..5)
            .map(|i| Footprint::new(Point2::new(0.0, -1.0 + 0.5 * i as f64), 0.3))
            .collect();
        let grid = OccupancyGrid::new(&room, &wall, 0.25, 0.25);
        assert!(!grid.reachable(Point2::new(-2.0, 0.0), Point2::new(2.0, 0.0)));
        assert!(grid.reachable(Point2::new(-2.0, 0.0), Point2::new(-1.5, 0.4)));
    }
}
