//! Helpers shared by the integration tests: an independent 8-connected grid
//! search used as the Theta* oracle, random fixtures and a trace auditor.
#![allow(dead_code)]

pub mod mapf;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use swarmnav_core::geom::closest_approach;
use swarmnav_core::sim::Observer;
use swarmnav_core::{AgentState, Cell, GridMap, Point, Vec2};

/// Length of the shortest 8-connected path between the centers of two cells.
///
/// A cell is usable when it is free and its center keeps `clearance` from
/// every obstacle. Straight moves need line of sight between the centers;
/// diagonal moves additionally need both cells they cut past to be usable.
pub fn grid_shortest_path(map: &GridMap, from: Cell, to: Cell, clearance: f64) -> Option<f64> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let usable = |i: i64, j: i64| {
        map.in_bounds(i, j) && {
            let c = Cell::new(i as usize, j as usize);
            !map.is_blocked(c) && map.distance_to_obstacles(c.center()) > clearance
        }
    };
    if !usable(from.i as i64, from.j as i64) || !usable(to.i as i64, to.j as i64) {
        return None;
    }
    let idx = |i: i64, j: i64| (j * w + i) as usize;
    let mut dist = vec![f64::INFINITY; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    dist[idx(from.i as i64, from.j as i64)] = 0.0;
    // Distances are non-negative, so their bit patterns order like the values.
    heap.push(Reverse((0f64.to_bits(), from.i as i64, from.j as i64)));
    while let Some(Reverse((bits, i, j))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[idx(i, j)] {
            continue;
        }
        if (i, j) == (to.i as i64, to.j as i64) {
            return Some(d);
        }
        for (di, dj) in [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ] {
            let (ni, nj) = (i + di, j + dj);
            if !usable(ni, nj) {
                continue;
            }
            let diagonal = di != 0 && dj != 0;
            if diagonal && !(usable(i + di, j) && usable(i, j + dj)) {
                continue;
            }
            let a = Cell::new(i as usize, j as usize).center();
            let b = Cell::new(ni as usize, nj as usize).center();
            if !map.line_of_sight(a, b, clearance) {
                continue;
            }
            let nd = d + if diagonal {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            if nd < dist[idx(ni, nj)] {
                dist[idx(ni, nj)] = nd;
                heap.push(Reverse((nd.to_bits(), ni, nj)));
            }
        }
    }
    None
}

/// Each cell blocked with probability `density`.
pub fn random_map(rng: &mut impl Rng, width: usize, height: usize, density: f64) -> GridMap {
    let blocked = (0..width * height).map(|_| rng.gen_bool(density)).collect();
    GridMap::new(width, height, blocked).unwrap()
}

/// A random free cell.
pub fn random_free_cell(rng: &mut impl Rng, map: &GridMap) -> Cell {
    loop {
        let c = Cell::new(
            rng.gen_range(0..map.width()),
            rng.gen_range(0..map.height()),
        );
        if !map.is_blocked(c) {
            return c;
        }
    }
}

/// Two agents on a 30×30 open map whose straight paths cross near the
/// middle at about the same time.
pub fn crossing_pair(rng: &mut impl Rng) -> (GridMap, Vec<Point>, Vec<Point>) {
    let map = GridMap::empty(30, 30).unwrap();
    let center = Vec2::new(
        15.0 + rng.gen_range(-1.0..1.0),
        15.0 + rng.gen_range(-1.0..1.0),
    );
    let heading = |rng: &mut dyn rand::RngCore| {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Vec2::new(a.cos(), a.sin())
    };
    loop {
        let (da, db) = (heading(rng), heading(rng));
        let (la, lb) = (rng.gen_range(5.0..10.0), rng.gen_range(5.0..10.0));
        let offset = |rng: &mut dyn rand::RngCore| {
            Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
        };
        let starts = vec![
            center - da * la + offset(rng),
            center - db * lb + offset(rng),
        ];
        let goals = vec![
            center + da * rng.gen_range(5.0..10.0),
            center + db * rng.gen_range(5.0..10.0),
        ];
        if starts[0].distance(starts[1]) > 1.2 && goals[0].distance(goals[1]) > 1.2 {
            return (map, starts, goals);
        }
    }
}

/// Eight agents evenly spaced on a circle, each heading to the opposite
/// point. The circle's radius, rotation and center are random.
pub fn antipodal_circle(rng: &mut impl Rng) -> (GridMap, Vec<Point>, Vec<Point>) {
    let map = GridMap::empty(24, 24).unwrap();
    let radius = rng.gen_range(5.0..8.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let center = Vec2::new(
        12.0 + rng.gen_range(-1.0..1.0),
        12.0 + rng.gen_range(-1.0..1.0),
    );
    let (mut starts, mut goals) = (Vec::new(), Vec::new());
    for k in 0..8 {
        let a = phase + k as f64 * std::f64::consts::TAU / 8.0;
        let u = Vec2::new(a.cos(), a.sin());
        starts.push(center + u * radius);
        goals.push(center - u * radius);
    }
    (map, starts, goals)
}

/// Records the worst values of the trace validity checks.
#[derive(Clone, Debug)]
pub struct TraceAudit<'m> {
    pub map: &'m GridMap,
    previous: Vec<AgentState>,
    pub steps: u64,
    /// Smallest gap between physical discs, including between steps.
    pub min_gap: f64,
    /// Smallest `distance_to_obstacles - radius`.
    pub min_obstacle_gap: f64,
    pub max_displacement: f64,
    pub max_speed: f64,
}

impl<'m> TraceAudit<'m> {
    pub fn new(map: &'m GridMap) -> Self {
        TraceAudit {
            map,
            previous: Vec::new(),
            steps: 0,
            min_gap: f64::INFINITY,
            min_obstacle_gap: f64::INFINITY,
            max_displacement: 0.0,
            max_speed: 0.0,
        }
    }
}

impl Observer for TraceAudit<'_> {
    fn on_step(&mut self, _step: u64, agents: &[AgentState]) {
        self.steps += 1;
        let moved = self.previous.len() == agents.len();
        for (k, a) in agents.iter().enumerate() {
            self.min_obstacle_gap = self
                .min_obstacle_gap
                .min(self.map.distance_to_obstacles(a.position) - a.radius);
            self.max_speed = self.max_speed.max(a.velocity.length());
            let p0 = if moved {
                self.previous[k].position
            } else {
                a.position
            };
            self.max_displacement = self.max_displacement.max(p0.distance(a.position));
            for (l, b) in agents.iter().enumerate().skip(k + 1) {
                let q0 = if moved {
                    self.previous[l].position
                } else {
                    b.position
                };
                let d = closest_approach(p0, a.position, q0, b.position);
                self.min_gap = self.min_gap.min(d - a.radius - b.radius);
            }
        }
        self.previous = agents.to_vec();
    }
}
