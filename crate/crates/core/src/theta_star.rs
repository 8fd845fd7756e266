//! Theta* any-angle search over cell centers.
//!
//! The search graph is the 8-connected lattice of cell centers whose distance
//! to obstacles exceeds the clearance, with two extra vertices for the
//! continuous start and goal points. The start connects to the centers of its
//! cell and the eight cells around it, and the goal likewise; every such edge
//! must pass the clearance line-of-sight check.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::geom::Point;
use crate::grid::{Cell, GridMap};

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub waypoints: Vec<Point>,
}

impl Path {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Path { waypoints }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Sum of segment lengths.
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Checks line of sight between every consecutive pair of waypoints.
    pub fn is_valid(&self, map: &GridMap, clearance: f64) -> bool {
        !self.waypoints.is_empty()
            && self
                .waypoints
                .windows(2)
                .all(|w| map.line_of_sight(w[0], w[1], clearance))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanError {
    /// The start or goal point is closer to an obstacle than the clearance.
    EndpointBlocked,
    NoPath,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::EndpointBlocked => f.write_str("start or goal violates clearance"),
            PlanError::NoPath => f.write_str("no path"),
        }
    }
}

impl core::error::Error for PlanError {}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    f: f64,
    g: f64,
    // (i, j) of the node's cell; virtual nodes use their containing cell
    // with `kind` to separate them.
    key: (usize, usize, u8),
    node: u32,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap, so "greater" means "popped first": smaller f,
    // then larger g, then smaller (i, j).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a> {
    map: &'a GridMap,
    clearance: f64,
    start: Point,
    goal: Point,
    start_cell: Cell,
    goal_cell: Cell,
    g: Vec<f64>,
    parent: Vec<u32>,
    closed: Vec<bool>,
    // 0 = unknown, 1 = traversable, 2 = not traversable
    traversable: Vec<u8>,
}

impl<'a> Search<'a> {
    fn cells(&self) -> usize {
        self.map.width() * self.map.height()
    }

    fn start_node(&self) -> u32 {
        self.cells() as u32
    }

    fn goal_node(&self) -> u32 {
        self.cells() as u32 + 1
    }

    fn cell(&self, node: u32) -> Cell {
        let w = self.map.width();
        if node == self.start_node() {
            self.start_cell
        } else if node == self.goal_node() {
            self.goal_cell
        } else {
            Cell::new(node as usize % w, node as usize / w)
        }
    }

    fn pos(&self, node: u32) -> Point {
        if node == self.start_node() {
            self.start
        } else if node == self.goal_node() {
            self.goal
        } else {
            self.cell(node).center()
        }
    }

    fn key(&self, node: u32) -> (usize, usize, u8) {
        let c = self.cell(node);
        let kind = if node == self.start_node() {
            1
        } else if node == self.goal_node() {
            2
        } else {
            0
        };
        (c.i, c.j, kind)
    }

    fn is_traversable(&mut self, i: i64, j: i64) -> bool {
        if !self.map.in_bounds(i, j) {
            return false;
        }
        let k = j as usize * self.map.width() + i as usize;
        if self.traversable[k] == 0 {
            let c = Cell::new(i as usize, j as usize);
            let ok = !self.map.is_blocked(c)
                && self.map.distance_to_obstacles(c.center()) > self.clearance;
            self.traversable[k] = if ok { 1 } else { 2 };
        }
        self.traversable[k] == 1
    }

    fn los(&self, a: u32, b: u32) -> bool {
        self.map
            .line_of_sight(self.pos(a), self.pos(b), self.clearance)
    }

    /// Successors of `node` in a fixed order, without the Theta* rule.
    fn successors(&mut self, node: u32, out: &mut Vec<u32>) {
        out.clear();
        let w = self.map.width();
        let goal_node = self.goal_node();
        if node == goal_node {
            return;
        }
        let c = self.cell(node);
        let (ci, cj) = (c.i as i64, c.j as i64);
        let from_start = node == self.start_node();
        if from_start
            && self.is_traversable(ci, cj)
            && self.los(node, cj as u32 * w as u32 + ci as u32)
        {
            out.push(cj as u32 * w as u32 + ci as u32);
        }
        for dj in -1..=1_i64 {
            for di in -1..=1_i64 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (ci + di, cj + dj);
                if !self.is_traversable(ni, nj) {
                    continue;
                }
                let diagonal = di != 0 && dj != 0;
                if !from_start
                    && diagonal
                    && !(self.is_traversable(ci + di, cj) && self.is_traversable(ci, cj + dj))
                {
                    continue;
                }
                let n = nj as u32 * w as u32 + ni as u32;
                if self.los(node, n) {
                    out.push(n);
                }
            }
        }
        // The goal point hangs off its own cell and the ring around it.
        let gc = self.goal_cell;
        if !from_start
            && ci.abs_diff(gc.i as i64) <= 1
            && cj.abs_diff(gc.j as i64) <= 1
            && self.los(node, goal_node)
        {
            out.push(goal_node);
        }
    }
}

/// Plans an any-angle path from `start` to `goal` keeping `clearance` from
/// every blocked cell and from the map border.
pub fn plan_theta_star(
    map: &GridMap,
    start: Point,
    goal: Point,
    clearance: f64,
) -> Result<Path, PlanError> {
    if map.distance_to_obstacles(start) <= clearance || map.distance_to_obstacles(goal) <= clearance
    {
        return Err(PlanError::EndpointBlocked);
    }
    if map.line_of_sight(start, goal, clearance) {
        return Ok(Path::new(dedup(vec![start, goal])));
    }
    let (Some(start_cell), Some(goal_cell)) = (map.cell_of(start), map.cell_of(goal)) else {
        return Err(PlanError::EndpointBlocked);
    };
    let n = map.width() * map.height() + 2;
    let mut s = Search {
        map,
        clearance,
        start,
        goal,
        start_cell,
        goal_cell,
        g: vec![f64::INFINITY; n],
        parent: vec![NONE; n],
        closed: vec![false; n],
        traversable: vec![0; n - 2],
    };
    let root = s.start_node();
    let target = s.goal_node();
    let h = |p: Point| p.distance(goal);
    s.g[root as usize] = 0.0;
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        f: h(start),
        g: 0.0,
        key: s.key(root),
        node: root,
    });
    let mut succ = Vec::with_capacity(10);

    while let Some(entry) = open.pop() {
        let node = entry.node;
        if s.closed[node as usize] || entry.g != s.g[node as usize] {
            continue;
        }
        if node == target {
            return Ok(reconstruct(&s, target));
        }
        s.closed[node as usize] = true;
        s.successors(node, &mut succ);
        let grand = s.parent[node as usize];
        for &next in &succ {
            if s.closed[next as usize] {
                continue;
            }
            let (via, g_new) = if grand != NONE && s.los(grand, next) {
                (
                    grand,
                    s.g[grand as usize] + s.pos(grand).distance(s.pos(next)),
                )
            } else {
                (node, s.g[node as usize] + s.pos(node).distance(s.pos(next)))
            };
            if g_new < s.g[next as usize] {
                s.g[next as usize] = g_new;
                s.parent[next as usize] = via;
                open.push(OpenEntry {
                    f: g_new + h(s.pos(next)),
                    g: g_new,
                    key: s.key(next),
                    node: next,
                });
            }
        }
    }
    Err(PlanError::NoPath)
}

fn reconstruct(s: &Search<'_>, target: u32) -> Path {
    let mut pts = Vec::new();
    let mut node = target;
    while node != NONE {
        pts.push(s.pos(node));
        node = s.parent[node as usize];
    }
    pts.reverse();
    Path::new(prune(s.map, dedup(pts), s.clearance))
}

/// Drops waypoints whose neighbors see each other. Each removal replaces two
/// sides of a triangle by the third, so the path only gets shorter.
fn prune(map: &GridMap, pts: Vec<Point>, clearance: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for (k, &p) in pts.iter().enumerate() {
        if k + 1 < pts.len()
            && out.len() >= 1
            && map.line_of_sight(out[out.len() - 1], pts[k + 1], clearance)
        {
            continue;
        }
        out.push(p);
    }
    out
}

fn dedup(mut pts: Vec<Point>) -> Vec<Point> {
    pts.dedup();
    if pts.len() == 1 {
        // Start and goal coincide; keep both ends of the path explicit.
        pts.push(pts[0]);
    }
    pts
}

/// Restores visibility from `current` to `local_goal = path[cursor]`.
///
/// When the segment is blocked, plans from `current` to the local goal and
/// returns the path `[current, intermediate waypoints..., path[cursor..]]`
/// with the new cursor (1). When the segment is clear the path is returned
/// unchanged.
pub fn replan_segment(
    map: &GridMap,
    current: Point,
    path: &Path,
    cursor: usize,
    clearance: f64,
) -> Result<(Path, usize), PlanError> {
    let local_goal = path.waypoints[cursor];
    if map.line_of_sight(current, local_goal, clearance) {
        return Ok((path.clone(), cursor));
    }
    let detour = plan_theta_star(map, current, local_goal, clearance)?;
    let mut waypoints = Vec::with_capacity(detour.len() + path.len() - cursor);
    waypoints.extend_from_slice(&detour.waypoints[..detour.len() - 1]);
    waypoints.extend_from_slice(&path.waypoints[cursor..]);
    Ok((Path::new(waypoints), 1))
}
