//! Scenario sampling and the synthetic rooms map.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmnav_core::{Cell, GridMap};

use crate::formats::{Scenario, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ScenarioKind {
    /// Half of the agents cross from the left room to the right one, the
    /// other half the other way.
    Gaps,
    /// Uniform over free cells with start and goal in the same component.
    Rooms,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("map {map}: could not place {agents} agents after {attempts} attempts")]
    Sampling {
        map: String,
        agents: usize,
        attempts: usize,
    },
    #[error("map {map}: {reason}")]
    BadMap { map: String, reason: String },
}

const ATTEMPTS_PER_AGENT: usize = 1000;

/// Generates `count` scenarios of `agents` tasks. Scenario `q` depends only
/// on `(seed, agents, q)`, so changing `count` keeps the earlier scenarios.
///
/// Positions are cell centers on distinct cells, so starts (and goals) are at
/// least one cell apart, which exceeds twice the buffered radius.
pub fn generate_scenarios(
    map: &GridMap,
    map_name: &str,
    kind: ScenarioKind,
    count: usize,
    agents: usize,
    seed: u64,
) -> Result<Vec<Scenario>, GenError> {
    let pools = match kind {
        ScenarioKind::Gaps => {
            let (left, right) = gaps_rooms(map);
            if left.is_empty() || right.is_empty() {
                return Err(GenError::BadMap {
                    map: map_name.into(),
                    reason: "no left or right room".into(),
                });
            }
            Pools::Gaps { left, right }
        }
        ScenarioKind::Rooms => {
            let cells: Vec<Cell> = map.free_cells().collect();
            if cells.is_empty() {
                return Err(GenError::BadMap {
                    map: map_name.into(),
                    reason: "no free cells".into(),
                });
            }
            Pools::Rooms {
                component: components(map),
                cells,
            }
        }
    };
    (0..count)
        .map(|q| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((agents as u64) << 32) | q as u64);
            let tasks = pools
                .sample(map, agents, &mut rng)
                .ok_or_else(|| GenError::Sampling {
                    map: map_name.into(),
                    agents,
                    attempts: agents * ATTEMPTS_PER_AGENT,
                })?;
            Ok(Scenario {
                map_name: map_name.into(),
                width: map.width(),
                height: map.height(),
                tasks,
            })
        })
        .collect()
}

enum Pools {
    Gaps {
        left: Vec<Cell>,
        right: Vec<Cell>,
    },
    Rooms {
        cells: Vec<Cell>,
        component: Vec<u32>,
    },
}

impl Pools {
    fn sample(&self, map: &GridMap, agents: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Task>> {
        let mut used_s = vec![false; map.width() * map.height()];
        let mut used_g = used_s.clone();
        let idx = |c: Cell| c.j * map.width() + c.i;
        let mut tasks = Vec::with_capacity(agents);
        let mut budget = agents * ATTEMPTS_PER_AGENT;
        while tasks.len() < agents {
            if budget == 0 {
                return None;
            }
            budget -= 1;
            let (s, g) = match self {
                Pools::Gaps { left, right } => {
                    let forward = tasks.len() < agents / 2;
                    let (from, to) = if forward {
                        (left, right)
                    } else {
                        (right, left)
                    };
                    (*from.choose(rng)?, *to.choose(rng)?)
                }
                Pools::Rooms { cells, component } => {
                    let s = cells[rng.gen_range(0..cells.len())];
                    let g = cells[rng.gen_range(0..cells.len())];
                    if s == g || component[idx(s)] != component[idx(g)] {
                        continue;
                    }
                    (s, g)
                }
            };
            if used_s[idx(s)] || used_g[idx(g)] {
                continue;
            }
            used_s[idx(s)] = true;
            used_g[idx(g)] = true;
            tasks.push(Task { start: s, goal: g });
        }
        Some(tasks)
    }
}

/// Free cells left and right of the wall that starts at column `width / 2`.
fn gaps_rooms(map: &GridMap) -> (Vec<Cell>, Vec<Cell>) {
    let wall = map.width() / 2;
    let column_blocked = |i: usize| (0..map.height()).any(|j| map.is_blocked(Cell::new(i, j)));
    let mut end = wall;
    while end < map.width() && column_blocked(end) {
        end += 1;
    }
    let free = map.free_cells();
    free.filter(|c| c.i < wall || c.i >= end.max(wall + 1))
        .partition(|c| c.i < wall)
}

/// 4-connected component label per cell; blocked cells get `u32::MAX`.
fn components(map: &GridMap) -> Vec<u32> {
    let w = map.width();
    let mut label = vec![u32::MAX; w * map.height()];
    let mut next = 0;
    let mut stack = Vec::new();
    for c in map.free_cells() {
        if label[c.j * w + c.i] != u32::MAX {
            continue;
        }
        label[c.j * w + c.i] = next;
        stack.push(c);
        while let Some(c) = stack.pop() {
            for n in map.neighbors4(c) {
                if !map.is_blocked(n) && label[n.j * w + n.i] == u32::MAX {
                    label[n.j * w + n.i] = next;
                    stack.push(n);
                }
            }
        }
        next += 1;
    }
    label
}

/// A square map divided by one-cell walls into `rooms_per_side` squared
/// rooms. Every wall between two neighboring rooms has one door of
/// `door_width` cells at a random offset.
pub fn generate_rooms_map(
    size: usize,
    rooms_per_side: usize,
    door_width: usize,
    seed: u64,
) -> Result<GridMap, swarmnav_core::grid::GridError> {
    use swarmnav_core::grid::GridError;
    if rooms_per_side < 1 || size < rooms_per_side * (door_width + 3) {
        return Err(GridError::InvalidParameter("rooms do not fit the map"));
    }
    if door_width == 0 {
        return Err(GridError::InvalidParameter("door width must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let walls: Vec<usize> = (1..rooms_per_side)
        .map(|q| q * size / rooms_per_side)
        .collect();
    let mut blocked = vec![false; size * size];
    for &w in &walls {
        for k in 0..size {
            blocked[k * size + w] = true;
            blocked[w * size + k] = true;
        }
    }
    // Room spans along one axis: [lo, hi).
    let mut spans = Vec::with_capacity(rooms_per_side);
    let mut lo = 0;
    for &w in walls.iter().chain(std::iter::once(&size)) {
        spans.push((lo, w));
        lo = w + 1;
    }
    let mut door = |len_lo: usize, len_hi: usize| rng.gen_range(len_lo..=len_hi - door_width);
    for &w in &walls {
        for &(a, b) in &spans {
            // Door in the vertical wall at column w, rows [a, b).
            let d = door(a, b);
            for j in d..d + door_width {
                blocked[j * size + w] = false;
            }
            // Door in the horizontal wall at row w, columns [a, b).
            let d = door(a, b);
            for i in d..d + door_width {
                blocked[w * size + i] = false;
            }
        }
    }
    GridMap::new(size, size, blocked)
}
