//! Multi-agent path finding on 4-connected grid subgraphs.
//!
//! [`solve_push_and_rotate`] produces synchronous move/wait plans and
//! [`validate_plan`] checks them.

mod postprocess;
mod push_rotate;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{Cell, GridMap};

pub use push_rotate::Method;

/// Undirected graph whose vertices are grid cells, indexed in row-major
/// order (by `j`, then `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    cells: Vec<Cell>,
    adj: Vec<Vec<usize>>,
    index: BTreeMap<Cell, usize>,
}

impl Graph {
    /// Free cells of `map` inside the inclusive box `lo..=hi`.
    pub fn from_area(map: &GridMap, lo: Cell, hi: Cell) -> Graph {
        let mut cells = Vec::new();
        for j in lo.j..=hi.j.min(map.height() - 1) {
            for i in lo.i..=hi.i.min(map.width() - 1) {
                let c = Cell::new(i, j);
                if !map.is_blocked(c) {
                    cells.push(c);
                }
            }
        }
        Graph::from_cells(&cells)
    }

    /// Graph on the given cells with edges between 4-adjacent pairs.
    pub fn from_cells(cells: &[Cell]) -> Graph {
        let mut cells = cells.to_vec();
        cells.sort_by_key(|c| (c.j, c.i));
        cells.dedup();
        let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let adj = cells
            .iter()
            .map(|c| {
                let mut n: Vec<usize> = [
                    (c.i.wrapping_add(1), c.j),
                    (c.i, c.j.wrapping_add(1)),
                    (c.i.wrapping_sub(1), c.j),
                    (c.i, c.j.wrapping_sub(1)),
                ]
                .iter()
                .filter_map(|&(i, j)| index.get(&Cell::new(i, j)).copied())
                .collect();
                n.sort_unstable();
                n
            })
            .collect();
        Graph { cells, adj, index }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, v: usize) -> Cell {
        self.cells[v]
    }

    pub fn vertex(&self, c: Cell) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// Neighbors in ascending vertex order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Connected component label per vertex, labels in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = alloc::vec![usize::MAX; self.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &n in &self.adj[v] {
                    if label[n] == usize::MAX {
                        label[n] = next;
                        stack.push(n);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapfInstance {
    pub graph: Graph,
    /// Start vertex per agent.
    pub starts: Vec<usize>,
    /// Goal vertex per agent.
    pub goals: Vec<usize>,
    /// Global id of each agent.
    pub agent_ids: Vec<usize>,
}

impl MapfInstance {
    pub fn new(
        graph: Graph,
        starts: Vec<usize>,
        goals: Vec<usize>,
        agent_ids: Vec<usize>,
    ) -> Result<Self, MapfError> {
        let inst = MapfInstance {
            graph,
            starts,
            goals,
            agent_ids,
        };
        inst.check()?;
        Ok(inst)
    }

    /// Builds an instance from start and goal cells.
    pub fn from_cells(
        graph: Graph,
        starts: &[Cell],
        goals: &[Cell],
        agent_ids: Vec<usize>,
    ) -> Result<Self, MapfError> {
        let lookup = |c: &Cell| {
            graph
                .vertex(*c)
                .ok_or(MapfError::InvalidInstance("cell is not a vertex"))
        };
        let s = starts.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
        let g = goals.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
        MapfInstance::new(graph, s, g, agent_ids)
    }

    pub fn num_agents(&self) -> usize {
        self.starts.len()
    }

    fn check(&self) -> Result<(), MapfError> {
        let n = self.starts.len();
        if self.goals.len() != n || self.agent_ids.len() != n {
            return Err(MapfError::InvalidInstance(
                "starts, goals and ids differ in length",
            ));
        }
        let v = self.graph.len();
        if self.starts.iter().chain(&self.goals).any(|&x| x >= v) {
            return Err(MapfError::InvalidInstance("vertex out of range"));
        }
        if !all_distinct(&self.starts, v) {
            return Err(MapfError::InvalidInstance("starts are not distinct"));
        }
        if !all_distinct(&self.goals, v) {
            return Err(MapfError::InvalidInstance("goals are not distinct"));
        }
        Ok(())
    }
}

fn all_distinct(xs: &[usize], n: usize) -> bool {
    let mut seen = alloc::vec![false; n];
    xs.iter().all(|&x| !core::mem::replace(&mut seen[x], true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapfAction {
    Move(Cell),
    Wait,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapfPlan {
    /// One sequence per agent, all of the same length.
    pub actions: Vec<Vec<MapfAction>>,
    /// Duration of every action in time units.
    pub action_duration: f64,
}

impl MapfPlan {
    /// Number of synchronous steps.
    pub fn len(&self) -> usize {
        self.actions.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell of every agent after each step; entry 0 is the start.
    pub fn positions(&self, start_cells: &[Cell]) -> Vec<Vec<Cell>> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut cur = start_cells.to_vec();
        out.push(cur.clone());
        for t in 0..self.len() {
            for (a, seq) in self.actions.iter().enumerate() {
                if let MapfAction::Move(c) = seq[t] {
                    cur[a] = c;
                }
            }
            out.push(cur.clone());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapfError {
    InvalidInstance(&'static str),
    Infeasible,
}

impl fmt::Display for MapfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapfError::InvalidInstance(why) => write!(f, "invalid MAPF instance: {why}"),
            MapfError::Infeasible => f.write_str("MAPF instance is infeasible"),
        }
    }
}

impl core::error::Error for MapfError {}

/// First problem found by [`validate_plan`]. Indices are synchronous step
/// numbers (1-based: the action taking the agents from time `t - 1` to `t`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConflictReport {
    AgentCountMismatch,
    LengthMismatch { agent: usize },
    NotAnEdge { step: usize, agent: usize },
    VertexConflict { step: usize, agents: (usize, usize) },
    EdgeConflict { step: usize, agents: (usize, usize) },
    GoalNotReached { agent: usize },
}

/// Checks that the plan moves along edges, never puts two agents on one
/// vertex, never swaps two agents across an edge and ends on the goals.
pub fn validate_plan(instance: &MapfInstance, plan: &MapfPlan) -> Result<(), ConflictReport> {
    let n = instance.num_agents();
    if plan.actions.len() != n {
        return Err(ConflictReport::AgentCountMismatch);
    }
    let len = plan.len();
    if let Some(agent) = plan.actions.iter().position(|s| s.len() != len) {
        return Err(ConflictReport::LengthMismatch { agent });
    }
    let g = &instance.graph;
    let mut cur = instance.starts.clone();
    let mut owner = alloc::vec![usize::MAX; g.len()];
    for t in 0..len {
        let prev = cur.clone();
        for a in 0..n {
            if let MapfAction::Move(c) = plan.actions[a][t] {
                match g.vertex(c) {
                    Some(v) if g.are_adjacent(prev[a], v) => cur[a] = v,
                    _ => {
                        return Err(ConflictReport::NotAnEdge {
                            step: t + 1,
                            agent: a,
                        })
                    }
                }
            }
        }
        for (a, &v) in cur.iter().enumerate() {
            if owner[v] != usize::MAX {
                return Err(ConflictReport::VertexConflict {
                    step: t + 1,
                    agents: (owner[v], a),
                });
            }
            owner[v] = a;
        }
        for &v in &cur {
            owner[v] = usize::MAX;
        }
        // Edge swaps: a moved u -> v while b moved v -> u.
        for (a, &v) in prev.iter().enumerate() {
            owner[v] = a;
        }
        for a in 0..n {
            let b = owner[cur[a]];
            if b != usize::MAX && b != a && cur[b] == prev[a] {
                let agents = (a.min(b), a.max(b));
                return Err(ConflictReport::EdgeConflict {
                    step: t + 1,
                    agents,
                });
            }
        }
        for &v in &prev {
            owner[v] = usize::MAX;
        }
    }
    if let Some(agent) = (0..n).find(|&a| cur[a] != instance.goals[a]) {
        return Err(ConflictReport::GoalNotReached { agent });
    }
    Ok(())
}

/// Sets the uniform action duration so that a one-cell move never exceeds
/// `max_speed`.
pub fn assign_action_duration(mut plan: MapfPlan, max_speed: f64, cell_size: f64) -> MapfPlan {
    plan.action_duration = cell_size / max_speed;
    plan
}

/// Solves the instance, or reports it infeasible.
pub fn solve_push_and_rotate(instance: &MapfInstance) -> Result<MapfPlan, MapfError> {
    solve_detailed(instance).map(|(plan, _)| plan)
}

/// Like [`solve_push_and_rotate`] but also reports which method solved each
/// connected component that holds agents, in component order.
pub fn solve_detailed(instance: &MapfInstance) -> Result<(MapfPlan, Vec<Method>), MapfError> {
    instance.check()?;
    let (moves, methods) = push_rotate::solve_sequential(instance)?;
    log::trace!("{} sequential moves", moves.len());
    let moves = postprocess::smooth(moves);
    let plan = postprocess::parallelize(instance, &moves);
    let plan = match validate_plan(instance, &plan) {
        Ok(()) => plan,
        Err(report) => {
            log::warn!("parallel plan rejected ({report:?}); falling back to one move per step");
            postprocess::sequential_plan(instance, &moves)
        }
    };
    debug_assert_eq!(validate_plan(instance, &plan), Ok(()));
    Ok((plan, methods))
}
