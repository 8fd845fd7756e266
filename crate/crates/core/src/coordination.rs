//! Deadlock detection and the life cycle of coordinated groups.
//!
//! A group is formed when an agent sees its local goal and at least `k`
//! other agents. Its members get a MAPF instance on a square patch of the
//! grid around them, walk (with ORCA) to their start cells, then follow the
//! joint plan by interpolation and finally return to individual path
//! following. Intruders and neighboring groups are absorbed by re-planning.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::agent::{AgentState, Mode};
use crate::geom::Point;
use crate::grid::{Cell, GridMap};
use crate::mapf::{self, Graph, MapfError, MapfInstance, MapfPlan};

/// Inclusive cell box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanningArea {
    pub min_corner: Cell,
    pub max_corner: Cell,
}

impl PlanningArea {
    /// Whether `p` lies in the continuous square covered by the cells.
    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.min_corner.i as f64
            && p.x <= (self.max_corner.i + 1) as f64
            && p.y >= self.min_corner.j as f64
            && p.y <= (self.max_corner.j + 1) as f64
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        (self.min_corner.i..=self.max_corner.i).contains(&c.i)
            && (self.min_corner.j..=self.max_corner.j).contains(&c.j)
    }

    pub fn overlaps(&self, other: &PlanningArea) -> bool {
        self.min_corner.i <= other.max_corner.i
            && other.min_corner.i <= self.max_corner.i
            && self.min_corner.j <= other.max_corner.j
            && other.min_corner.j <= self.max_corner.j
    }

    /// Clamps a continuous point into the area and returns its cell.
    pub fn clamp_to_cell(&self, p: Point) -> Cell {
        let clamp = |v: f64, lo: usize, hi: usize| {
            let f = libm::floor(v);
            if f <= lo as f64 {
                lo
            } else if f >= hi as f64 {
                hi
            } else {
                f as usize
            }
        };
        Cell::new(
            clamp(p.x, self.min_corner.i, self.max_corner.i),
            clamp(p.y, self.min_corner.j, self.max_corner.j),
        )
    }

    /// The continuous square covered by the cells.
    pub fn rect(&self) -> crate::geom::Rect {
        crate::geom::Rect::new(
            Point::new(self.min_corner.i as f64, self.min_corner.j as f64),
            Point::new(
                (self.max_corner.i + 1) as f64,
                (self.max_corner.j + 1) as f64,
            ),
        )
    }

    pub fn side_lengths(&self) -> (usize, usize) {
        (
            self.max_corner.i - self.min_corner.i + 1,
            self.max_corner.j - self.min_corner.j + 1,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordParams {
    pub k: usize,
    pub max_speed: f64,
    pub dt: f64,
    /// Arrival tolerance at MAPF start cells.
    pub start_epsilon: f64,
    /// Steps before members of a normally dissolved group may initiate again.
    pub cooldown: u64,
    /// Same, after an infeasible or aborted group.
    pub infeasible_cooldown: u64,
    /// Expand the bounding box to a square before inflation.
    pub square_area: bool,
    /// Steps allowed for reaching the start cells before the group gives up.
    pub start_timeout: u64,
    /// Added to agent radii when deciding whether an agent intrudes.
    pub safe_buffer: f64,
}

impl Default for CoordParams {
    fn default() -> Self {
        CoordParams {
            k: 3,
            max_speed: 1.0,
            dt: 0.25,
            start_epsilon: 0.1,
            cooldown: 10,
            infeasible_cooldown: 50,
            square_area: true,
            start_timeout: 400,
            safe_buffer: 0.19,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    MovingToStarts,
    Executing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatedGroup {
    pub id: u32,
    /// Agent indices, ascending.
    pub members: Vec<usize>,
    pub area: PlanningArea,
    /// Visibility range of the initiator; inflates the area.
    pub range: f64,
    /// Cells of the local goals that triggered this group (one per merged
    /// group). Members whose local goal lies in one of them aim for the next
    /// waypoint instead.
    pub trigger_cells: Vec<Cell>,
    pub instance: MapfInstance,
    pub plan: MapfPlan,
    pub starts: Vec<Cell>,
    pub goals: Vec<Cell>,
    /// Per member: the MAPF goal came from the waypoint after the local goal.
    pub skip_waypoint: Vec<bool>,
    pub phase: Phase,
    /// Step at which the current phase began.
    pub phase_since: u64,
    /// Simulation steps spent executing; `None` until execution starts.
    pub exec_steps: Option<u64>,
    timeline: Vec<Vec<Cell>>,
}

impl CoordinatedGroup {
    /// Total execution time of the plan.
    pub fn duration(&self) -> f64 {
        self.plan.len() as f64 * self.plan.action_duration
    }

    pub fn start_center(&self, agent: usize) -> Option<Point> {
        self.member_index(agent).map(|k| self.starts[k].center())
    }

    pub fn member_index(&self, agent: usize) -> Option<usize> {
        self.members.binary_search(&agent).ok()
    }

    /// Position of member `k` at `time` into the plan.
    pub fn position_at(&self, k: usize, time: f64) -> Point {
        let d = self.plan.action_duration;
        let len = self.plan.len();
        if time <= 0.0 || len == 0 {
            return self.timeline[0][k].center();
        }
        if time >= len as f64 * d {
            return self.timeline[len][k].center();
        }
        let idx = ((time / d) as usize).min(len - 1);
        let frac = (time - idx as f64 * d) / d;
        let a = self.timeline[idx][k].center();
        let b = self.timeline[idx + 1][k].center();
        a + (b - a) * frac
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Formation,
    Merge,
    Intruder,
    ExecutionStart,
    Dissolve,
    Infeasible,
    Abort,
}

impl EventKind {
    pub fn tag(self) -> &'static str {
        match self {
            EventKind::Formation => "formation",
            EventKind::Merge => "merge",
            EventKind::Intruder => "intruder",
            EventKind::ExecutionStart => "execution_start",
            EventKind::Dissolve => "dissolve",
            EventKind::Infeasible => "infeasible",
            EventKind::Abort => "abort",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordEvent {
    pub step: u64,
    pub kind: EventKind,
    pub group: u32,
    pub members: Vec<usize>,
    pub area: Option<PlanningArea>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordError {
    /// No free cell left for a start or goal inside the area.
    NoFreeCell,
    Infeasible,
}

/// Fires when the local goal and at least `k` other agents are within the
/// agent's visibility range.
pub fn detect_trigger(me: &AgentState, visible_count: usize, k: usize) -> bool {
    me.position.distance(me.local_goal()) <= me.visibility_range && visible_count >= k
}

/// Indices of agents within `all[i]`'s visibility range (closed ball).
pub fn neighborhood(i: usize, all: &[AgentState]) -> Vec<usize> {
    let me = &all[i];
    (0..all.len())
        .filter(|&j| j != i && me.position.distance(all[j].position) <= me.visibility_range)
        .collect()
}

/// The initiator, its neighbors and their neighbors, ascending.
pub fn form_group(initiator: usize, all: &[AgentState]) -> Vec<usize> {
    let mut set = BTreeSet::from([initiator]);
    for a in neighborhood(initiator, all) {
        set.insert(a);
        set.extend(neighborhood(a, all));
    }
    set.into_iter().collect()
}

/// Bounding box of `positions` made square about its center (if `square`),
/// inflated by `range` on every side, converted to cells and clipped.
pub fn compute_planning_area(
    positions: &[Point],
    range: f64,
    map: &GridMap,
    square: bool,
) -> PlanningArea {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in positions {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if square {
        let (w, h) = (x1 - x0, y1 - y0);
        if w > h {
            let c = (y0 + y1) * 0.5;
            y0 = c - w * 0.5;
            y1 = c + w * 0.5;
        } else {
            let c = (x0 + x1) * 0.5;
            x0 = c - h * 0.5;
            x1 = c + h * 0.5;
        }
    }
    let lo = |v: f64, n: usize| libm::floor(v - range).clamp(0.0, (n - 1) as f64) as usize;
    let hi = |v: f64, n: usize| (libm::ceil(v + range) - 1.0).clamp(0.0, (n - 1) as f64) as usize;
    PlanningArea {
        min_corner: Cell::new(lo(x0, map.width()), lo(y0, map.height())),
        max_corner: Cell::new(hi(x1, map.width()), hi(y1, map.height())),
    }
}

fn claim(
    cell: Cell,
    area: &PlanningArea,
    map: &GridMap,
    taken: &mut Vec<Cell>,
) -> Result<Cell, CoordError> {
    let c = if map.is_blocked(cell) || taken.contains(&cell) {
        map.nearest_free_cell_within(cell, (area.min_corner, area.max_corner), |c| {
            taken.contains(&c)
        })
        .map_err(|_| CoordError::NoFreeCell)?
    } else {
        cell
    };
    taken.push(c);
    Ok(c)
}

/// MAPF start cell per position, in order: the containing cell, or the
/// nearest free cell not already taken.
pub fn project_starts(
    positions: &[Point],
    area: &PlanningArea,
    map: &GridMap,
) -> Result<Vec<Cell>, CoordError> {
    let mut taken = Vec::with_capacity(positions.len());
    positions
        .iter()
        .map(|&p| claim(area.clamp_to_cell(p), area, map, &mut taken))
        .collect()
}

/// MAPF goal cell per agent (ascending ids), plus whether it was taken from
/// the waypoint after the local goal.
pub fn project_goals(
    members: &[&AgentState],
    area: &PlanningArea,
    map: &GridMap,
    trigger_cells: &[Cell],
) -> Result<(Vec<Cell>, Vec<bool>), CoordError> {
    let mut taken = Vec::with_capacity(members.len());
    let mut goals = Vec::with_capacity(members.len());
    let mut skip = Vec::with_capacity(members.len());
    for a in members {
        let mut wp = a.local_goal();
        let mut s = false;
        let at_trigger = map.cell_of(wp).is_some_and(|c| trigger_cells.contains(&c));
        if at_trigger && a.cursor + 1 < a.path.len() {
            wp = a.path.waypoints[a.cursor + 1];
            s = true;
        }
        goals.push(claim(area.clamp_to_cell(wp), area, map, &mut taken)?);
        skip.push(s);
    }
    Ok((goals, skip))
}

/// Solves the group's MAPF problem on `area`.
pub fn plan_area(
    map: &GridMap,
    area: &PlanningArea,
    starts: &[Cell],
    goals: &[Cell],
    ids: Vec<usize>,
    max_speed: f64,
) -> Result<(MapfInstance, MapfPlan), CoordError> {
    let graph = Graph::from_area(map, area.min_corner, area.max_corner);
    let inst =
        MapfInstance::from_cells(graph, starts, goals, ids).map_err(|_| CoordError::NoFreeCell)?;
    match mapf::solve_push_and_rotate(&inst) {
        Ok(plan) => {
            let plan = mapf::assign_action_duration(plan, max_speed, 1.0);
            Ok((inst, plan))
        }
        Err(MapfError::Infeasible) => Err(CoordError::Infeasible),
        Err(MapfError::InvalidInstance(_)) => Err(CoordError::NoFreeCell),
    }
}

/// Counts of coordination events of each kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub formations: u64,
    pub merges: u64,
    pub intruders: u64,
    pub executions: u64,
    pub dissolutions: u64,
    pub infeasible: u64,
    pub aborts: u64,
}

impl EventCounts {
    fn record(&mut self, kind: EventKind) {
        let slot = match kind {
            EventKind::Formation => &mut self.formations,
            EventKind::Merge => &mut self.merges,
            EventKind::Intruder => &mut self.intruders,
            EventKind::ExecutionStart => &mut self.executions,
            EventKind::Dissolve => &mut self.dissolutions,
            EventKind::Infeasible => &mut self.infeasible,
            EventKind::Abort => &mut self.aborts,
        };
        *slot += 1;
    }
}

/// Owns all active groups. Mutations happen in [`Coordinator::commit`] and
/// [`Coordinator::integrate`], once per simulation step.
#[derive(Clone, Debug, PartialEq)]
pub struct Coordinator {
    pub params: CoordParams,
    pub groups: Vec<CoordinatedGroup>,
    pub counts: EventCounts,
    next_id: u32,
    /// Events since the last [`Coordinator::drain_events`].
    events: Vec<CoordEvent>,
}

enum Reason {
    Formation,
    Merge,
    Intruder,
}

impl Coordinator {
    pub fn new(params: CoordParams) -> Self {
        Coordinator {
            params,
            groups: Vec::new(),
            counts: EventCounts::default(),
            next_id: 0,
            events: Vec::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn drain_events(&mut self) -> Vec<CoordEvent> {
        core::mem::take(&mut self.events)
    }

    pub fn group(&self, id: u32) -> Option<&CoordinatedGroup> {
        self.groups.iter().find(|g| g.id == id)
    }

    fn emit(
        &mut self,
        step: u64,
        kind: EventKind,
        group: u32,
        members: &[usize],
        area: Option<PlanningArea>,
    ) {
        self.counts.record(kind);
        log::debug!("step {step}: group {group} {} {:?}", kind.tag(), members);
        self.events.push(CoordEvent {
            step,
            kind,
            group,
            members: members.to_vec(),
            area,
        });
    }

    /// Phase 3 of a simulation step: phase transitions, merges, intruders
    /// and at most one new formation.
    pub fn commit(&mut self, agents: &mut [AgentState], map: &GridMap, step: u64) {
        self.advance(agents, step);
        self.merge_groups(agents, map, step);
        self.absorb_intruders(agents, map, step);
        // Re-planning for intruders can grow an area over a neighbor's.
        self.merge_groups(agents, map, step);
        self.trigger(agents, map, step);
    }

    fn advance(&mut self, agents: &mut [AgentState], step: u64) {
        let mut k = 0;
        while k < self.groups.len() {
            let g = &mut self.groups[k];
            match g.phase {
                Phase::MovingToStarts => {
                    let ready = g.members.iter().zip(&g.starts).all(|(&a, s)| {
                        agents[a].position.distance(s.center()) <= self.params.start_epsilon
                    });
                    if ready {
                        g.phase = Phase::Executing;
                        g.phase_since = step;
                        g.exec_steps = None;
                        for &a in &g.members {
                            agents[a].mode = Mode::Executing { group: g.id };
                        }
                        let (id, members, area) = (g.id, g.members.clone(), g.area);
                        self.emit(step, EventKind::ExecutionStart, id, &members, Some(area));
                    } else if step.saturating_sub(g.phase_since) > self.params.start_timeout {
                        self.dissolve(k, agents, step, EventKind::Abort);
                        continue;
                    }
                }
                Phase::Executing => {
                    let done = g
                        .exec_steps
                        .is_some_and(|n| n as f64 * self.params.dt >= g.duration() - 1e-9);
                    if done {
                        self.dissolve(k, agents, step, EventKind::Dissolve);
                        continue;
                    }
                }
            }
            k += 1;
        }
    }

    /// Removes group `k` and hands its members back to individual mode.
    fn dissolve(&mut self, k: usize, agents: &mut [AgentState], step: u64, kind: EventKind) {
        let g = self.groups.remove(k);
        let completed = kind == EventKind::Dissolve;
        let cooldown = if completed {
            self.params.cooldown
        } else {
            self.params.infeasible_cooldown
        };
        for (m, &a) in g.members.iter().enumerate() {
            let agent = &mut agents[a];
            agent.mode = Mode::Individual;
            agent.velocity = crate::geom::Vec2::ZERO;
            agent.cooldown_until = step + cooldown;
            if completed && g.skip_waypoint[m] && agent.cursor + 1 < agent.path.len() {
                agent.cursor += 1;
            }
        }
        self.emit(step, kind, g.id, &g.members, Some(g.area));
    }

    /// Two groups must merge when their areas overlap, or when both are
    /// executing and a member of one sees a member of the other.
    fn must_merge(&self, x: usize, y: usize, agents: &[AgentState]) -> bool {
        let (a, b) = (&self.groups[x], &self.groups[y]);
        if a.area.overlaps(&b.area) {
            return true;
        }
        a.phase == Phase::Executing
            && b.phase == Phase::Executing
            && a.members.iter().any(|&i| {
                b.members.iter().any(|&j| {
                    agents[i].position.distance(agents[j].position) <= agents[j].visibility_range
                })
            })
    }

    fn merge_groups(&mut self, agents: &mut [AgentState], map: &GridMap, step: u64) {
        'outer: loop {
            for x in 0..self.groups.len() {
                for y in x + 1..self.groups.len() {
                    if self.must_merge(x, y, agents) || self.must_merge(y, x, agents) {
                        let (keep, gone) = if self.groups[x].id < self.groups[y].id {
                            (x, y)
                        } else {
                            (y, x)
                        };
                        let other = self.groups.remove(gone);
                        let keep = if gone < keep { keep - 1 } else { keep };
                        let mut members = self.groups[keep].members.clone();
                        members.extend(&other.members);
                        let mut triggers = self.groups[keep].trigger_cells.clone();
                        triggers.extend(&other.trigger_cells);
                        let g = self.groups.remove(keep);
                        self.rebuild(
                            g.id,
                            members,
                            triggers,
                            g.range,
                            agents,
                            map,
                            step,
                            Reason::Merge,
                        );
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }

    fn absorb_intruders(&mut self, agents: &mut [AgentState], map: &GridMap, step: u64) {
        let mut k = 0;
        while k < self.groups.len() {
            let g = &self.groups[k];
            let rect = g.area.rect();
            let intruders: Vec<usize> = (0..agents.len())
                .filter(|&i| {
                    agents[i].mode == Mode::Individual
                        && rect.distance_to_point(agents[i].position)
                            < agents[i].radius + self.params.safe_buffer
                        && g.members.iter().any(|&m| {
                            agents[m].position.distance(agents[i].position)
                                <= agents[m].visibility_range
                        })
                })
                .collect();
            if intruders.is_empty() {
                k += 1;
                continue;
            }
            let g = self.groups.remove(k);
            let mut members = g.members.clone();
            members.extend(&intruders);
            if self.rebuild(
                g.id,
                members,
                g.trigger_cells.clone(),
                g.range,
                agents,
                map,
                step,
                Reason::Intruder,
            ) {
                // Rebuilt groups are appended; revisit the same index.
                continue;
            }
        }
    }

    fn trigger(&mut self, agents: &mut [AgentState], map: &GridMap, step: u64) {
        let initiator = (0..agents.len()).find(|&i| {
            let a = &agents[i];
            a.mode == Mode::Individual
                && step >= a.cooldown_until
                && a.arrived_at.is_none()
                && detect_trigger(a, neighborhood(i, agents).len(), self.params.k)
        });
        let Some(init) = initiator else {
            return;
        };
        let members = form_group(init, agents);
        let range = agents[init].visibility_range;
        let positions: Vec<Point> = members.iter().map(|&m| agents[m].position).collect();
        let area = compute_planning_area(&positions, range, map, self.params.square_area);
        let trigger_cell = map.cell_of(agents[init].local_goal());

        let mut all: BTreeSet<usize> = members.iter().copied().collect();
        let mut triggers: Vec<Cell> = trigger_cell.into_iter().collect();
        let mut id = None;
        let mut k = 0;
        while k < self.groups.len() {
            let g = &self.groups[k];
            if g.area.overlaps(&area) || g.members.iter().any(|m| all.contains(m)) {
                let g = self.groups.remove(k);
                all.extend(&g.members);
                triggers.extend(&g.trigger_cells);
                id = Some(id.map_or(g.id, |i: u32| i.min(g.id)));
            } else {
                k += 1;
            }
        }
        let (id, reason) = match id {
            Some(i) => (i, Reason::Merge),
            None => {
                self.next_id += 1;
                (self.next_id - 1, Reason::Formation)
            }
        };
        self.rebuild(
            id,
            all.into_iter().collect(),
            triggers,
            range,
            agents,
            map,
            step,
            reason,
        );
    }

    /// Builds (or rebuilds) group `id` from the members' current state. On
    /// success the group is appended in phase MovingToStarts; otherwise all
    /// members return to individual mode with the long cool-down.
    #[allow(clippy::too_many_arguments)]
    fn rebuild(
        &mut self,
        id: u32,
        mut members: Vec<usize>,
        trigger_cells: Vec<Cell>,
        range: f64,
        agents: &mut [AgentState],
        map: &GridMap,
        step: u64,
        reason: Reason,
    ) -> bool {
        members.sort_unstable();
        members.dedup();
        let positions: Vec<Point> = members.iter().map(|&m| agents[m].position).collect();
        let mut result = Err(CoordError::Infeasible);
        for inflate in [range, 2.0 * range] {
            let area = compute_planning_area(&positions, inflate, map, self.params.square_area);
            result = self
                .try_plan(&members, &positions, &trigger_cells, &area, agents, map)
                .map(|r| (area, r));
            if result.is_ok() {
                break;
            }
        }
        match result {
            Ok((area, (starts, goals, skip, instance, plan))) => {
                let timeline = plan.positions(&starts);
                for &m in &members {
                    // Executing agents got no avoidance velocity this step.
                    if matches!(agents[m].mode, Mode::Executing { .. }) {
                        agents[m].velocity = crate::geom::Vec2::ZERO;
                    }
                    agents[m].mode = Mode::MovingToStart { group: id };
                }
                let kind = match reason {
                    Reason::Formation => EventKind::Formation,
                    Reason::Merge => EventKind::Merge,
                    Reason::Intruder => EventKind::Intruder,
                };
                self.emit(step, kind, id, &members, Some(area));
                self.groups.push(CoordinatedGroup {
                    id,
                    members,
                    area,
                    range,
                    trigger_cells,
                    instance,
                    plan,
                    starts,
                    goals,
                    skip_waypoint: skip,
                    phase: Phase::MovingToStarts,
                    phase_since: step,
                    exec_steps: None,
                    timeline,
                });
                true
            }
            Err(e) => {
                log::debug!("step {step}: group {id} could not be planned: {e:?}");
                for &m in &members {
                    let a = &mut agents[m];
                    if a.mode != Mode::Individual {
                        a.velocity = crate::geom::Vec2::ZERO;
                    }
                    a.mode = Mode::Individual;
                    a.cooldown_until = step + self.params.infeasible_cooldown;
                }
                self.emit(step, EventKind::Infeasible, id, &members, None);
                false
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn try_plan(
        &self,
        members: &[usize],
        positions: &[Point],
        trigger_cells: &[Cell],
        area: &PlanningArea,
        agents: &[AgentState],
        map: &GridMap,
    ) -> Result<(Vec<Cell>, Vec<Cell>, Vec<bool>, MapfInstance, MapfPlan), CoordError> {
        let starts = project_starts(positions, area, map)?;
        let refs: Vec<&AgentState> = members.iter().map(|&m| &agents[m]).collect();
        let (goals, skip) = project_goals(&refs, area, map, trigger_cells)?;
        let (instance, plan) = plan_area(
            map,
            area,
            &starts,
            &goals,
            members.to_vec(),
            self.params.max_speed,
        )?;
        Ok((starts, goals, skip, instance, plan))
    }

    /// Phase 4 for executing members: advance the plan clock by one step and
    /// place every member on its interpolated position. The first executing
    /// step puts members exactly on their start centers.
    pub fn integrate(&mut self, agents: &mut [AgentState]) {
        let dt = self.params.dt;
        for g in self
            .groups
            .iter_mut()
            .filter(|g| g.phase == Phase::Executing)
        {
            let n = g.exec_steps.map_or(0, |n| n + 1);
            g.exec_steps = Some(n);
            let t = n as f64 * dt;
            for (k, &a) in g.members.iter().enumerate() {
                let p = g.position_at(k, t);
                agents[a].velocity = (p - agents[a].position) / dt;
                agents[a].position = p;
            }
        }
    }
}
