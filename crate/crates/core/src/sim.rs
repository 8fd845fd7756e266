//! The discrete-time world stepper and its audit.

use alloc::vec::Vec;
use core::fmt;

use crate::agent::{AgentState, Mode};
use crate::coordination::{CoordEvent, CoordParams, Coordinator, EventCounts};
use crate::geom::{closest_approach, Point, Vec2};
use crate::grid::GridMap;
use crate::orca::{self, OrcaParams};
use crate::theta_star::{self, plan_theta_star};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub agent_radius: f64,
    pub safe_buffer: f64,
    pub max_speed: f64,
    pub visibility_range: f64,
    pub trigger_k: usize,
    pub max_steps: u64,
    pub tau: f64,
    pub tau_obst: f64,
    pub max_neighbors: usize,
    pub coordination_enabled: bool,
    /// Only used by scenario generation; the simulation itself draws no
    /// random numbers.
    pub seed: u64,
    pub waypoint_epsilon: f64,
    pub goal_epsilon: f64,
    pub start_epsilon: f64,
    pub cooldown: u64,
    pub infeasible_cooldown: u64,
    pub start_timeout: u64,
    pub square_area: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.25,
            agent_radius: 0.3,
            safe_buffer: 0.19,
            max_speed: 1.0,
            visibility_range: 4.0,
            trigger_k: 3,
            max_steps: 12_800,
            tau: 3.0,
            tau_obst: 8.0,
            max_neighbors: 10,
            coordination_enabled: true,
            seed: 0,
            waypoint_epsilon: 0.25,
            goal_epsilon: 0.15,
            start_epsilon: 0.1,
            cooldown: 10,
            infeasible_cooldown: 50,
            start_timeout: 400,
            square_area: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigError {
    NonPositiveDt,
    Tunneling,
    ZeroMaxSteps,
    BadValue(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::NonPositiveDt => write!(f, "dt must be positive"),
            ConfigError::Tunneling => write!(f, "max_speed * dt must not exceed 2 * agent_radius"),
            ConfigError::ZeroMaxSteps => write!(f, "max_steps must be positive"),
            ConfigError::BadValue(k) => write!(f, "invalid value for {k}"),
        }
    }
}

impl core::error::Error for ConfigError {}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0) {
            return Err(ConfigError::NonPositiveDt);
        }
        if self.max_steps == 0 {
            return Err(ConfigError::ZeroMaxSteps);
        }
        let positive = [
            (self.agent_radius, "agent_radius"),
            (self.max_speed, "max_speed"),
            (self.visibility_range, "visibility_range"),
            (self.tau, "tau"),
            (self.tau_obst, "tau_obst"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::BadValue(name));
            }
        }
        let non_negative = [
            (self.safe_buffer, "safe_buffer"),
            (self.waypoint_epsilon, "waypoint_epsilon"),
            (self.goal_epsilon, "goal_epsilon"),
            (self.start_epsilon, "start_epsilon"),
        ];
        for (v, name) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::BadValue(name));
            }
        }
        if self.max_speed * self.dt > 2.0 * self.agent_radius {
            return Err(ConfigError::Tunneling);
        }
        Ok(())
    }

    pub fn orca_params(&self) -> OrcaParams {
        OrcaParams {
            tau: self.tau,
            tau_obst: self.tau_obst,
            dt: self.dt,
            safe_buffer: self.safe_buffer,
            max_neighbors: self.max_neighbors,
            perturb_preferred: true,
        }
    }

    pub fn coord_params(&self) -> CoordParams {
        CoordParams {
            k: self.trigger_k,
            max_speed: self.max_speed,
            dt: self.dt,
            start_epsilon: self.start_epsilon,
            cooldown: self.cooldown,
            infeasible_cooldown: self.infeasible_cooldown,
            square_area: self.square_area,
            start_timeout: self.start_timeout,
            safe_buffer: self.safe_buffer,
        }
    }

    /// Clearance used for individual paths: radius plus buffer, kept just
    /// below half a cell so one-cell passages stay traversable.
    pub fn path_clearance(&self) -> f64 {
        (self.agent_radius + self.safe_buffer).min(0.49)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    Timeout,
    Collision,
    NoPath,
}

impl FailureReason {
    pub fn tag(self) -> &'static str {
        match self {
            FailureReason::Timeout => "timeout",
            FailureReason::Collision => "collision",
            FailureReason::NoPath => "no_path",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure(FailureReason),
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure(r) => r.tag(),
        }
    }
}

/// A collision found by the audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Collision {
    Agents {
        step: u64,
        a: usize,
        b: usize,
        distance: f64,
    },
    Obstacle {
        step: u64,
        agent: usize,
        distance: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub steps_used: u64,
    /// Time of the last goal arrival (successful runs only, else 0).
    pub makespan: f64,
    /// Sum of goal-arrival times (successful runs only, else 0).
    pub flowtime: f64,
    /// Step at which each agent last entered its goal ball.
    pub arrivals: Vec<Option<u64>>,
    pub events: EventCounts,
    pub collision: Option<Collision>,
}

/// Receives the per-step trace and coordination events.
pub trait Observer {
    /// Called with the initial state (step 0) and after every step.
    fn on_step(&mut self, step: u64, agents: &[AgentState]);
    fn on_event(&mut self, _event: &CoordEvent) {}
}

/// Discards everything.
pub struct NoTrace;

impl Observer for NoTrace {
    fn on_step(&mut self, _step: u64, _agents: &[AgentState]) {}
}

#[derive(Clone, Debug)]
pub struct SimState<'m> {
    pub map: &'m GridMap,
    pub config: SimConfig,
    pub agents: Vec<AgentState>,
    pub step: u64,
    pub coordinator: Coordinator,
    pub outcome: Option<Outcome>,
    pub collision: Option<Collision>,
    /// ORCA evaluations performed for agents in the executing phase. Stays
    /// zero; exposed so tests can check it.
    pub orca_calls_while_executing: u64,
    orca: OrcaParams,
}

/// Plans the initial paths and puts every agent in individual mode. If some
/// agent has no path the returned state is already terminal with
/// `Failure(NoPath)`.
pub fn init_run<'m>(
    map: &'m GridMap,
    starts: &[Point],
    goals: &[Point],
    config: SimConfig,
) -> SimState<'m> {
    assert_eq!(starts.len(), goals.len(), "one goal per start");
    let clearance = config.path_clearance();
    let mut agents = Vec::with_capacity(starts.len());
    let mut outcome = None;
    for (id, (&s, &g)) in starts.iter().zip(goals).enumerate() {
        let mut a = AgentState::new(
            id,
            s,
            g,
            config.agent_radius,
            config.max_speed,
            config.visibility_range,
        );
        match plan_theta_star(map, s, g, clearance) {
            Ok(p) => a.path = p,
            Err(e) => {
                log::debug!("agent {id}: no initial path: {e}");
                outcome = Some(Outcome::Failure(FailureReason::NoPath));
            }
        }
        agents.push(a);
    }
    SimState {
        map,
        config,
        agents,
        step: 0,
        coordinator: Coordinator::new(config.coord_params()),
        outcome,
        collision: None,
        orca_calls_while_executing: 0,
        orca: config.orca_params(),
    }
}

impl SimState<'_> {
    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    fn at_goal(&self, a: &AgentState) -> bool {
        a.position.distance(a.goal) <= self.config.goal_epsilon
    }

    /// Advances the world by one step.
    pub fn step(&mut self) {
        if self.is_terminal() {
            return;
        }
        let snapshot = self.agents.clone();

        for i in 0..snapshot.len() {
            let target = match snapshot[i].mode {
                Mode::Executing { .. } => continue,
                Mode::Individual => None,
                Mode::MovingToStart { group } => self
                    .coordinator
                    .group(group)
                    .and_then(|g| g.start_center(i)),
            };
            let mut me = snapshot[i].clone();
            let target = match target {
                Some(t) => t,
                None => {
                    self.follow_path(&mut me);
                    me.local_goal()
                }
            };
            let to_target = target - me.position;
            let dist = to_target.length();
            me.preferred_velocity = if dist > 0.0 {
                to_target * (me.max_speed.min(dist / self.config.dt) / dist)
            } else {
                Vec2::ZERO
            };
            if matches!(me.mode, Mode::Executing { .. }) {
                self.orca_calls_while_executing += 1;
            }
            let neighbors = orca::visible_neighbors(&me, &snapshot, self.orca.max_neighbors);
            me.velocity = orca::step_velocity(&me, &snapshot, &neighbors, self.map, &self.orca);
            self.agents[i] = me;
        }

        if self.config.coordination_enabled {
            self.coordinator
                .commit(&mut self.agents, self.map, self.step);
        }

        for a in self.agents.iter_mut() {
            if !matches!(a.mode, Mode::Executing { .. }) {
                a.position += a.velocity * self.config.dt;
            }
        }
        self.coordinator.integrate(&mut self.agents);

        self.audit(&snapshot);
        self.step += 1;
        if self.outcome.is_none() && self.step >= self.config.max_steps {
            self.outcome = Some(Outcome::Failure(FailureReason::Timeout));
        }
    }

    /// Advances the cursor past reached waypoints and restores line of sight
    /// to the local goal by re-planning when it is lost.
    fn follow_path(&self, me: &mut AgentState) {
        let last = me.path.len() - 1;
        while me.cursor < last
            && me.position.distance(me.path.waypoints[me.cursor]) <= self.config.waypoint_epsilon
        {
            me.cursor += 1;
        }
        let room = 0.99 * self.map.distance_to_obstacles(me.position);
        let check = me.radius.min(room);
        if self.map.line_of_sight(me.position, me.local_goal(), check) {
            return;
        }
        let clearance = self.config.path_clearance().min(room);
        match theta_star::replan_segment(self.map, me.position, &me.path, me.cursor, clearance) {
            Ok((path, cursor)) => {
                me.path = path;
                me.cursor = cursor;
            }
            Err(e) => log::debug!("agent {}: re-planning failed: {e}", me.id),
        }
    }

    fn audit(&mut self, before: &[AgentState]) {
        let step = self.step + 1;
        let n = self.agents.len();
        'pairs: for a in 0..n {
            for b in a + 1..n {
                let (p, q) = (&self.agents[a], &self.agents[b]);
                let limit = p.radius + q.radius;
                let d = p.position.distance(q.position);
                let swept = closest_approach(
                    before[a].position,
                    p.position,
                    before[b].position,
                    q.position,
                );
                if d < limit || swept < limit {
                    self.collision = Some(Collision::Agents {
                        step,
                        a,
                        b,
                        distance: d.min(swept),
                    });
                    break 'pairs;
                }
            }
        }
        if self.collision.is_none() {
            for a in &self.agents {
                let d = self.map.distance_to_obstacles(a.position);
                if d <= a.radius {
                    self.collision = Some(Collision::Obstacle {
                        step,
                        agent: a.id,
                        distance: d,
                    });
                    break;
                }
            }
        }
        if self.collision.is_some() {
            self.outcome = Some(Outcome::Failure(FailureReason::Collision));
            return;
        }
        let mut all_home = true;
        for k in 0..n {
            let home = self.agents[k].mode == Mode::Individual && self.at_goal(&self.agents[k]);
            let a = &mut self.agents[k];
            if home {
                a.arrived_at.get_or_insert(step);
            } else {
                a.arrived_at = None;
                all_home = false;
            }
        }
        if all_home {
            self.outcome = Some(Outcome::Success);
        }
    }

    pub fn result(&self) -> RunResult {
        let outcome = self
            .outcome
            .unwrap_or(Outcome::Failure(FailureReason::Timeout));
        let arrivals: Vec<Option<u64>> = self.agents.iter().map(|a| a.arrived_at).collect();
        let (mut makespan, mut flowtime) = (0.0, 0.0);
        if outcome == Outcome::Success {
            for t in arrivals.iter().flatten() {
                let t = *t as f64 * self.config.dt;
                makespan = f64::max(makespan, t);
                flowtime += t;
            }
        }
        RunResult {
            outcome,
            steps_used: self.step,
            makespan,
            flowtime,
            arrivals,
            events: self.coordinator.counts,
            collision: self.collision,
        }
    }

    /// True when the next step cannot change anything: no groups, no pending
    /// cool-down and the last step left every agent bit-identical.
    fn is_fixed_point(&self, previous: &[AgentState]) -> bool {
        self.coordinator.is_idle()
            && self.agents.iter().all(|a| a.cooldown_until <= self.step)
            && self.agents.as_slice() == previous
    }
}

/// Steps until the run ends, reporting every state to `observer`.
///
/// A state that maps to itself is skipped straight to the step limit; the
/// observer still sees one record per step.
pub fn run_to_completion(state: &mut SimState<'_>, observer: &mut dyn Observer) -> RunResult {
    observer.on_step(state.step, &state.agents);
    while !state.is_terminal() {
        let previous = state.agents.clone();
        state.step();
        for e in state.coordinator.drain_events() {
            observer.on_event(&e);
        }
        observer.on_step(state.step, &state.agents);
        if !state.is_terminal() && state.is_fixed_point(&previous) {
            while state.step < state.config.max_steps {
                state.step += 1;
                observer.on_step(state.step, &state.agents);
            }
            state.outcome = Some(Outcome::Failure(FailureReason::Timeout));
        }
    }
    state.result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn config_invariants() {
        assert_eq!(SimConfig::default().validate(), Ok(()));
        let c = SimConfig {
            dt: 0.0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::NonPositiveDt));
        let c = SimConfig {
            max_speed: 3.0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::Tunneling));
        let c = SimConfig {
            max_steps: 0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::ZeroMaxSteps));
    }

    #[test]
    fn straight_line_takes_distance_over_speed_steps() {
        let map = GridMap::empty(16, 4).unwrap();
        let mut s = init_run(
            &map,
            &[Vec2::new(2.5, 2.0)],
            &[Vec2::new(12.5, 2.0)],
            SimConfig::default(),
        );
        assert_eq!(s.agents[0].path.len(), 2);
        let r = run_to_completion(&mut s, &mut NoTrace);
        assert_eq!(r.outcome, Outcome::Success);
        assert!((38..=42).contains(&r.steps_used), "{}", r.steps_used);
        assert_eq!(r.makespan, r.steps_used as f64 * 0.25);
    }

    #[test]
    fn walled_off_goal_is_no_path() {
        let map = GridMap::from_rows(&["..@..", "..@..", "..@.."]).unwrap();
        let mut s = init_run(
            &map,
            &[Vec2::new(0.5, 1.5)],
            &[Vec2::new(4.5, 1.5)],
            SimConfig::default(),
        );
        assert!(s.is_terminal());
        let r = run_to_completion(&mut s, &mut NoTrace);
        assert_eq!(r.outcome, Outcome::Failure(FailureReason::NoPath));
        assert_eq!(r.steps_used, 0);
    }

    #[test]
    fn overlapping_agents_collide() {
        let map = GridMap::empty(8, 8).unwrap();
        let starts = [Vec2::new(3.0, 3.0), Vec2::new(3.5, 3.0)];
        let mut s = init_run(&map, &starts, &starts, SimConfig::default());
        s.step();
        assert_eq!(s.outcome, Some(Outcome::Failure(FailureReason::Collision)));
    }

    #[test]
    fn half_step_from_goal_arrives_and_stays() {
        let map = GridMap::empty(8, 8).unwrap();
        let goal = Vec2::new(4.0, 4.0);
        let start = goal - Vec2::new(0.125, 0.0);
        let far = [Vec2::new(1.0, 7.0), Vec2::new(7.0, 7.0)];
        let mut s = init_run(
            &map,
            &[start, far[0]],
            &[goal, far[1]],
            SimConfig::default(),
        );
        s.step();
        assert_eq!(s.agents[0].arrived_at, Some(1));
        for _ in 0..40 {
            s.step();
            assert!(s.agents[0].position.distance(goal) <= 0.15);
        }
    }

    #[test]
    fn stationary_state_fast_forwards_with_full_trace() {
        struct Count(u64, u64);
        impl Observer for Count {
            fn on_step(&mut self, step: u64, _: &[AgentState]) {
                self.0 += 1;
                self.1 = step;
            }
        }
        // A goal that is never reached because the goal epsilon is negative in
        // effect: the goal lies inside a wall, so the agent stops short.
        let map = GridMap::from_rows(&["....@", "....@", "....@"]).unwrap();
        let config = SimConfig {
            max_steps: 500,
            ..SimConfig::default()
        };
        let mut s = init_run(&map, &[Vec2::new(1.5, 1.5)], &[Vec2::new(3.5, 1.5)], config);
        s.agents[0].goal = Vec2::new(4.5, 1.5);
        s.agents[0].path = theta_star::Path::new(vec![Vec2::new(1.5, 1.5), Vec2::new(4.5, 1.5)]);
        let mut obs = Count(0, 0);
        let r = run_to_completion(&mut s, &mut obs);
        assert_eq!(r.outcome, Outcome::Failure(FailureReason::Timeout));
        assert_eq!(r.steps_used, 500);
        assert_eq!((obs.0, obs.1), (501, 500));
    }
}
