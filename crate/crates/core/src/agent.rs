use crate::geom::{Point, Vec2};
use crate::theta_star::Path;

/// Control mode of an agent. Coordinated agents carry their group id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Path following with ORCA.
    Individual,
    /// Heading (with ORCA) to the start cell of the group plan.
    MovingToStart { group: u32 },
    /// Following the group plan by interpolation; ORCA is off.
    Executing { group: u32 },
}

impl Mode {
    pub fn group(self) -> Option<u32> {
        match self {
            Mode::Individual => None,
            Mode::MovingToStart { group } | Mode::Executing { group } => Some(group),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Mode::Individual => "individual",
            Mode::MovingToStart { .. } => "to_start",
            Mode::Executing { .. } => "executing",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub position: Point,
    pub velocity: Vec2,
    /// Physical radius; avoidance adds the configured safety buffer.
    pub radius: f64,
    pub max_speed: f64,
    pub visibility_range: f64,
    pub preferred_velocity: Vec2,
    pub mode: Mode,
    pub path: Path,
    /// Index into `path.waypoints` of the current local goal.
    pub cursor: usize,
    pub goal: Point,
    /// Step at which the agent first reached its goal, if it has.
    pub arrived_at: Option<u64>,
    /// The agent may not initiate a new group before this step.
    pub cooldown_until: u64,
}

impl AgentState {
    pub fn new(
        id: usize,
        position: Point,
        goal: Point,
        radius: f64,
        max_speed: f64,
        visibility_range: f64,
    ) -> Self {
        AgentState {
            id,
            position,
            velocity: Vec2::ZERO,
            radius,
            max_speed,
            visibility_range,
            preferred_velocity: Vec2::ZERO,
            mode: Mode::Individual,
            path: Path::new(alloc::vec![position, goal]),
            cursor: 1,
            goal,
            arrived_at: None,
            cooldown_until: 0,
        }
    }

    pub fn local_goal(&self) -> Point {
        self.path.waypoints[self.cursor.min(self.path.len() - 1)]
    }
}
