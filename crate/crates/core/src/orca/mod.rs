//! Optimal reciprocal collision avoidance.
//!
//! Each neighbor and each nearby obstacle edge contributes one half-plane of
//! permitted velocities; the new velocity is the point of their intersection
//! (clipped to the speed disc) closest to the preferred velocity.

mod lp;

use alloc::vec::Vec;

use crate::agent::{AgentState, Mode};
use crate::geom::{closest_point_on_segment, Vec2};
use crate::grid::GridMap;
use lp::Line;

/// Velocity-space constraint: `v` is permitted iff `(v - point) . normal >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    /// Unit normal pointing into the permitted side.
    pub normal: Vec2,
}

impl HalfPlane {
    pub fn contains(&self, v: Vec2, tolerance: f64) -> bool {
        self.violation(v) <= tolerance
    }

    /// Signed distance of `v` outside the permitted side (negative inside).
    pub fn violation(&self, v: Vec2) -> f64 {
        -(v - self.point).dot(self.normal)
    }

    fn line(&self) -> Line {
        Line {
            point: self.point,
            direction: Vec2::new(self.normal.y, -self.normal.x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrcaParams {
    /// Time horizon against other agents.
    pub tau: f64,
    /// Time horizon against obstacles.
    pub tau_obst: f64,
    /// Simulation step; used to resolve existing overlaps.
    pub dt: f64,
    /// Added to every physical radius.
    pub safe_buffer: f64,
    pub max_neighbors: usize,
    /// Rotate the preferred velocity by a tiny fixed angle so exactly
    /// symmetric encounters do not stall.
    pub perturb_preferred: bool,
}

impl Default for OrcaParams {
    fn default() -> Self {
        OrcaParams {
            tau: 3.0,
            tau_obst: 8.0,
            dt: 0.25,
            safe_buffer: 0.19,
            max_neighbors: 10,
            perturb_preferred: true,
        }
    }
}

const PERTURB_ANGLE: f64 = 1e-3;

/// Indices into `all` of the agents within `me.visibility_range` (closed
/// ball), nearest first with ties by id, at most `max_neighbors` of them.
pub fn visible_neighbors(me: &AgentState, all: &[AgentState], max_neighbors: usize) -> Vec<usize> {
    let r_sq = me.visibility_range * me.visibility_range;
    let mut found: Vec<(f64, usize, usize)> = all
        .iter()
        .enumerate()
        .filter(|(_, a)| a.id != me.id)
        .map(|(k, a)| (a.position.distance_squared(me.position), a.id, k))
        .filter(|&(d, _, _)| d <= r_sq)
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    found.truncate(max_neighbors);
    found.into_iter().map(|(_, _, k)| k).collect()
}

/// Half-plane against one neighbor. Executing neighbors do not react, so the
/// agent takes the whole avoidance effort instead of half.
pub fn compute_agent_halfplane(
    me: &AgentState,
    other: &AgentState,
    params: &OrcaParams,
) -> HalfPlane {
    let responsibility = if matches!(other.mode, Mode::Executing { .. }) {
        1.0
    } else {
        0.5
    };
    agent_halfplane(me, other, params, responsibility)
}

fn agent_halfplane(
    me: &AgentState,
    other: &AgentState,
    params: &OrcaParams,
    responsibility: f64,
) -> HalfPlane {
    let rel_pos = other.position - me.position;
    let rel_vel = me.velocity - other.velocity;
    let dist_sq = rel_pos.length_squared();
    let combined = me.radius + other.radius + 2.0 * params.safe_buffer;
    let combined_sq = combined * combined;
    let tau = params.tau;

    if dist_sq <= combined_sq {
        // Already within the combined radius: push apart along the center
        // offset fast enough to separate within one step.
        let normal = if dist_sq > 0.0 {
            -rel_pos / libm::sqrt(dist_sq)
        } else {
            log::warn!(
                "agents {} and {} coincide; separating along x",
                me.id,
                other.id
            );
            if me.id < other.id {
                Vec2::new(-1.0, 0.0)
            } else {
                Vec2::new(1.0, 0.0)
            }
        };
        let dist = libm::sqrt(dist_sq);
        let needed = (combined - dist) / params.dt - rel_vel.dot(normal);
        return HalfPlane {
            point: me.velocity + normal * (responsibility * needed),
            normal,
        };
    }

    let w = rel_vel - rel_pos / tau;
    let w_len_sq = w.length_squared();
    let dot1 = w.dot(rel_pos);
    let (direction, u) = if dot1 < 0.0 && dot1 * dot1 > combined_sq * w_len_sq {
        // Closest to the cut-off circle.
        let w_len = libm::sqrt(w_len_sq);
        let unit_w = w / w_len;
        (
            Vec2::new(unit_w.y, -unit_w.x),
            unit_w * (combined / tau - w_len),
        )
    } else {
        // Closest to one of the cone legs.
        let leg = libm::sqrt(dist_sq - combined_sq);
        let direction = if rel_pos.det(w) > 0.0 {
            Vec2::new(
                rel_pos.x * leg - rel_pos.y * combined,
                rel_pos.x * combined + rel_pos.y * leg,
            ) / dist_sq
        } else {
            -Vec2::new(
                rel_pos.x * leg + rel_pos.y * combined,
                -rel_pos.x * combined + rel_pos.y * leg,
            ) / dist_sq
        };
        (direction, direction * rel_vel.dot(direction) - rel_vel)
    };
    HalfPlane {
        point: me.velocity + u * responsibility,
        normal: Vec2::new(-direction.y, direction.x),
    }
}

/// One half-plane per obstacle boundary segment within visibility range.
///
/// With `q` the closest point of the segment and `n` the unit vector from
/// `q` to the agent, the agent may approach along `-n` no faster than it
/// takes to reach the inflated radius in `tau_obst`. Inside the inflated
/// radius it may not approach at all.
pub fn compute_obstacle_halfplanes(
    me: &AgentState,
    map: &GridMap,
    params: &OrcaParams,
) -> Vec<HalfPlane> {
    let mut out = Vec::new();
    let r = me.radius + params.safe_buffer;
    let p = me.position;
    map.for_each_segment_near(p, me.visibility_range, |s| {
        let q = closest_point_on_segment(p, s.a, s.b);
        let offset = p - q;
        let d = offset.length();
        if d == 0.0 {
            return;
        }
        let normal = offset / d;
        let point = if d > r {
            -normal * ((d - r) / params.tau_obst)
        } else {
            Vec2::ZERO
        };
        out.push(HalfPlane { point, normal });
    });
    out
}

/// Velocity closest to `preferred` inside every half-plane and the disc of
/// radius `max_speed`. If no such velocity exists, returns the velocity in
/// the disc that minimizes the largest violation.
pub fn solve_velocity_lp(constraints: &[HalfPlane], preferred: Vec2, max_speed: f64) -> Vec2 {
    solve_with_hard(constraints, 0, preferred, max_speed)
}

/// Like [`solve_velocity_lp`], but the first `num_hard` constraints are kept
/// satisfied by the fallback whenever they are jointly feasible.
pub fn solve_with_hard(
    constraints: &[HalfPlane],
    num_hard: usize,
    preferred: Vec2,
    max_speed: f64,
) -> Vec2 {
    let lines: Vec<Line> = constraints.iter().map(HalfPlane::line).collect();
    let mut result = Vec2::ZERO;
    let failed = lp::linear_program2(&lines, max_speed, preferred, false, &mut result);
    if failed < lines.len() {
        lp::linear_program3(&lines, num_hard, failed, max_speed, &mut result);
    }
    result.clamp_length(max_speed)
}

/// New velocity for `me` given the indices of its visible neighbors in `all`.
/// `me.preferred_velocity` must already point at the local goal.
pub fn step_velocity(
    me: &AgentState,
    all: &[AgentState],
    neighbors: &[usize],
    map: &GridMap,
    params: &OrcaParams,
) -> Vec2 {
    let mut constraints = compute_obstacle_halfplanes(me, map, params);
    let num_hard = constraints.len();
    constraints.extend(
        neighbors
            .iter()
            .map(|&k| compute_agent_halfplane(me, &all[k], params)),
    );
    let preferred = if params.perturb_preferred {
        me.preferred_velocity
            .rotate(libm::cos(PERTURB_ANGLE), libm::sin(PERTURB_ANGLE))
    } else {
        me.preferred_velocity
    };
    solve_with_hard(&constraints, num_hard, preferred, me.max_speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn agent(id: usize, x: f64, y: f64) -> AgentState {
        AgentState::new(id, Vec2::new(x, y), Vec2::new(x, y), 0.3, 1.0, 5.0)
    }

    #[test]
    fn neighbors_closed_ball_sorted_truncated() {
        let me = agent(0, 0.0, 0.0);
        assert!(visible_neighbors(&me, &[me.clone()], 10).is_empty());
        let all: Vec<_> = [1.0, 6.0, 3.0, 5.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(k, &d)| agent(k + 1, d, 0.0))
            .collect();
        let got = visible_neighbors(&me, &all, 3);
        assert_eq!(got, vec![0, 4, 2]);
        // Distance exactly R is visible.
        let got = visible_neighbors(&me, &all, 10);
        assert_eq!(got.len(), 5);
        assert_eq!(all[*got.last().unwrap()].position.x, 5.0);
    }

    #[test]
    fn far_stationary_neighbor_does_not_constrain() {
        let mut me = agent(0, 0.0, 0.0);
        me.velocity = Vec2::new(1.0, 0.0);
        let other = agent(1, 0.0, 4.0);
        let hp = compute_agent_halfplane(&me, &other, &OrcaParams::default());
        assert!(hp.contains(me.velocity, 1e-12));
    }

    #[test]
    fn head_on_pair_is_mirror_symmetric() {
        let params = OrcaParams::default();
        let mut a = agent(0, -2.0, 0.0);
        let mut b = agent(1, 2.0, 0.0);
        a.velocity = Vec2::new(1.0, 0.0);
        b.velocity = Vec2::new(-1.0, 0.0);
        let ha = compute_agent_halfplane(&a, &b, &params);
        let hb = compute_agent_halfplane(&b, &a, &params);
        // Swapping the agents is the point reflection through the midpoint;
        // both pick the leg on their own right, so b's constraint is a's
        // reflected through the origin of velocity space.
        assert!((ha.point + hb.point).length() < 1e-12);
        assert!((ha.normal + hb.normal).length() < 1e-12);
        assert!((ha.normal.length() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overlap_normal_follows_center_offset() {
        let params = OrcaParams::default();
        let a = agent(0, 0.0, 0.0);
        let b = agent(1, 0.6, 0.3);
        let hp = compute_agent_halfplane(&a, &b, &params);
        let offset = (a.position - b.position).normalize_or_zero();
        assert!(hp.normal.det(offset).abs() < 1e-12);
        assert!(hp.normal.dot(offset) > 0.0);

        let c = agent(2, 0.0, 0.0);
        let h0 = compute_agent_halfplane(&a, &c, &params);
        let h1 = compute_agent_halfplane(&c, &a, &params);
        assert_eq!(h0.normal, Vec2::new(-1.0, 0.0));
        assert_eq!(h1.normal, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn lp_without_constraints_clamps() {
        assert_eq!(
            solve_velocity_lp(&[], Vec2::new(0.3, 0.4), 1.0),
            Vec2::new(0.3, 0.4)
        );
        let v = solve_velocity_lp(&[], Vec2::new(3.0, 4.0), 1.0);
        assert!((v - Vec2::new(0.6, 0.8)).length() < 1e-12);
    }

    #[test]
    fn lp_projects_onto_single_boundary() {
        // Permitted: x + y >= 0.5 (normal (1,1)/sqrt2 through (0.25, 0.25)).
        let n = Vec2::new(1.0, 1.0).normalize_or_zero();
        let hp = HalfPlane {
            point: Vec2::new(0.25, 0.25),
            normal: n,
        };
        let pref = Vec2::new(0.1, -0.2);
        let v = solve_velocity_lp(&[hp], pref, 1.0);
        let expected = pref + n * (-(pref - hp.point).dot(n));
        assert!((v - expected).length() < 1e-12);
    }

    #[test]
    fn lp_fallback_matches_sampled_minimax() {
        // v.x >= 1.0 and v.y >= 1.2 cannot both hold in the unit disc.
        let constraints = [
            HalfPlane {
                point: Vec2::new(1.0, 0.0),
                normal: Vec2::new(1.0, 0.0),
            },
            HalfPlane {
                point: Vec2::new(0.0, 1.2),
                normal: Vec2::new(0.0, 1.0),
            },
        ];
        let v = solve_velocity_lp(&constraints, Vec2::new(0.0, 0.0), 1.0);
        let worst = |v: Vec2| {
            constraints
                .iter()
                .map(|h| h.violation(v))
                .fold(f64::MIN, f64::max)
        };
        let mut best = (f64::INFINITY, Vec2::ZERO);
        for a in 0..=100 {
            for b in 0..=100 {
                let s = Vec2::new(a as f64 / 50.0 - 1.0, b as f64 / 50.0 - 1.0);
                if s.length_squared() <= 1.0 + 1e-9 && worst(s) < best.0 {
                    best = (worst(s), s);
                }
            }
        }
        assert!((v - best.1).length() < 1e-2, "{v:?} vs {:?}", best.1);
        assert!(worst(v) <= best.0 + 1e-9);
    }

    #[test]
    fn wall_blocks_approach() {
        // Wall occupying column 5; agent at x = 4.2 wants to go east.
        let map = GridMap::from_rows(&[
            "..........",
            ".....@....",
            ".....@....",
            ".....@....",
            "..........",
        ])
        .unwrap();
        let params = OrcaParams {
            perturb_preferred: false,
            ..OrcaParams::default()
        };
        let mut me = agent(0, 4.2, 2.5);
        me.preferred_velocity = Vec2::new(1.0, 0.0);
        let v = step_velocity(&me, &[], &[], &map, &params);
        let gap = 5.0 - 4.2 - (0.3 + params.safe_buffer);
        assert!(v.x <= gap / params.tau_obst + 1e-9);

        // Far from any obstacle and moving parallel to it.
        let open = GridMap::empty(20, 20).unwrap();
        let mut me = agent(0, 10.0, 10.0);
        me.velocity = Vec2::new(0.0, 1.0);
        for hp in compute_obstacle_halfplanes(&me, &open, &params) {
            assert!(hp.contains(me.velocity, 0.0));
        }
        me.visibility_range = 3.0;
        assert!(compute_obstacle_halfplanes(&me, &open, &params).is_empty());
    }

    #[test]
    fn lone_agent_keeps_preferred() {
        let map = GridMap::empty(20, 20).unwrap();
        let params = OrcaParams {
            perturb_preferred: false,
            ..OrcaParams::default()
        };
        let mut me = agent(0, 10.0, 10.0);
        me.visibility_range = 3.0;
        me.preferred_velocity = Vec2::new(0.6, -0.8);
        assert_eq!(
            step_velocity(&me, &[], &[], &map, &params),
            me.preferred_velocity
        );
    }
}
