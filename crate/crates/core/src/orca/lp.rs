//! Randomization-free incremental 2D linear programming over half-planes
//! inside a speed disc, with a minimax-violation fallback. Same structure
//! as the solver shipped with RVO2.

use alloc::vec::Vec;

use crate::geom::Vec2;

const EPSILON: f64 = 1e-9;

/// Boundary line with the permitted side on the left of `direction`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Line {
    pub point: Vec2,
    pub direction: Vec2,
}

/// Optimizes along line `line_no` subject to lines `0..line_no` and the disc.
fn linear_program1(
    lines: &[Line],
    line_no: usize,
    radius: f64,
    opt_velocity: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> bool {
    let line = lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.length_squared();
    if discriminant < 0.0 {
        // The disc misses the line entirely.
        return false;
    }
    let sqrt_disc = libm::sqrt(discriminant);
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for other in &lines[..line_no] {
        let denominator = line.direction.det(other.direction);
        let numerator = other.direction.det(line.point - other.point);
        if denominator.abs() <= EPSILON {
            // Parallel lines.
            if numerator < 0.0 {
                return false;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if direction_opt {
        if opt_velocity.dot(line.direction) > 0.0 {
            line.point + line.direction * t_right
        } else {
            line.point + line.direction * t_left
        }
    } else {
        let t = line.direction.dot(opt_velocity - line.point);
        line.point + line.direction * t.clamp(t_left, t_right)
    };
    true
}

/// Returns the number of lines processed before failure (`lines.len()` on
/// success). `result` holds the optimum of the feasible prefix.
pub(crate) fn linear_program2(
    lines: &[Line],
    radius: f64,
    opt_velocity: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> usize {
    *result = if direction_opt {
        // `opt_velocity` is a unit direction here.
        opt_velocity * radius
    } else if opt_velocity.length_squared() > radius * radius {
        opt_velocity.normalize_or_zero() * radius
    } else {
        opt_velocity
    };

    for i in 0..lines.len() {
        if lines[i].direction.det(lines[i].point - *result) > 0.0 {
            let previous = *result;
            if !linear_program1(lines, i, radius, opt_velocity, direction_opt, result) {
                *result = previous;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimizes the maximum violation of lines `num_hard..` while keeping lines
/// `..num_hard` satisfied, starting from the failure index `begin_line`.
pub(crate) fn linear_program3(
    lines: &[Line],
    num_hard: usize,
    begin_line: usize,
    radius: f64,
    result: &mut Vec2,
) {
    let mut distance = 0.0;
    let mut projected: Vec<Line> = Vec::with_capacity(lines.len());
    for i in begin_line..lines.len() {
        if lines[i].direction.det(lines[i].point - *result) <= distance {
            continue;
        }
        projected.clear();
        projected.extend_from_slice(&lines[..num_hard]);
        for j in num_hard..i {
            let determinant = lines[i].direction.det(lines[j].direction);
            let point = if determinant.abs() <= EPSILON {
                if lines[i].direction.dot(lines[j].direction) > 0.0 {
                    // Same direction: line j is implied.
                    continue;
                }
                (lines[i].point + lines[j].point) * 0.5
            } else {
                let t = lines[j].direction.det(lines[i].point - lines[j].point) / determinant;
                lines[i].point + lines[i].direction * t
            };
            let direction = (lines[j].direction - lines[i].direction).normalize_or_zero();
            projected.push(Line { point, direction });
        }
        let previous = *result;
        let toward = Vec2::new(-lines[i].direction.y, lines[i].direction.x);
        if linear_program2(&projected, radius, toward, true, result) < projected.len() {
            // Only floating-point error can make this fail; keep the
            // previous result.
            *result = previous;
        }
        distance = lines[i].direction.det(lines[i].point - *result);
    }
}
