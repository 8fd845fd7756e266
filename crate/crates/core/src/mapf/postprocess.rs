//! Turning a sequential move list into a synchronous plan.

use alloc::vec;
use alloc::vec::Vec;

use super::push_rotate::Move;
use super::{MapfAction, MapfInstance, MapfPlan};

/// Drops excursions: an agent that leaves a vertex and later returns to it
/// while no other agent touches that vertex in between might as well have
/// stayed. Repeats until nothing changes.
pub(crate) fn smooth(mut moves: Vec<Move>) -> Vec<Move> {
    loop {
        let mut removed = false;
        let mut p = 0;
        while p < moves.len() {
            let Move {
                agent, from: home, ..
            } = moves[p];
            let mut back = None;
            for (r, m) in moves.iter().enumerate().skip(p + 1) {
                if m.agent == agent {
                    if m.to == home {
                        back = Some(r);
                    }
                } else if m.from == home || m.to == home {
                    break;
                }
            }
            if let Some(q) = back {
                let mut k = 0;
                moves.retain(|m| {
                    let drop = (p..=q).contains(&k) && m.agent == agent;
                    k += 1;
                    !drop
                });
                removed = true;
            } else {
                p += 1;
            }
        }
        if !removed {
            return moves;
        }
    }
}

/// Schedules every move at the earliest step allowed by the agent's own
/// previous move and by the previous occupant leaving the target vertex.
/// Following into a vertex vacated in the same step is allowed.
pub(crate) fn parallelize(inst: &MapfInstance, moves: &[Move]) -> MapfPlan {
    let n = inst.num_agents();
    let nv = inst.graph.len();
    let mut agent_time = vec![0usize; n];
    let mut left_at = vec![0usize; nv];
    let mut left_to = vec![usize::MAX; nv];
    let mut times = Vec::with_capacity(moves.len());
    for m in moves {
        let mut t = (agent_time[m.agent] + 1).max(left_at[m.to]);
        if left_at[m.to] == t && left_to[m.to] == m.from {
            t += 1;
        }
        times.push(t);
        agent_time[m.agent] = t;
        left_at[m.from] = t;
        left_to[m.from] = m.to;
    }
    build(inst, moves, &times)
}

/// One move per step, in the given order.
pub(crate) fn sequential_plan(inst: &MapfInstance, moves: &[Move]) -> MapfPlan {
    let times: Vec<usize> = (1..=moves.len()).collect();
    build(inst, moves, &times)
}

fn build(inst: &MapfInstance, moves: &[Move], times: &[usize]) -> MapfPlan {
    let len = times.iter().copied().max().unwrap_or(0);
    let mut actions = vec![vec![MapfAction::Wait; len]; inst.num_agents()];
    for (m, &t) in moves.iter().zip(times) {
        actions[m.agent][t - 1] = MapfAction::Move(inst.graph.cell(m.to));
    }
    MapfPlan {
        actions,
        action_duration: 1.0,
    }
}
