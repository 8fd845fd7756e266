//! Theta* against an independent 8-connected grid search.

mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{grid_shortest_path, random_free_cell, random_map};
use swarmnav_core::grid::generate_gaps_map;
use swarmnav_core::theta_star::{plan_theta_star, PlanError};
use swarmnav_core::{GridMap, Vec2};

const CLEARANCE: f64 = 0.49;

/// Draws solvable instances on `map` and checks each against the oracle.
fn check_map(label: &str, map: &GridMap, seed: u64, instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut tries = 0;
    while done < instances {
        tries += 1;
        assert!(
            tries < 100 * instances,
            "{label}: too few solvable instances"
        );
        let (s, g) = (
            random_free_cell(&mut rng, map),
            random_free_cell(&mut rng, map),
        );
        let Some(oracle) = grid_shortest_path(map, s, g, CLEARANCE) else {
            continue;
        };
        let path = plan_theta_star(map, s.center(), g.center(), CLEARANCE)
            .unwrap_or_else(|e| panic!("{label}: {s:?} -> {g:?}: {e}"));
        assert_eq!(path.waypoints[0], s.center());
        assert_eq!(*path.waypoints.last().unwrap(), g.center());
        assert!(
            path.is_valid(map, CLEARANCE),
            "{label}: {s:?} -> {g:?}: {:?}",
            path.waypoints
        );
        let len = path.length();
        assert!(
            len <= oracle + 1e-9,
            "{label}: {s:?} -> {g:?}: theta* {len} > grid {oracle}"
        );
        assert!(len >= s.center().distance(g.center()) - 1e-9);
        done += 1;
    }
}

#[test]
fn never_longer_than_grid_search_on_open_maps() {
    check_map("open", &GridMap::empty(32, 32).unwrap(), 1, 100);
}

#[test]
fn never_longer_than_grid_search_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..10 {
        let map = random_map(&mut rng, 32, 32, 0.2);
        check_map(&format!("random-{k}"), &map, 100 + k, 10);
    }
}

#[test]
fn never_longer_than_grid_search_on_gaps_maps() {
    for passages in 1..=4 {
        check_map(
            &format!("gaps-{passages}"),
            &generate_gaps_map(64, passages).unwrap(),
            passages as u64,
            100,
        );
    }
}

#[test]
fn blocked_cell_on_the_row_gives_three_waypoints() {
    let map = GridMap::from_rows(&[
        "..........",
        "..........",
        ".....@....",
        "..........",
        "..........",
    ])
    .unwrap();
    let (s, g) = (Vec2::new(1.5, 2.5), Vec2::new(8.5, 2.5));
    let path = plan_theta_star(&map, s, g, 0.3).unwrap();
    assert_eq!(path.len(), 3);
    let oracle =
        grid_shortest_path(&map, map.cell_of(s).unwrap(), map.cell_of(g).unwrap(), 0.3).unwrap();
    assert!(path.length() < oracle);
}

#[test]
fn unreachable_goal_is_reported() {
    let map = generate_gaps_map(16, 1).unwrap();
    // The single gap is one cell wide; a 0.49 clearance still fits through it
    // but 0.5 does not.
    assert!(plan_theta_star(&map, Vec2::new(2.5, 2.5), Vec2::new(13.5, 2.5), 0.49).is_ok());
    assert_eq!(
        plan_theta_star(&map, Vec2::new(2.5, 2.5), Vec2::new(13.5, 2.5), 0.5),
        Err(PlanError::NoPath)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuous_endpoints_give_valid_deterministic_paths(
        seed in any::<u64>(),
        sx in 0.0f64..1.0, sy in 0.0f64..1.0, gx in 0.0f64..1.0, gy in 0.0f64..1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = random_map(&mut rng, 24, 24, 0.15);
        let s = random_free_cell(&mut rng, &map);
        let g = random_free_cell(&mut rng, &map);
        let start = Vec2::new(s.i as f64 + sx, s.j as f64 + sy);
        let goal = Vec2::new(g.i as f64 + gx, g.j as f64 + gy);
        let clearance = 0.3;
        match plan_theta_star(&map, start, goal, clearance) {
            Ok(path) => {
                prop_assert!(path.is_valid(&map, clearance));
                prop_assert_eq!(path.waypoints[0], start);
                prop_assert_eq!(*path.waypoints.last().unwrap(), goal);
                prop_assert!(path.length() >= start.distance(goal) - 1e-9);
                prop_assert_eq!(plan_theta_star(&map, start, goal, clearance), Ok(path));
            }
            Err(PlanError::EndpointBlocked) => {
                prop_assert!(
                    map.distance_to_obstacles(start) <= clearance || map.distance_to_obstacles(goal) <= clearance
                );
            }
            Err(PlanError::NoPath) => {}
        }
    }
}
