//! Properties of the grid queries, checked against brute-force geometry.

mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::random_map;
use swarmnav_core::geom::Rect;
use swarmnav_core::{Cell, GridMap, Vec2};

fn map_strategy() -> impl Strategy<Value = GridMap> {
    (any::<u64>(), 4usize..20, 4usize..20, 0.0f64..0.4)
        .prop_map(|(seed, w, h, d)| random_map(&mut ChaCha8Rng::seed_from_u64(seed), w, h, d))
}

fn point_in(map: &GridMap) -> impl Strategy<Value = Vec2> {
    let (w, h) = (map.width() as f64, map.height() as f64);
    (0.0..w, 0.0..h).prop_map(|(x, y)| Vec2::new(x, y))
}

fn map_and_points(n: usize) -> impl Strategy<Value = (GridMap, Vec<Vec2>)> {
    map_strategy().prop_flat_map(move |m| {
        let pts = proptest::collection::vec(point_in(&m), n);
        (Just(m), pts)
    })
}

/// Distance to the nearest blocked square or the border, by enumeration.
fn brute_distance(map: &GridMap, p: Vec2) -> f64 {
    let border =
        p.x.min(p.y)
            .min(map.width() as f64 - p.x)
            .min(map.height() as f64 - p.y)
            .max(0.0);
    let mut best = border;
    for j in 0..map.height() {
        for i in 0..map.width() {
            let c = Cell::new(i, j);
            if map.is_blocked(c) {
                best = best.min(c.rect().distance_to_point(p));
            }
        }
    }
    best
}

fn inside_blocked(map: &GridMap, p: Vec2) -> bool {
    (0..map.height()).any(|j| {
        (0..map.width()).any(|i| {
            let c = Cell::new(i, j);
            let r: Rect = c.rect();
            map.is_blocked(c)
                && p.x >= r.min.x
                && p.x <= r.max.x
                && p.y >= r.min.y
                && p.y <= r.max.y
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn line_of_sight_is_symmetric((map, pts) in map_and_points(2), c in 0.0f64..0.6) {
        prop_assert_eq!(map.line_of_sight(pts[0], pts[1], c), map.line_of_sight(pts[1], pts[0], c));
    }

    #[test]
    fn line_of_sight_is_monotone_in_clearance((map, pts) in map_and_points(2), c in 0.0f64..0.6, f in 0.0f64..1.0) {
        if map.line_of_sight(pts[0], pts[1], c) {
            prop_assert!(map.line_of_sight(pts[0], pts[1], c * f));
        }
    }

    #[test]
    fn visible_segments_keep_clearance((map, pts) in map_and_points(2), c in 0.0f64..0.6) {
        if map.line_of_sight(pts[0], pts[1], c) {
            for k in 0..=64 {
                let p = pts[0] + (pts[1] - pts[0]) * (k as f64 / 64.0);
                prop_assert!(brute_distance(&map, p) > c - 1e-9, "{p:?}");
            }
        }
    }

    #[test]
    fn distance_matches_enumeration((map, pts) in map_and_points(4)) {
        for p in pts {
            let d = map.distance_to_obstacles(p);
            prop_assert!((d - brute_distance(&map, p)).abs() < 1e-9, "{p:?}: {d}");
            prop_assert_eq!(d > 0.0, !inside_blocked(&map, p) && brute_distance(&map, p) > 0.0);
        }
    }

    #[test]
    fn movingai_round_trip(map in map_strategy()) {
        let text = map.to_movingai_string();
        let back = GridMap::from_movingai_str(&text).unwrap();
        prop_assert_eq!(&back, &map);
        prop_assert_eq!(back.to_movingai_string(), text);
    }

    #[test]
    fn nearest_free_cell_is_closest(map in map_strategy(), fi in 0usize..20, fj in 0usize..20, forbid in 0usize..6) {
        let from = Cell::new(fi % map.width(), fj % map.height());
        // Forbid a few free cells near the origin as well.
        let forbidden: Vec<Cell> = map.free_cells().take(forbid).collect();
        let eligible = |c: Cell| !map.is_blocked(c) && !forbidden.contains(&c);
        let manhattan = |c: Cell| c.i.abs_diff(from.i) + c.j.abs_diff(from.j);
        let best = map.free_cells().filter(|&c| eligible(c)).map(manhattan).min();
        match map.nearest_free_cell(from, |c| forbidden.contains(&c)) {
            Ok(c) => {
                prop_assert!(eligible(c));
                prop_assert_eq!(Some(manhattan(c)), best);
            }
            Err(_) => prop_assert_eq!(best, None),
        }
    }
}
