//! Small hand-made instances used by the tests and the `gen-map door` command.

use swarmnav_core::{Cell, GridMap};

use crate::formats::{Scenario, Task};

pub const DOOR_MAP_NAME: &str = "door.map";

/// Two 8×9 rooms joined by a single one-cell door in the middle of the
/// dividing wall at column 8.
pub fn door_map() -> GridMap {
    let rows: Vec<String> = (0..9)
        .map(|j| {
            (0..16)
                .map(|i| if i == 8 && j != 4 { '@' } else { '.' })
                .collect()
        })
        .collect();
    let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
    GridMap::from_rows(&rows).expect("static fixture")
}

/// Two agents on each side of the door, each heading to the opposite room.
/// Without coordination they jam in the doorway.
pub fn door_scenario() -> Scenario {
    let task = |s: (usize, usize), g: (usize, usize)| Task {
        start: Cell::new(s.0, s.1),
        goal: Cell::new(g.0, g.1),
    };
    Scenario {
        map_name: DOOR_MAP_NAME.into(),
        width: 16,
        height: 9,
        tasks: vec![
            task((5, 3), (12, 5)),
            task((5, 5), (12, 3)),
            task((11, 3), (3, 5)),
            task((11, 5), (3, 3)),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn door_is_the_only_opening() {
        let m = door_map();
        assert_eq!(m.blocked_count(), 8);
        assert!(!m.is_blocked(Cell::new(8, 4)));
        door_scenario().check_against(&m).unwrap();
    }
}
