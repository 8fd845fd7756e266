//! MovingAI `.map` and `.scen` files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use swarmnav_core::{Cell, GridMap, Point};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Map {
        path: PathBuf,
        source: swarmnav_core::grid::GridError,
    },
    #[error("{path}: line {line}: {reason}")]
    Scen {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub fn read_map(path: &Path) -> Result<GridMap, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    GridMap::from_movingai_str(&text).map_err(|source| FormatError::Map {
        path: path.to_owned(),
        source,
    })
}

pub fn write_map(path: &Path, map: &GridMap) -> Result<(), FormatError> {
    fs::write(path, map.to_movingai_string()).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Task {
    pub start: Cell,
    pub goal: Cell,
}

/// An ordered list of start/goal cells. Agents use the cell centers; a run
/// with `n` agents takes the first `n` tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub map_name: String,
    pub width: usize,
    pub height: usize,
    pub tasks: Vec<Task>,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Start and goal positions of the first `n` tasks.
    pub fn prefix(&self, n: usize) -> (Vec<Point>, Vec<Point>) {
        self.tasks[..n.min(self.tasks.len())]
            .iter()
            .map(|t| (t.start.center(), t.goal.center()))
            .unzip()
    }

    pub fn to_scen_string(&self) -> String {
        let mut out = String::from("version 1\n");
        for (k, t) in self.tasks.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t0",
                k, self.map_name, self.width, self.height, t.start.i, t.start.j, t.goal.i, t.goal.j
            );
        }
        out
    }

    /// Parses `.scen` text. Every line after the version header holds
    /// bucket, map name, width, height, start x, start y, goal x, goal y and
    /// the optimal length; the bucket and length are ignored. Fields are
    /// separated by tabs or, failing that, by whitespace.
    pub fn parse(text: &str, path: &Path) -> Result<Scenario, FormatError> {
        let err = |line: usize, reason: String| FormatError::Scen {
            path: path.to_owned(),
            line,
            reason,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, l)) if l.trim_start().starts_with("version") => {}
            _ => return Err(err(1, "missing version header".into())),
        }
        let mut scen = Scenario {
            map_name: String::new(),
            width: 0,
            height: 0,
            tasks: Vec::new(),
        };
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = if line.contains('\t') {
                line.split('\t').collect()
            } else {
                line.split_whitespace().collect()
            };
            if fields.len() < 8 {
                return Err(err(
                    n,
                    format!("expected at least 8 fields, found {}", fields.len()),
                ));
            }
            let num = |k: usize| -> Result<usize, FormatError> {
                fields[k]
                    .trim()
                    .parse()
                    .map_err(|_| err(n, format!("field {} is not a cell coordinate", k + 1)))
            };
            let (w, h) = (num(2)?, num(3)?);
            let task = Task {
                start: Cell::new(num(4)?, num(5)?),
                goal: Cell::new(num(6)?, num(7)?),
            };
            if scen.tasks.is_empty() {
                scen.map_name = fields[1].trim().to_owned();
                scen.width = w;
                scen.height = h;
            } else if (w, h) != (scen.width, scen.height) {
                return Err(err(n, "map dimensions differ from the first entry".into()));
            }
            for c in [task.start, task.goal] {
                if c.i >= w || c.j >= h {
                    return Err(err(
                        n,
                        format!("cell ({}, {}) outside the {w}x{h} map", c.i, c.j),
                    ));
                }
            }
            scen.tasks.push(task);
        }
        Ok(scen)
    }

    /// Checks that the scenario fits `map` and that all cells are free.
    pub fn check_against(&self, map: &GridMap) -> Result<(), String> {
        if !self.is_empty() && (self.width, self.height) != (map.width(), map.height()) {
            return Err(format!(
                "scenario is for a {}x{} map, map is {}x{}",
                self.width,
                self.height,
                map.width(),
                map.height()
            ));
        }
        for (k, t) in self.tasks.iter().enumerate() {
            for c in [t.start, t.goal] {
                if c.i >= map.width() || c.j >= map.height() || map.is_blocked(c) {
                    return Err(format!("task {k}: cell ({}, {}) is not free", c.i, c.j));
                }
            }
        }
        Ok(())
    }
}

pub fn read_scen(path: &Path) -> Result<Scenario, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    Scenario::parse(&text, path)
}

pub fn write_scen(path: &Path, scen: &Scenario) -> Result<(), FormatError> {
    fs::write(path, scen.to_scen_string()).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scen_round_trip() {
        let scen = Scenario {
            map_name: "gaps-1.map".into(),
            width: 64,
            height: 64,
            tasks: vec![
                Task {
                    start: Cell::new(1, 2),
                    goal: Cell::new(60, 3),
                },
                Task {
                    start: Cell::new(61, 40),
                    goal: Cell::new(5, 7),
                },
            ],
        };
        let text = scen.to_scen_string();
        assert_eq!(Scenario::parse(&text, Path::new("x.scen")).unwrap(), scen);
        let (s, g) = scen.prefix(1);
        assert_eq!(s, vec![Point::new(1.5, 2.5)]);
        assert_eq!(g, vec![Point::new(60.5, 3.5)]);
    }

    #[test]
    fn scen_errors_carry_path_and_line() {
        let e =
            Scenario::parse("version 1\n0\tm\t8\t8\t1\t1\n", Path::new("bad.scen")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bad.scen") && msg.contains("line 2"), "{msg}");
        let e = Scenario::parse("0\tm\t8\t8\t1\t1\t2\t2\t0\n", Path::new("bad.scen")).unwrap_err();
        assert!(e.to_string().contains("version"));
        let e = Scenario::parse(
            "version 1\n0\tm\t8\t8\t9\t1\t2\t2\t0\n",
            Path::new("b.scen"),
        )
        .unwrap_err();
        assert!(e.to_string().contains("outside"));
    }

    #[test]
    fn whitespace_separated_scen() {
        let s =
            Scenario::parse("version 1\n0 m.map 4 4 0 0 3 3 4.24\n", Path::new("s.scen")).unwrap();
        assert_eq!(
            s.tasks,
            vec![Task {
                start: Cell::new(0, 0),
                goal: Cell::new(3, 3)
            }]
        );
    }
}
