//! Occupancy grids and the continuous geometry queries defined over them.
//!
//! Cell `(i, j)` covers the unit square `[i, i + 1] x [j, j + 1]`. Everything
//! outside the map counts as blocked, so agents never leave it.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{closest_point_on_segment, Point, Rect, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub const fn new(i: usize, j: usize) -> Self {
        Cell { i, j }
    }

    pub fn center(self) -> Point {
        Vec2::new(self.i as f64 + 0.5, self.j as f64 + 0.5)
    }

    pub fn rect(self) -> Rect {
        let (x, y) = (self.i as f64, self.j as f64);
        Rect::new(Vec2::new(x, y), Vec2::new(x + 1.0, y + 1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridError {
    /// Malformed map text; `line` is 1-based.
    Parse {
        line: usize,
        reason: String,
    },
    InvalidParameter(&'static str),
    NoFreeCell,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::Parse { line, reason } => {
                write!(f, "map parse error at line {line}: {reason}")
            }
            GridError::InvalidParameter(what) => write!(f, "invalid map parameter: {what}"),
            GridError::NoFreeCell => f.write_str("no free cell reachable"),
        }
    }
}

impl core::error::Error for GridError {}

/// An axis-aligned obstacle boundary piece: a maximal run of cell edges that
/// separate a blocked (or outside) cell from a free one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

const TILE: usize = 8;

/// Immutable after construction; safe to share between simulation workers.
#[derive(Clone, Debug)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    // Chebyshev distance (in cells) from each cell to the nearest blocked cell.
    cheb: Vec<u32>,
    segments: Vec<Segment>,
    // Segment indices per TILE x TILE block of cells.
    tiles: Vec<Vec<u32>>,
    tiles_w: usize,
}

impl PartialEq for GridMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.blocked == other.blocked
    }
}

impl GridMap {
    /// Builds a map from row-major occupancy (`blocked[j * width + i]`).
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidParameter("dimensions must be positive"));
        }
        if blocked.len() != width * height {
            return Err(GridError::InvalidParameter(
                "occupancy length must equal width * height",
            ));
        }
        let mut map = GridMap {
            width,
            height,
            blocked,
            cheb: Vec::new(),
            segments: Vec::new(),
            tiles: Vec::new(),
            tiles_w: 0,
        };
        map.cheb = map.chebyshev_field();
        map.segments = map.boundary_segments();
        map.build_tiles();
        Ok(map)
    }

    pub fn empty(width: usize, height: usize) -> Result<Self, GridError> {
        GridMap::new(width, height, vec![false; width * height])
    }

    /// Parses a map from rows of `.`/`@` characters, row 0 first. Handy for
    /// test fixtures.
    pub fn from_rows(rows: &[&str]) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut blocked = Vec::with_capacity(width * height);
        for (j, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(GridError::Parse {
                    line: j + 1,
                    reason: String::from("ragged row"),
                });
            }
            for ch in row.chars() {
                blocked.push(cell_char(ch).ok_or_else(|| GridError::Parse {
                    line: j + 1,
                    reason: alloc::format!("unknown cell character {ch:?}"),
                })?);
            }
        }
        GridMap::new(width, height, blocked)
    }

    /// Reads the MovingAI `.map` format: `type`, `height`, `width`, `map`
    /// header lines followed by the rows. `.` and `G` are free; `@`, `O` and
    /// `T` are blocked.
    pub fn from_movingai_str(text: &str) -> Result<Self, GridError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim_end_matches('\r')));
        let mut height = None;
        let mut width = None;
        let mut saw_type = false;
        let mut header_end = 0;
        for (n, line) in lines.by_ref() {
            let mut parts = line.split_whitespace();
            let key = parts.next();
            let value = parts.next();
            match key {
                Some("type") => saw_type = true,
                Some("height") => height = Some(parse_dim(value, n)?),
                Some("width") => width = Some(parse_dim(value, n)?),
                Some("map") => {
                    header_end = n;
                    break;
                }
                None => {}
                Some(other) => {
                    return Err(GridError::Parse {
                        line: n,
                        reason: alloc::format!("unexpected header key {other:?}"),
                    })
                }
            }
        }
        let missing = |what: &str| GridError::Parse {
            line: header_end.max(1),
            reason: alloc::format!("missing {what} header"),
        };
        if header_end == 0 {
            return Err(missing("map"));
        }
        if !saw_type {
            return Err(missing("type"));
        }
        let height = height.ok_or_else(|| missing("height"))?;
        let width = width.ok_or_else(|| missing("width"))?;

        let mut blocked = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (n, line) in lines {
            if rows == height {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(GridError::Parse {
                    line: n,
                    reason: alloc::format!("more than {height} rows"),
                });
            }
            let len = line.chars().count();
            if len != width {
                return Err(GridError::Parse {
                    line: n,
                    reason: alloc::format!("row has {len} cells, expected {width}"),
                });
            }
            for ch in line.chars() {
                blocked.push(cell_char(ch).ok_or_else(|| GridError::Parse {
                    line: n,
                    reason: alloc::format!("unknown cell character {ch:?}"),
                })?);
            }
            rows += 1;
        }
        if rows != height {
            return Err(GridError::Parse {
                line: header_end + rows + 1,
                reason: alloc::format!("found {rows} rows, expected {height}"),
            });
        }
        GridMap::new(width, height, blocked)
    }

    /// Writes the MovingAI format. Free cells become `.`, blocked cells `@`.
    pub fn to_movingai_string(&self) -> String {
        let mut out = alloc::format!(
            "type octile\nheight {}\nwidth {}\nmap\n",
            self.height,
            self.width
        );
        for j in 0..self.height {
            for i in 0..self.width {
                out.push(if self.blocked[j * self.width + i] {
                    '@'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[c.j * self.width + c.i]
    }

    /// Like [`GridMap::is_blocked`] but treats out-of-range indices as blocked.
    pub fn is_blocked_at(&self, i: i64, j: i64) -> bool {
        !self.in_bounds(i, j) || self.blocked[j as usize * self.width + i as usize]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |j| (0..self.width).map(move |i| Cell::new(i, j)))
            .filter(move |&c| !self.is_blocked(c))
    }

    /// The cell containing `p`, if `p` lies inside the map.
    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let (fi, fj) = (libm::floor(p.x), libm::floor(p.y));
        if !(fi >= 0.0 && fj >= 0.0) {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        (i < self.width && j < self.height).then_some(Cell::new(i, j))
    }

    /// Up to four in-bounds neighbors in east, south, west, north order.
    pub fn neighbors4(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
        DIRS.iter().filter_map(move |&(di, dj)| {
            let (i, j) = (c.i as i64 + di, c.j as i64 + dj);
            self.in_bounds(i, j)
                .then(|| Cell::new(i as usize, j as usize))
        })
    }

    /// True iff the segment `a`-`b` swept by a disc of radius `clearance`
    /// touches no blocked cell and stays inside the map.
    pub fn line_of_sight(&self, a: Point, b: Point, clearance: f64) -> bool {
        let c = clearance.max(0.0);
        let (lo_x, hi_x) = (a.x.min(b.x), a.x.max(b.x));
        let i0 = libm::floor(lo_x - c) as i64;
        let i1 = libm::floor(hi_x + c) as i64;
        let d = b - a;
        for i in i0..=i1 {
            // Segment points whose disc can reach column strip [i, i + 1].
            let x_lo = (i as f64 - c).max(lo_x);
            let x_hi = (i as f64 + 1.0 + c).min(hi_x);
            if x_lo > x_hi {
                continue;
            }
            let (y_lo, y_hi) = if d.x == 0.0 {
                (a.y.min(b.y), a.y.max(b.y))
            } else {
                let ya = a.y + d.y * ((x_lo - a.x) / d.x);
                let yb = a.y + d.y * ((x_hi - a.x) / d.x);
                (ya.min(yb), ya.max(yb))
            };
            let j0 = libm::floor(y_lo - c) as i64;
            let j1 = libm::floor(y_hi + c) as i64;
            for j in j0..=j1 {
                if !self.is_blocked_at(i, j) {
                    continue;
                }
                let cell = Rect::new(
                    Vec2::new(i as f64, j as f64),
                    Vec2::new(i as f64 + 1.0, j as f64 + 1.0),
                );
                if cell.distance_to_segment(a, b) <= c {
                    return false;
                }
            }
        }
        true
    }

    /// Distance from `p` to the nearest blocked square or to the map border;
    /// zero inside a blocked cell or outside the map.
    pub fn distance_to_obstacles(&self, p: Point) -> f64 {
        let border =
            p.x.min(p.y)
                .min(self.width as f64 - p.x)
                .min(self.height as f64 - p.y);
        if !(border > 0.0) {
            return 0.0;
        }
        let Some(cell) = self.cell_of(p) else {
            return 0.0;
        };
        let mut best = border;
        let start = self.cheb[cell.j * self.width + cell.i] as usize;
        let (ci, cj) = (cell.i as i64, cell.j as i64);
        let mut ring = start;
        // A blocked cell on Chebyshev ring `r` is at least `r - 1` away.
        while (ring as f64 - 1.0) < best && ring <= self.width.max(self.height) {
            let r = ring as i64;
            let mut visit = |i: i64, j: i64| {
                if self.in_bounds(i, j) && self.blocked[j as usize * self.width + i as usize] {
                    let rect = Cell::new(i as usize, j as usize).rect();
                    best = best.min(rect.distance_to_point(p));
                }
            };
            if r == 0 {
                visit(ci, cj);
            } else {
                for i in (ci - r)..=(ci + r) {
                    visit(i, cj - r);
                    visit(i, cj + r);
                }
                for j in (cj - r + 1)..(cj + r) {
                    visit(ci - r, j);
                    visit(ci + r, j);
                }
            }
            ring += 1;
        }
        best
    }

    /// Breadth-first search over 4-connected cells from `from`, expanding in
    /// east, south, west, north order. Returns the first free cell for which
    /// `forbidden` is false. The search passes through blocked cells.
    pub fn nearest_free_cell<F>(&self, from: Cell, forbidden: F) -> Result<Cell, GridError>
    where
        F: Fn(Cell) -> bool,
    {
        let all = (Cell::new(0, 0), Cell::new(self.width - 1, self.height - 1));
        self.nearest_free_cell_within(from, all, forbidden)
    }

    /// [`GridMap::nearest_free_cell`] restricted to the inclusive cell box
    /// `bounds`.
    pub fn nearest_free_cell_within<F>(
        &self,
        from: Cell,
        bounds: (Cell, Cell),
        forbidden: F,
    ) -> Result<Cell, GridError>
    where
        F: Fn(Cell) -> bool,
    {
        let (lo, hi) = bounds;
        let inside = |c: Cell| c.i >= lo.i && c.i <= hi.i && c.j >= lo.j && c.j <= hi.j;
        if from.i >= self.width || from.j >= self.height || !inside(from) {
            return Err(GridError::NoFreeCell);
        }
        let mut seen = vec![false; self.width * self.height];
        let mut queue = VecDeque::new();
        seen[from.j * self.width + from.i] = true;
        queue.push_back(from);
        while let Some(c) = queue.pop_front() {
            if !self.is_blocked(c) && !forbidden(c) {
                return Ok(c);
            }
            for n in self.neighbors4(c) {
                let k = n.j * self.width + n.i;
                if inside(n) && !seen[k] {
                    seen[k] = true;
                    queue.push_back(n);
                }
            }
        }
        Err(GridError::NoFreeCell)
    }

    /// All obstacle boundary segments, including the map border.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Calls `f` once for each boundary segment whose closest point lies
    /// within `range` of `p`, in ascending segment index order.
    pub fn for_each_segment_near<F>(&self, p: Point, range: f64, mut f: F)
    where
        F: FnMut(&Segment),
    {
        let t = TILE as f64;
        let tiles_h = self.tiles.len() / self.tiles_w;
        let clamp_tile = |v: f64, n: usize| -> usize {
            if v <= 0.0 {
                0
            } else {
                ((v / t) as usize).min(n - 1)
            }
        };
        let ti0 = clamp_tile(p.x - range, self.tiles_w);
        let ti1 = clamp_tile(p.x + range, self.tiles_w);
        let tj0 = clamp_tile(p.y - range, tiles_h);
        let tj1 = clamp_tile(p.y + range, tiles_h);
        let mut candidates: Vec<u32> = Vec::new();
        for tj in tj0..=tj1 {
            for ti in ti0..=ti1 {
                candidates.extend_from_slice(&self.tiles[tj * self.tiles_w + ti]);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for idx in candidates {
            let s = &self.segments[idx as usize];
            if closest_point_on_segment(p, s.a, s.b).distance(p) <= range {
                f(s);
            }
        }
    }

    fn chebyshev_field(&self) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.width * self.height];
        let mut queue = VecDeque::new();
        for (k, &b) in self.blocked.iter().enumerate() {
            if b {
                dist[k] = 0;
                queue.push_back(k);
            }
        }
        while let Some(k) = queue.pop_front() {
            let (i, j) = ((k % self.width) as i64, (k / self.width) as i64);
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (ni, nj) = (i + di, j + dj);
                    if self.in_bounds(ni, nj) {
                        let nk = nj as usize * self.width + ni as usize;
                        if dist[nk] == u32::MAX {
                            dist[nk] = dist[k] + 1;
                            queue.push_back(nk);
                        }
                    }
                }
            }
        }
        dist
    }

    fn boundary_segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let (w, h) = (self.width as i64, self.height as i64);
        // Horizontal edges at y = j, between rows j - 1 and j. A run is
        // extended while the blocked side stays the same.
        for j in 0..=h {
            let mut run: Option<(i64, bool)> = None;
            for i in 0..=w {
                let side = if i < w {
                    let above = self.is_blocked_at(i, j - 1);
                    let below = self.is_blocked_at(i, j);
                    (above != below).then_some(above)
                } else {
                    None
                };
                match (run, side) {
                    (Some((_, s)), Some(t)) if s == t => {}
                    _ => {
                        if let Some((start, _)) = run.take() {
                            out.push(Segment {
                                a: Vec2::new(start as f64, j as f64),
                                b: Vec2::new(i as f64, j as f64),
                            });
                        }
                        run = side.map(|s| (i, s));
                    }
                }
            }
        }
        for i in 0..=w {
            let mut run: Option<(i64, bool)> = None;
            for j in 0..=h {
                let side = if j < h {
                    let left = self.is_blocked_at(i - 1, j);
                    let right = self.is_blocked_at(i, j);
                    (left != right).then_some(left)
                } else {
                    None
                };
                match (run, side) {
                    (Some((_, s)), Some(t)) if s == t => {}
                    _ => {
                        if let Some((start, _)) = run.take() {
                            out.push(Segment {
                                a: Vec2::new(i as f64, start as f64),
                                b: Vec2::new(i as f64, j as f64),
                            });
                        }
                        run = side.map(|s| (j, s));
                    }
                }
            }
        }
        out
    }

    fn build_tiles(&mut self) {
        let tiles_w = self.width.div_ceil(TILE);
        let tiles_h = self.height.div_ceil(TILE);
        let mut tiles = vec![Vec::new(); tiles_w * tiles_h];
        for (idx, s) in self.segments.iter().enumerate() {
            let ti0 = (s.a.x.min(s.b.x) as usize / TILE).min(tiles_w - 1);
            let ti1 = (s.a.x.max(s.b.x) as usize / TILE).min(tiles_w - 1);
            let tj0 = (s.a.y.min(s.b.y) as usize / TILE).min(tiles_h - 1);
            let tj1 = (s.a.y.max(s.b.y) as usize / TILE).min(tiles_h - 1);
            // Edges on a tile border are also visible from the tile before it.
            let ti0 = ti0.saturating_sub(usize::from(s.a.x.min(s.b.x) as usize % TILE == 0));
            let tj0 = tj0.saturating_sub(usize::from(s.a.y.min(s.b.y) as usize % TILE == 0));
            for tj in tj0..=tj1 {
                for ti in ti0..=ti1 {
                    tiles[tj * tiles_w + ti].push(idx as u32);
                }
            }
        }
        self.tiles = tiles;
        self.tiles_w = tiles_w;
    }
}

fn cell_char(ch: char) -> Option<bool> {
    match ch {
        '.' | 'G' => Some(false),
        '@' | 'O' | 'T' => Some(true),
        _ => None,
    }
}

fn parse_dim(value: Option<&str>, line: usize) -> Result<usize, GridError> {
    value
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| GridError::Parse {
            line,
            reason: String::from("expected a positive integer"),
        })
}

/// Two open rooms split by a vertical wall at column `size / 2` with
/// `num_passages` one-cell gaps.
pub fn generate_gaps_map(size: usize, num_passages: usize) -> Result<GridMap, GridError> {
    generate_gaps_map_with(size, num_passages, 1, 1)
}

/// Gaps map with configurable wall thickness and gap width. Gap `q` (1-based)
/// starts at row `floor(q * size / (num_passages + 1))`.
pub fn generate_gaps_map_with(
    size: usize,
    num_passages: usize,
    wall_thickness: usize,
    gap_width: usize,
) -> Result<GridMap, GridError> {
    if size < 8 {
        return Err(GridError::InvalidParameter("size must be at least 8"));
    }
    if !(1..=4).contains(&num_passages) {
        return Err(GridError::InvalidParameter("num_passages must be in 1..=4"));
    }
    if wall_thickness == 0 || size / 2 + wall_thickness >= size {
        return Err(GridError::InvalidParameter("wall thickness out of range"));
    }
    if gap_width == 0 || num_passages * gap_width >= size {
        return Err(GridError::InvalidParameter("gap width out of range"));
    }
    let mut blocked = vec![false; size * size];
    let wall = size / 2;
    for j in 0..size {
        let in_gap = (1..=num_passages).any(|q| {
            let start = q * size / (num_passages + 1);
            j >= start && j < start + gap_width
        });
        if !in_gap {
            for i in wall..wall + wall_thickness {
                blocked[j * size + i] = true;
            }
        }
    }
    GridMap::new(size, size, blocked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn movingai_two_by_two() {
        let m =
            GridMap::from_movingai_str("type octile\nheight 2\nwidth 2\nmap\n.@\n..\n").unwrap();
        assert_eq!(m.blocked_count(), 1);
        assert!(m.is_blocked(Cell::new(1, 0)));
    }

    #[test]
    fn movingai_errors_name_lines() {
        let err =
            GridMap::from_movingai_str("type octile\nheight 2\nwidth 2\nmap\n.@\n.\n").unwrap_err();
        assert_eq!(
            err,
            GridError::Parse {
                line: 6,
                reason: "row has 1 cells, expected 2".into()
            }
        );
        let err = GridMap::from_movingai_str("type octile\nheight 2\nwidth 2\nmap\n.x\n..\n")
            .unwrap_err();
        assert!(matches!(err, GridError::Parse { line: 5, .. }));
        let err = GridMap::from_movingai_str("type octile\nheight 3\nwidth 2\nmap\n..\n..\n")
            .unwrap_err();
        assert!(matches!(err, GridError::Parse { .. }));
        let err = GridMap::from_movingai_str("height 2\nwidth 2\nmap\n..\n..\n").unwrap_err();
        assert!(matches!(err, GridError::Parse { .. }));
        let err = GridMap::from_movingai_str("type octile\nheight x\nwidth 2\nmap\n").unwrap_err();
        assert!(matches!(err, GridError::Parse { line: 2, .. }));
    }

    #[test]
    fn gaps_counts() {
        let m = generate_gaps_map(64, 1).unwrap();
        assert_eq!(m.blocked_count(), 63);
        assert!(m.free_cells().count() == 64 * 64 - 63);
        assert!((0..64).filter(|&j| m.is_blocked(Cell::new(32, j))).count() == 63);
        assert!(!m.is_blocked(Cell::new(32, 32)));
        let m = generate_gaps_map(64, 4).unwrap();
        assert_eq!(m.blocked_count(), 60);
        for j in [12, 25, 38, 51] {
            assert!(!m.is_blocked(Cell::new(32, j)));
        }
        assert!(generate_gaps_map(7, 1).is_err());
        assert!(generate_gaps_map(64, 5).is_err());
        let thick = generate_gaps_map_with(64, 2, 2, 3).unwrap();
        assert_eq!(thick.blocked_count(), 2 * (64 - 2 * 3));
    }

    #[test]
    fn distance_examples() {
        let m = GridMap::from_rows(&["....", ".@..", "....", "...."]).unwrap();
        assert_eq!(m.distance_to_obstacles(Vec2::new(0.5, 1.5)), 0.5);
        assert_eq!(m.distance_to_obstacles(Vec2::new(1.5, 1.5)), 0.0);
        // Point (2.25, 3.75) against cell [5,6] x [3,4], shifted by (10, 10)
        // so the map border is not the nearest obstacle.
        let mut blocked = vec![false; 30 * 30];
        blocked[13 * 30 + 15] = true;
        let m = GridMap::new(30, 30, blocked).unwrap();
        assert!((m.distance_to_obstacles(Vec2::new(12.25, 13.75)) - 2.75).abs() < 1e-12);
        // Border counts as obstacle.
        let m = GridMap::empty(10, 10).unwrap();
        assert!((m.distance_to_obstacles(Vec2::new(0.3, 5.0)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn los_clearance_threshold() {
        // Blocked cell [5,6] x [3,4]; a horizontal segment at y = 4.4 passes
        // 0.4 above its top edge.
        let mut blocked = vec![false; 10 * 10];
        blocked[3 * 10 + 5] = true;
        let m = GridMap::new(10, 10, blocked).unwrap();
        let (a, b) = (Vec2::new(2.0, 4.4), Vec2::new(8.0, 4.4));
        assert!(!m.line_of_sight(a, b, 0.49));
        assert!(m.line_of_sight(a, b, 0.3));
        assert!(!m.line_of_sight(Vec2::new(2.0, 3.5), Vec2::new(8.0, 3.5), 0.0));
    }

    #[test]
    fn nearest_free_examples() {
        let m = GridMap::from_rows(&["...", ".@.", "..."]).unwrap();
        let c = Cell::new(1, 1);
        assert_eq!(
            m.nearest_free_cell(Cell::new(0, 0), |_| false).unwrap(),
            Cell::new(0, 0)
        );
        // Blocked center: east neighbor first.
        assert_eq!(m.nearest_free_cell(c, |_| false).unwrap(), Cell::new(2, 1));

        // Forbidden center ringed by blocked 4-neighbors; the first free
        // diagonal in BFS order is reached at depth 2.
        let m = GridMap::from_rows(&[".@.", "@.@", ".@."]).unwrap();
        let got = m.nearest_free_cell(c, |x| x == c).unwrap();
        // Depth 1 queue: E(2,1) S(1,2) W(0,1) N(1,0). Expanding E yields
        // S(2,2) first, then N(2,0).
        assert_eq!(got, Cell::new(2, 2));

        let full = GridMap::from_rows(&["@@", "@@"]).unwrap();
        assert_eq!(
            full.nearest_free_cell(Cell::new(0, 0), |_| false),
            Err(GridError::NoFreeCell)
        );
    }

    #[test]
    fn segments_merge_runs() {
        let m = generate_gaps_map(8, 1).unwrap();
        // Wall at column 4, gap at row 4. The wall splits the top and bottom
        // border into two pieces each.
        let on_border = |s: &&Segment| {
            (s.a.x == s.b.x && (s.a.x == 0.0 || s.a.x == 8.0))
                || (s.a.y == s.b.y && (s.a.y == 0.0 || s.a.y == 8.0))
        };
        assert_eq!(m.segments().iter().filter(on_border).count(), 6);
        // Wall pieces rows 0..4 and 5..8: left and right faces plus the two
        // caps facing the gap.
        assert_eq!(m.segments().len(), 6 + 4 + 2);
        assert!(m.segments().contains(&Segment {
            a: Vec2::new(4.0, 0.0),
            b: Vec2::new(4.0, 4.0)
        }));
        assert!(m.segments().contains(&Segment {
            a: Vec2::new(4.0, 4.0),
            b: Vec2::new(5.0, 4.0)
        }));
    }
}
