//! Joint-state search over synchronous multi-agent moves, used as the
//! Push and Rotate oracle on tiny graphs.

use std::collections::{BTreeSet, HashSet, VecDeque};

use swarmnav_core::mapf::{solve_detailed, validate_plan, Graph, MapfError, MapfInstance, Method};
use swarmnav_core::Cell;

/// Joint configurations reachable from `start` under synchronous moves with
/// no shared vertices and no swaps along an edge.
pub fn reachable(adj: &[Vec<usize>], start: &[usize]) -> HashSet<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.to_vec());
    queue.push_back(start.to_vec());
    while let Some(cur) = queue.pop_front() {
        let mut options: Vec<Vec<usize>> = Vec::new();
        for &v in &cur {
            let mut o = vec![v];
            o.extend_from_slice(&adj[v]);
            options.push(o);
        }
        let mut choice = vec![0usize; cur.len()];
        loop {
            let next: Vec<usize> = choice
                .iter()
                .enumerate()
                .map(|(a, &c)| options[a][c])
                .collect();
            let distinct = next.iter().collect::<BTreeSet<_>>().len() == next.len();
            let swap = (0..cur.len())
                .any(|a| (0..cur.len()).any(|b| a != b && next[a] == cur[b] && next[b] == cur[a]));
            if distinct && !swap && seen.insert(next.clone()) {
                queue.push_back(next);
            }
            let mut k = 0;
            loop {
                if k == cur.len() {
                    break;
                }
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == cur.len() {
                break;
            }
        }
    }
    seen
}

pub fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.len()).map(|v| g.neighbors(v).to_vec()).collect()
}

pub fn normalize(cells: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mi = cells.iter().map(|c| c.0).min().unwrap();
    let mj = cells.iter().map(|c| c.1).min().unwrap();
    let mut out: Vec<(i32, i32)> = cells.iter().map(|&(i, j)| (i - mi, j - mj)).collect();
    out.sort_unstable();
    out
}

pub fn canonical(cells: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let maps: [fn((i32, i32)) -> (i32, i32); 8] = [
        |(i, j)| (i, j),
        |(i, j)| (-i, j),
        |(i, j)| (i, -j),
        |(i, j)| (-i, -j),
        |(i, j)| (j, i),
        |(i, j)| (-j, i),
        |(i, j)| (j, -i),
        |(i, j)| (-j, -i),
    ];
    maps.iter()
        .map(|f| normalize(&cells.iter().map(|&c| f(c)).collect::<Vec<_>>()))
        .min()
        .unwrap()
}

/// Free polyominoes with up to `max` cells.
pub fn polyominoes(max: usize) -> Vec<Vec<(i32, i32)>> {
    let mut level: BTreeSet<Vec<(i32, i32)>> = BTreeSet::from([vec![(0, 0)]]);
    let mut all: Vec<Vec<(i32, i32)>> = level.iter().cloned().collect();
    for _ in 1..max {
        let mut next = BTreeSet::new();
        for p in &level {
            for &(i, j) in p {
                for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let c = (i + di, j + dj);
                    if !p.contains(&c) {
                        let mut q = p.clone();
                        q.push(c);
                        next.insert(canonical(&q));
                    }
                }
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

pub fn to_graph(cells: &[(i32, i32)]) -> Graph {
    let cells: Vec<Cell> = cells
        .iter()
        .map(|&(i, j)| Cell::new(i as usize + 1, j as usize + 1))
        .collect();
    Graph::from_cells(&cells)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in combinations(n, k - 1) {
            if rest.iter().all(|&r| r > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}

pub fn permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n, k - 1) {
        for v in 0..n {
            if !rest.contains(&v) {
                let mut p = rest.clone();
                p.push(v);
                out.push(p);
            }
        }
    }
    out
}

#[derive(Default, Debug)]
pub struct Tally {
    pub instances: usize,
    pub feasible: usize,
    pub mismatches: Vec<String>,
}

pub fn check_graph(g: &Graph, tally: &mut Tally) {
    let adj = adjacency(g);
    for k in 1..=3.min(g.len()) {
        for starts in combinations(g.len(), k) {
            let reach = reachable(&adj, &starts);
            for goals in permutations(g.len(), k) {
                check_instance(g, &starts, &goals, reach.contains(&goals), tally);
            }
        }
    }
}

pub fn check_instance(
    g: &Graph,
    starts: &[usize],
    goals: &[usize],
    feasible: bool,
    tally: &mut Tally,
) {
    tally.instances += 1;
    tally.feasible += feasible as usize;
    let inst = MapfInstance::new(
        g.clone(),
        starts.to_vec(),
        goals.to_vec(),
        (0..starts.len()).collect(),
    )
    .unwrap();
    let describe = || {
        let cells: Vec<Cell> = (0..g.len()).map(|v| g.cell(v)).collect();
        format!("cells {cells:?} starts {starts:?} goals {goals:?}")
    };
    match solve_detailed(&inst) {
        Ok((plan, methods)) => {
            if !feasible {
                tally
                    .mismatches
                    .push(format!("solved an unreachable goal: {}", describe()));
            } else if let Err(r) = validate_plan(&inst, &plan) {
                tally
                    .mismatches
                    .push(format!("invalid plan {r:?}: {}", describe()));
            } else {
                let holes = g.len() - starts.len();
                // On a connected graph with two or more free vertices and a
                // vertex of degree three, the push-and-rotate loop must be
                // the one that solved it.
                let connected = g.components().iter().all(|&c| c == 0);
                let junction = (0..g.len()).any(|v| g.neighbors(v).len() >= 3);
                if connected
                    && holes >= 2
                    && junction
                    && methods
                        .iter()
                        .any(|m| *m != Method::PushAndRotate && *m != Method::Trivial)
                {
                    tally
                        .mismatches
                        .push(format!("unexpected method {methods:?}: {}", describe()));
                }
            }
        }
        Err(MapfError::Infeasible) => {
            if feasible {
                tally
                    .mismatches
                    .push(format!("missed a solution: {}", describe()));
            }
        }
        Err(e) => tally.mismatches.push(format!("error {e}: {}", describe())),
    }
}

/// Every instance with at most three agents on every shape of at most six
/// cells: all free polyominoes plus every subset of a 2x3 box.
pub fn exhaustive_tally() -> (usize, Tally) {
    let mut shapes = polyominoes(6);
    for mask in 1u32..64 {
        let cells: Vec<(i32, i32)> = (0..6)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| (b % 3, b / 3))
            .collect();
        let c = canonical(&cells);
        if !shapes.contains(&c) {
            shapes.push(c);
        }
    }
    let mut tally = Tally::default();
    for shape in &shapes {
        check_graph(&to_graph(shape), &mut tally);
    }
    (shapes.len(), tally)
}

/// `count` random instances on subsets of a 3x3 box with at most six cells.
pub fn random_tiny_tally(count: u64) -> Tally {
    let mut tally = Tally::default();
    for seed in 0..count {
        let mut s = seed + 1;
        let mut bit = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 33) as usize
        };
        let mask = loop {
            let m = bit() % 512;
            if (1..=6).contains(&m.count_ones()) {
                break m;
            }
        };
        let cells: Vec<Cell> = (0..9)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| Cell::new(b % 3, b / 3))
            .collect();
        let g = Graph::from_cells(&cells);
        let k = 1 + bit() % 3.min(g.len());
        let perm = permutations(g.len(), k);
        let starts = perm[bit() % perm.len()].clone();
        let goals = perm[bit() % perm.len()].clone();
        let feasible = reachable(&adjacency(&g), &starts).contains(&goals);
        check_instance(&g, &starts, &goals, feasible, &mut tally);
    }
    tally
}
