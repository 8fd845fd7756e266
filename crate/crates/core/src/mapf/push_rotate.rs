//! Sequential solver in the push-and-rotate family: exactly one agent moves
//! per recorded move.
//!
//! Each connected component is solved on its own. Simple cycles only allow
//! rotations; components with fewer than two free vertices are searched
//! exhaustively. Everything else goes through the main loop, which places
//! agents on their goals in peeling order using push (clear the next
//! vertex), swap (exchange two agents at a junction and undo all side
//! effects) and resolution of finished agents displaced by a swap.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::{Graph, MapfError, MapfInstance};

const NONE: usize = usize::MAX;
const MAX_EXHAUSTIVE_STATES: usize = 200_000;
const MAX_SWAP_STATES: usize = 20_000;

/// Method used for one connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// All agents already on their goals.
    Trivial,
    /// Simple cycle: agents keep their cyclic order and rotate.
    Polygon,
    /// Fewer than two free vertices: breadth-first search over configurations.
    Exhaustive,
    /// Push, swap and rotate primitives.
    PushAndRotate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Move {
    pub agent: usize,
    pub from: usize,
    pub to: usize,
}

pub(crate) fn solve_sequential(inst: &MapfInstance) -> Result<(Vec<Move>, Vec<Method>), MapfError> {
    let g = &inst.graph;
    let comp = g.components();
    if (0..inst.num_agents()).any(|a| comp[inst.starts[a]] != comp[inst.goals[a]]) {
        return Err(MapfError::Infeasible);
    }
    let ncomp = comp.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut verts = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        verts[c].push(v);
    }
    let mut agents = vec![Vec::new(); ncomp];
    for a in 0..inst.num_agents() {
        agents[comp[inst.starts[a]]].push(a);
    }

    let mut s = State::new(g, &inst.starts, &inst.goals);
    let mut methods = Vec::new();
    for c in 0..ncomp {
        let (agents, verts) = (&agents[c], &verts[c]);
        if agents.is_empty() {
            continue;
        }
        let method = if agents.iter().all(|&a| inst.starts[a] == inst.goals[a]) {
            Method::Trivial
        } else if is_cycle(g, verts) {
            s.solve_polygon(agents, verts)?;
            Method::Polygon
        } else if verts.len() - agents.len() < 2 {
            s.solve_exhaustive(agents)?;
            Method::Exhaustive
        } else {
            s.solve_general(agents, verts)?;
            Method::PushAndRotate
        };
        methods.push(method);
    }
    Ok((s.moves, methods))
}

fn is_cycle(g: &Graph, verts: &[usize]) -> bool {
    verts.len() >= 3 && verts.iter().all(|&v| g.neighbors(v).len() == 2)
}

enum Target {
    Vertex(usize),
    Empty,
}

struct Snapshot {
    pos: Vec<usize>,
    occ: Vec<usize>,
    moves: usize,
}

struct State<'g> {
    g: &'g Graph,
    pos: Vec<usize>,
    occ: Vec<usize>,
    goals: Vec<usize>,
    /// Vertices holding a finished agent.
    fin: Vec<bool>,
    moves: Vec<Move>,
    limit: usize,
    // BFS scratch space.
    seen: Vec<u32>,
    epoch: u32,
    prev: Vec<usize>,
    queue: VecDeque<usize>,
}

impl<'g> State<'g> {
    fn new(g: &'g Graph, starts: &[usize], goals: &[usize]) -> Self {
        let mut occ = vec![NONE; g.len()];
        for (a, &v) in starts.iter().enumerate() {
            occ[v] = a;
        }
        State {
            g,
            pos: starts.to_vec(),
            occ,
            goals: goals.to_vec(),
            fin: vec![false; g.len()],
            moves: Vec::new(),
            limit: 10_000 + 64 * g.len() * g.len() * starts.len().max(1),
            seen: vec![0; g.len()],
            epoch: 0,
            prev: vec![NONE; g.len()],
            queue: VecDeque::new(),
        }
    }

    fn do_move(&mut self, agent: usize, to: usize) {
        let from = self.pos[agent];
        debug_assert!(self.g.are_adjacent(from, to), "move along a non-edge");
        debug_assert_eq!(self.occ[to], NONE, "move into an occupied vertex");
        self.occ[from] = NONE;
        self.occ[to] = agent;
        self.pos[agent] = to;
        self.moves.push(Move { agent, from, to });
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            pos: self.pos.clone(),
            occ: self.occ.clone(),
            moves: self.moves.len(),
        }
    }

    fn restore(&mut self, s: Snapshot) {
        self.pos = s.pos;
        self.occ = s.occ;
        self.moves.truncate(s.moves);
    }

    /// Breadth-first search from `from`, never entering `extra` vertices or
    /// (if `respect_fin`) finished vertices. Returns the path to the first
    /// vertex matching `target`.
    fn bfs(
        &mut self,
        from: usize,
        respect_fin: bool,
        extra: &[usize],
        target: Target,
    ) -> Option<Vec<usize>> {
        self.epoch += 1;
        let epoch = self.epoch;
        self.queue.clear();
        self.seen[from] = epoch;
        self.prev[from] = NONE;
        self.queue.push_back(from);
        while let Some(v) = self.queue.pop_front() {
            let hit = match target {
                Target::Vertex(t) => v == t,
                Target::Empty => self.occ[v] == NONE,
            };
            if hit {
                let mut path = vec![v];
                let mut cur = v;
                while self.prev[cur] != NONE {
                    cur = self.prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &n in self.g.neighbors(v) {
                if self.seen[n] == epoch || (respect_fin && self.fin[n]) || extra.contains(&n) {
                    continue;
                }
                self.seen[n] = epoch;
                self.prev[n] = v;
                self.queue.push_back(n);
            }
        }
        None
    }

    /// Empties `v` by shifting agents toward the nearest free vertex.
    fn push(&mut self, v: usize, respect_fin: bool, extra: &[usize]) -> bool {
        if self.occ[v] == NONE {
            return true;
        }
        if respect_fin && self.fin[v] {
            return false;
        }
        let Some(path) = self.bfs(v, respect_fin, extra, Target::Empty) else {
            return false;
        };
        for k in (0..path.len() - 1).rev() {
            let a = self.occ[path[k]];
            if a != NONE {
                self.do_move(a, path[k + 1]);
            }
        }
        true
    }

    /// Walks `agent` to `t`, pushing whatever is in the way.
    fn bring(&mut self, agent: usize, t: usize, extra: &[usize]) -> bool {
        if self.pos[agent] == t {
            return true;
        }
        if extra.contains(&self.pos[agent]) {
            return false;
        }
        let Some(path) = self.bfs(self.pos[agent], false, extra, Target::Vertex(t)) else {
            return false;
        };
        let mut blocked = extra.to_vec();
        blocked.push(NONE);
        for &y in &path[1..] {
            *blocked.last_mut().unwrap() = self.pos[agent];
            if !self.push(y, false, &blocked) {
                return false;
            }
            self.do_move(agent, y);
        }
        true
    }

    /// Frees two neighbors of `w` other than `n`.
    fn clear(&mut self, w: usize, n: usize) -> Option<(usize, usize)> {
        let around: Vec<usize> = self
            .g
            .neighbors(w)
            .iter()
            .copied()
            .filter(|&m| m != n)
            .collect();
        let mut chosen: Vec<usize> = around
            .iter()
            .copied()
            .filter(|&m| self.occ[m] == NONE)
            .take(2)
            .collect();
        for &m in &around {
            if chosen.len() == 2 {
                break;
            }
            if self.occ[m] == NONE {
                continue;
            }
            let mut blocked = vec![w, n];
            blocked.extend_from_slice(&chosen);
            if self.push(m, false, &blocked) {
                chosen.push(m);
            }
        }
        (chosen.len() == 2).then(|| (chosen[0], chosen[1]))
    }

    /// Exchanges the positions of `a` and `b`; every other agent ends where
    /// it started.
    fn swap(&mut self, a: usize, b: usize) -> bool {
        let here = self.pos[a];
        let dist = self.distances(here);
        let mut junctions: Vec<usize> = (0..self.g.len())
            .filter(|&v| dist[v] != NONE && self.g.neighbors(v).len() >= 3)
            .collect();
        junctions.sort_by_key(|&v| (dist[v], v));
        for &w in &junctions {
            for &n in self.g.neighbors(w) {
                for (center, side) in [(a, b), (b, a)] {
                    for center_first in [true, false] {
                        let snap = self.snapshot();
                        let placed = if center_first {
                            self.bring(center, w, &[]) && self.bring(side, n, &[w])
                        } else {
                            self.bring(side, n, &[]) && self.bring(center, w, &[n])
                        };
                        if placed {
                            if let Some((e1, e2)) = self.clear(w, n) {
                                let setup_end = self.moves.len();
                                self.exchange_at(center, side, w, n, e1, e2);
                                self.replay_reversed(snap.moves, setup_end, a, b);
                                return true;
                            }
                        }
                        self.restore(snap);
                    }
                }
            }
        }
        self.swap_by_search(a, b)
    }

    /// Breadth-first search for any configuration in which `a` and `b` sit
    /// on a junction and one of its neighbors with two other neighbors free.
    /// Agents other than `a` and `b` are interchangeable here, which keeps
    /// the search small on cramped graphs.
    fn swap_by_search(&mut self, a: usize, b: usize) -> bool {
        const EMPTY: u8 = 0;
        const OTHER: u8 = 1;
        const A: u8 = 2;
        const B: u8 = 3;
        let comp = self.distances(self.pos[a]);
        let mut start = vec![EMPTY; self.g.len()];
        for (v, &o) in self.occ.iter().enumerate() {
            if o != NONE && comp[v] != NONE {
                start[v] = if o == a {
                    A
                } else if o == b {
                    B
                } else {
                    OTHER
                };
            }
        }
        let g = self.g;
        let gadget = |s: &[u8]| -> Option<(usize, usize, usize, usize)> {
            let pa = s.iter().position(|&x| x == A)?;
            let pb = s.iter().position(|&x| x == B)?;
            if !g.are_adjacent(pa, pb) {
                return None;
            }
            for (w, n) in [(pa, pb), (pb, pa)] {
                let free: Vec<usize> = g
                    .neighbors(w)
                    .iter()
                    .copied()
                    .filter(|&m| m != n && s[m] == EMPTY)
                    .collect();
                if free.len() >= 2 {
                    return Some((w, n, free[0], free[1]));
                }
            }
            None
        };
        let mut index = BTreeMap::new();
        let mut states = vec![start.clone()];
        let mut parent: Vec<(usize, usize, usize)> = vec![(NONE, 0, 0)];
        index.insert(start, 0usize);
        let mut head = 0;
        let found = loop {
            if head == states.len() || states.len() > MAX_SWAP_STATES {
                return false;
            }
            if let Some(hit) = gadget(&states[head]) {
                break (head, hit);
            }
            let cur = states[head].clone();
            for v in 0..cur.len() {
                if cur[v] == EMPTY {
                    continue;
                }
                for &n in g.neighbors(v) {
                    if cur[n] != EMPTY {
                        continue;
                    }
                    let mut next = cur.clone();
                    next[n] = cur[v];
                    next[v] = EMPTY;
                    if !index.contains_key(&next) {
                        index.insert(next.clone(), states.len());
                        states.push(next);
                        parent.push((head, v, n));
                    }
                }
            }
            head += 1;
        };
        let (mut s, (w, n, e1, e2)) = found;
        let mut steps = Vec::new();
        while parent[s].0 != NONE {
            steps.push((parent[s].1, parent[s].2));
            s = parent[s].0;
        }
        let setup_start = self.moves.len();
        for &(from, to) in steps.iter().rev() {
            self.do_move(self.occ[from], to);
        }
        let setup_end = self.moves.len();
        let (center, side) = (self.occ[w], self.occ[n]);
        self.exchange_at(center, side, w, n, e1, e2);
        self.replay_reversed(setup_start, setup_end, a, b);
        true
    }

    /// `x` on junction `w`, `y` on its neighbor `n`, `e1` and `e2` free.
    fn exchange_at(&mut self, x: usize, y: usize, w: usize, n: usize, e1: usize, e2: usize) {
        self.do_move(x, e1);
        self.do_move(y, w);
        self.do_move(y, e2);
        self.do_move(x, w);
        self.do_move(x, n);
        self.do_move(y, w);
    }

    /// Undoes moves `start..end` in reverse with `a` and `b` relabelled.
    fn replay_reversed(&mut self, start: usize, end: usize, a: usize, b: usize) {
        for k in (start..end).rev() {
            let m = self.moves[k];
            let agent = if m.agent == a {
                b
            } else if m.agent == b {
                a
            } else {
                m.agent
            };
            self.do_move(agent, m.from);
        }
    }

    fn distances(&mut self, from: usize) -> Vec<usize> {
        let mut dist = vec![NONE; self.g.len()];
        dist[from] = 0;
        self.queue.clear();
        self.queue.push_back(from);
        while let Some(v) = self.queue.pop_front() {
            for &n in self.g.neighbors(v) {
                if dist[n] == NONE {
                    dist[n] = dist[v] + 1;
                    self.queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Goal order: repeatedly take a goal whose removal keeps the remaining
    /// vertices connected, so finished agents never cut the graph. Dead ends
    /// (low remaining degree) go first.
    fn priority(&mut self, agents: &[usize], verts: &[usize]) -> Vec<usize> {
        let mut alive = vec![false; self.g.len()];
        for &v in verts {
            alive[v] = true;
        }
        let mut owner = BTreeMap::new();
        for &a in agents {
            owner.insert(self.goals[a], a);
        }
        let mut order = Vec::with_capacity(agents.len());
        while !owner.is_empty() {
            let degree = |v: usize, alive: &[bool]| {
                self.g.neighbors(v).iter().filter(|&&n| alive[n]).count()
            };
            let cut = cut_vertices(self.g, &alive, verts);
            let goal = owner
                .keys()
                .copied()
                .filter(|&g| !cut[g])
                .min_by_key(|&g| (degree(g, &alive), g));
            match goal {
                Some(g) => {
                    alive[g] = false;
                    order.push(owner.remove(&g).unwrap());
                }
                None => {
                    // Every remaining goal is a cut vertex; peel a free vertex.
                    let v = verts
                        .iter()
                        .copied()
                        .filter(|&v| alive[v] && !cut[v])
                        .min_by_key(|&v| (degree(v, &alive), v))
                        .expect("a connected graph has a non-cut vertex");
                    alive[v] = false;
                }
            }
        }
        order
    }

    fn solve_general(&mut self, agents: &[usize], verts: &[usize]) -> Result<(), MapfError> {
        let mut queue: VecDeque<usize> = self.priority(agents, verts).into();
        let mut rounds = 0usize;
        while let Some(a) = queue.pop_front() {
            rounds += 1;
            if rounds > 8 * agents.len() + 8 {
                log::debug!("push and rotate: finished agents keep getting displaced");
                return Err(MapfError::Infeasible);
            }
            let mut displaced = Vec::new();
            while self.pos[a] != self.goals[a] {
                if self.moves.len() > self.limit {
                    return Err(MapfError::Infeasible);
                }
                let here = self.pos[a];
                let path = match self.bfs(here, true, &[], Target::Vertex(self.goals[a])) {
                    Some(p) => p,
                    None => self
                        .bfs(here, false, &[], Target::Vertex(self.goals[a]))
                        .ok_or(MapfError::Infeasible)?,
                };
                let v = path[1];
                let b = self.occ[v];
                if b == NONE {
                    self.do_move(a, v);
                } else if self.fin[v] {
                    if !self.swap(a, b) {
                        return Err(MapfError::Infeasible);
                    }
                    self.fin[v] = false;
                    displaced.push(b);
                } else if self.push(v, true, &[here]) {
                    self.do_move(a, v);
                } else if !self.swap(a, b) {
                    log::debug!("push and rotate: agent {a} cannot pass agent {b}");
                    return Err(MapfError::Infeasible);
                }
            }
            self.fin[self.goals[a]] = true;
            for d in displaced.into_iter().rev() {
                queue.push_front(d);
            }
        }
        Ok(())
    }

    /// Agents on a simple cycle keep their cyclic order. Picks the cheaper
    /// rotation direction and advances agents one vertex at a time.
    fn solve_polygon(&mut self, agents: &[usize], verts: &[usize]) -> Result<(), MapfError> {
        let m = verts.len();
        if agents.len() == m {
            return Err(MapfError::Infeasible);
        }
        let mut cycle = Vec::with_capacity(m);
        let (mut prev, mut cur) = (NONE, verts[0]);
        for _ in 0..m {
            cycle.push(cur);
            let next = self
                .g
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&n| n != prev)
                .unwrap();
            prev = cur;
            cur = next;
        }
        let mut best: Option<(usize, bool, Vec<(usize, usize, usize)>)> = None;
        for forward in [true, false] {
            let idx = |v: usize| {
                let k = cycle.iter().position(|&c| c == v).unwrap();
                if forward {
                    k
                } else {
                    (m - k) % m
                }
            };
            let mut lifted: Vec<(usize, usize, usize)> = agents
                .iter()
                .map(|&a| (idx(self.pos[a]), idx(self.goals[a]), a))
                .collect();
            lifted.sort_unstable();
            // Smallest non-decreasing-in-order lift of the goals; the first
            // agent may need whole extra laps so the rest fit behind it.
            let raw: Vec<usize> = lifted.iter().map(|e| (e.1 + m - e.0) % m).collect();
            let mut fits = false;
            for lap in 0..=agents.len() {
                let mut last: Option<usize> = None;
                for (e, d) in lifted.iter_mut().zip(&raw) {
                    let mut t = e.0 + d + if last.is_none() { lap * m } else { 0 };
                    if let Some(l) = last {
                        while t <= l {
                            t += m;
                        }
                    }
                    e.1 = t;
                    last = Some(t);
                }
                if lifted.last().unwrap().1 < lifted[0].1 + m {
                    fits = true;
                    break;
                }
            }
            if !fits {
                continue;
            }
            let cost: usize = lifted.iter().map(|e| e.1 - e.0).sum();
            if best.as_ref().is_none_or(|b| cost < b.0) {
                best = Some((cost, forward, lifted));
            }
        }
        let Some((_, forward, mut lifted)) = best else {
            return Err(MapfError::Infeasible);
        };
        let vertex_at = |k: usize| {
            let k = k % m;
            if forward {
                cycle[k]
            } else {
                cycle[(m - k) % m]
            }
        };
        while lifted.iter().any(|e| e.0 < e.1) {
            let mut progressed = false;
            for e in lifted.iter_mut() {
                if e.0 < e.1 {
                    let next = vertex_at(e.0 + 1);
                    if self.occ[next] == NONE {
                        self.do_move(e.2, next);
                        e.0 += 1;
                        progressed = true;
                    }
                }
            }
            debug_assert!(progressed, "rotation stalled");
            if !progressed {
                return Err(MapfError::Infeasible);
            }
        }
        Ok(())
    }

    /// Breadth-first search over joint configurations, one move per edge.
    fn solve_exhaustive(&mut self, agents: &[usize]) -> Result<(), MapfError> {
        let start: Vec<usize> = agents.iter().map(|&a| self.pos[a]).collect();
        let goal: Vec<usize> = agents.iter().map(|&a| self.goals[a]).collect();
        let mut index = BTreeMap::new();
        let mut states = vec![start.clone()];
        let mut parent: Vec<(usize, usize, usize)> = vec![(NONE, 0, 0)];
        index.insert(start, 0usize);
        let mut head = 0;
        let mut occupied = vec![false; self.g.len()];
        let found = loop {
            if head == states.len() {
                return Err(MapfError::Infeasible);
            }
            if states[head] == goal {
                break head;
            }
            if states.len() > MAX_EXHAUSTIVE_STATES {
                log::debug!("exhaustive search gave up after {} states", states.len());
                return Err(MapfError::Infeasible);
            }
            let cur = states[head].clone();
            for &v in &cur {
                occupied[v] = true;
            }
            for k in 0..cur.len() {
                for &n in self.g.neighbors(cur[k]) {
                    if occupied[n] {
                        continue;
                    }
                    let mut next = cur.clone();
                    next[k] = n;
                    if !index.contains_key(&next) {
                        index.insert(next.clone(), states.len());
                        states.push(next);
                        parent.push((head, k, n));
                    }
                }
            }
            for &v in &cur {
                occupied[v] = false;
            }
            head += 1;
        };
        let mut steps = Vec::new();
        let mut s = found;
        while parent[s].0 != NONE {
            steps.push((parent[s].1, parent[s].2));
            s = parent[s].0;
        }
        for &(k, to) in steps.iter().rev() {
            self.do_move(agents[k], to);
        }
        Ok(())
    }
}

/// Articulation points of the alive subgraph.
fn cut_vertices(g: &Graph, alive: &[bool], verts: &[usize]) -> Vec<bool> {
    // Iterative Tarjan over the alive subgraph, which is connected.
    let n = g.len();
    let mut cut = vec![false; n];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let Some(&root) = verts.iter().find(|&&v| alive[v]) else {
        return cut;
    };
    let mut time = 0;
    let mut root_children = 0;
    // (vertex, parent, next neighbor index)
    let mut stack = vec![(root, usize::MAX, 0usize)];
    disc[root] = time;
    low[root] = time;
    while let Some(top) = stack.last_mut() {
        let (u, parent, k) = *top;
        let nbrs = g.neighbors(u);
        if k < nbrs.len() {
            top.2 += 1;
            let w = nbrs[k];
            if !alive[w] || w == parent {
                continue;
            }
            if disc[w] == usize::MAX {
                time += 1;
                disc[w] = time;
                low[w] = time;
                if u == root {
                    root_children += 1;
                }
                stack.push((w, u, 0));
            } else {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if parent != usize::MAX {
                low[parent] = low[parent].min(low[u]);
                if parent != root && low[u] >= disc[parent] {
                    cut[parent] = true;
                }
            }
        }
    }
    cut[root] = root_children > 1;
    cut
}
