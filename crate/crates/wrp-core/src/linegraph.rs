//! Reduction to a shortest cycle through required vertices in the waypoint line graph.
//!
//! The instance is normalized to a simple graph with unit weights and capacities. Each
//! vertex `v` of degree `d` becomes a hub plus `d` ports (one per incident edge); the hub
//! is joined to every port directly and every two ports are joined through a rim vertex.
//! Each edge becomes a 3-edge path between its two ports. A route of cost `l` maps to a
//! vertex-disjoint path of length `5 l` between the terminal hubs and back.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, EdgeId, Instance, Route, Step, Vertex};
use crate::solution::{Solution, SolveOutcome};
use crate::transform::{expand_chains, reduce_to_cycle, TransformKind, TransformTrace};

/// Default cap on the number of waypoints for [`solve_via_kcycle`].
pub const DEFAULT_MAX_K: usize = 6;
/// Default cap on search nodes for [`ExhaustiveBackend`].
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

/// Splits every edge into `min(capacity, 2)` parallel chains of `2 * weight` unit edges.
///
/// The output is simple with unit weights and capacities; route costs double. Rejects
/// zero-weight edges.
pub fn normalize_simple_unit(g: &CapacitatedGraph) -> Result<(CapacitatedGraph, TransformTrace)> {
    expand_chains(g, TransformKind::NormalizeSimpleUnit, |e| {
        if e.weight == 0 {
            return Err(WrpError::ZeroWeight(e.id));
        }
        let len =
            u32::try_from(2 * e.weight).map_err(|_| WrpError::Precondition(format!("edge {} is too heavy", e.id)))?;
        Ok((e.capacity.min(2), len, 1))
    })
}

/// [`normalize_simple_unit`] lifted to instances.
pub fn normalize_instance(inst: &Instance) -> Result<(Instance, TransformTrace)> {
    let (graph, trace) = normalize_simple_unit(&inst.graph)?;
    Ok((Instance { graph, ..inst.clone() }, trace))
}

/// Role of a line-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    Hub(Vertex),
    Port {
        vertex: Vertex,
        edge: EdgeId,
    },
    /// Inner vertex `index` (0 next to the port at the edge's `u`) of an edge path.
    EdgeInner {
        edge: EdgeId,
        index: u8,
    },
    /// Subdivides the link between the ports of `a < b` at `vertex`.
    Rim {
        vertex: Vertex,
        a: EdgeId,
        b: EdgeId,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Provenance::Hub(v) => write!(f, "hub:{v}"),
            Provenance::Port { vertex, edge } => write!(f, "port:{vertex}:{edge}"),
            Provenance::EdgeInner { edge, index } => write!(f, "edge:{edge}:{index}"),
            Provenance::Rim { vertex, a, b } => write!(f, "rim:{vertex}:{a}:{b}"),
        }
    }
}

/// Waypoint line graph of a normalized instance.
#[derive(Debug, Clone)]
pub struct WaypointLineGraph {
    pub graph: CapacitatedGraph,
    /// Indexed by line-graph vertex.
    pub provenance: Vec<Provenance>,
    pub hub: Vec<Vertex>,
    port: BTreeMap<(Vertex, EdgeId), Vertex>,
    rim: BTreeMap<(Vertex, EdgeId, EdgeId), Vertex>,
    inner: Vec<[Vertex; 2]>,
    /// Hubs of the terminals and waypoints.
    pub s_hub: Vertex,
    pub t_hub: Vertex,
    pub waypoint_hubs: BTreeSet<Vertex>,
}

/// Builds the line graph of a normalized instance.
pub fn build_waypoint_line_graph(inst: &Instance) -> Result<WaypointLineGraph> {
    let g = &inst.graph;
    let mut seen = BTreeSet::new();
    for e in g.edges() {
        if e.capacity != 1 || e.weight != 1 || !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(WrpError::Precondition("line graph needs a simple unit graph; normalize first".into()));
        }
    }
    let mut lg = CapacitatedGraph::new(0);
    let mut provenance = Vec::new();
    let mut add = |lg: &mut CapacitatedGraph, p: Provenance| {
        provenance.push(p);
        lg.add_vertex()
    };
    let mut hub = Vec::with_capacity(g.vertex_count());
    let mut port = BTreeMap::new();
    for v in 0..g.vertex_count() {
        hub.push(add(&mut lg, Provenance::Hub(v)));
        for &e in g.incident(v) {
            port.insert((v, e), add(&mut lg, Provenance::Port { vertex: v, edge: e }));
        }
    }
    let mut rim = BTreeMap::new();
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        for &e in inc {
            lg.add_edge(hub[v], port[&(v, e)], 1, 1)?;
        }
        for (i, &a) in inc.iter().enumerate() {
            for &b in &inc[i + 1..] {
                let (a, b) = (a.min(b), a.max(b));
                let r = add(&mut lg, Provenance::Rim { vertex: v, a, b });
                lg.add_edge(port[&(v, a)], r, 1, 1)?;
                lg.add_edge(r, port[&(v, b)], 1, 1)?;
                rim.insert((v, a, b), r);
            }
        }
    }
    let mut inner = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let x = add(&mut lg, Provenance::EdgeInner { edge: e.id, index: 0 });
        let y = add(&mut lg, Provenance::EdgeInner { edge: e.id, index: 1 });
        lg.add_edge(port[&(e.u, e.id)], x, 1, 1)?;
        lg.add_edge(x, y, 1, 1)?;
        lg.add_edge(y, port[&(e.v, e.id)], 1, 1)?;
        inner.push([x, y]);
    }
    Ok(WaypointLineGraph {
        graph: lg,
        provenance,
        s_hub: hub[inst.s],
        t_hub: hub[inst.t],
        waypoint_hubs: inst.waypoints.iter().map(|&w| hub[w]).collect(),
        hub,
        port,
        rim,
        inner,
    })
}

impl WaypointLineGraph {
    fn rim_of(&self, v: Vertex, a: EdgeId, b: EdgeId) -> Option<Vertex> {
        self.rim.get(&(v, a.min(b), a.max(b))).copied()
    }

    /// Hubs that a qualifying path must contain.
    pub fn required_hubs(&self) -> BTreeSet<Vertex> {
        let mut r = self.waypoint_hubs.clone();
        r.insert(self.s_hub);
        r.insert(self.t_hub);
        r
    }

    /// Text dump: the graph lines followed by one `prov <vid> <tag>` line per vertex.
    pub fn dump(&self) -> String {
        let mut out = crate::io::format_graph(&self.graph);
        for (v, p) in self.provenance.iter().enumerate() {
            out.push_str(&format!("prov {v} {p}\n"));
        }
        out
    }

    /// Maps a valid route on the normalized instance to a vertex-disjoint path from the
    /// `s` hub to the `t` hub of length `5 * cost`. When `s == t` the path is closed;
    /// the empty route maps to the empty path.
    pub fn map_route_to_path(&self, inst: &Instance, r: &Route) -> Result<Vec<Vertex>> {
        let g = &inst.graph;
        if r.is_empty() {
            return if inst.s == inst.t {
                Ok(vec![])
            } else {
                Err(WrpError::InvalidRoute("empty route with s != t".into()))
            };
        }
        let verts = r.vertices(g);
        let mut hub_used = BTreeSet::from([inst.s, inst.t]);
        let mut path = vec![self.hub[inst.s]];
        for (i, step) in r.steps.iter().enumerate() {
            let (a, b) = (verts[i], verts[i + 1]);
            let [x, y] = self.inner[step.edge];
            path.push(self.port[&(a, step.edge)]);
            path.extend(if step.forward { [x, y] } else { [y, x] });
            path.push(self.port[&(b, step.edge)]);
            if let Some(next) = r.steps.get(i + 1) {
                if inst.waypoints.contains(&b) && hub_used.insert(b) {
                    path.push(self.hub[b]);
                } else {
                    let rim = self
                        .rim_of(b, step.edge, next.edge)
                        .ok_or_else(|| WrpError::InvalidRoute(format!("step {} reuses edge {}", i + 1, step.edge)))?;
                    path.push(rim);
                }
            }
        }
        path.push(self.hub[inst.t]);
        Ok(path)
    }

    /// Maps a qualifying path back to a route on the normalized instance.
    pub fn map_path_to_route(&self, inst: &Instance, path: &[Vertex]) -> Result<Route> {
        let bad = |m: String| WrpError::MalformedPath(m);
        if path.is_empty() {
            return if inst.s == inst.t && inst.waypoints.is_empty() {
                Ok(Route::empty(inst.s))
            } else {
                Err(bad("empty path".into()))
            };
        }
        if path[0] != self.s_hub || path[path.len() - 1] != self.t_hub {
            return Err(bad("path must run from the s hub to the t hub".into()));
        }
        let body = if self.s_hub == self.t_hub { &path[..path.len() - 1] } else { path };
        if body.iter().collect::<BTreeSet<_>>().len() != body.len() {
            return Err(bad("path repeats a vertex".into()));
        }
        let adj = self.graph.simple_adjacency();
        if let Some(i) = (1..path.len()).find(|&i| path.get(i).is_none_or(|&x| !adj[path[i - 1]].contains(&x))) {
            return Err(bad(format!("no link between positions {} and {i}", i - 1)));
        }
        if let Some(w) = self.waypoint_hubs.iter().find(|h| !path.contains(h)) {
            return Err(bad(format!("waypoint hub {w} not on path")));
        }
        let mut steps = Vec::new();
        let mut i = 1;
        loop {
            let Some(Provenance::Port { vertex: a, edge }) = self.provenance.get(path[i]).copied() else {
                return Err(bad(format!("expected a port at position {i}")));
            };
            let ed = inst.graph.edge(edge);
            let b = ed.other(a);
            let [x, y] = self.inner[edge];
            let forward = ed.u == a && a != b;
            let expect = if forward { [x, y, self.port[&(b, edge)]] } else { [y, x, self.port[&(b, edge)]] };
            if path.get(i + 1..i + 4) != Some(&expect[..]) {
                return Err(bad(format!("edge path of {edge} broken at position {i}")));
            }
            steps.push(Step { edge, forward });
            i += 4;
            match self.provenance.get(path[i]).copied() {
                Some(Provenance::Hub(v)) if v == b && i + 1 == path.len() => break,
                Some(Provenance::Hub(v)) | Some(Provenance::Rim { vertex: v, .. }) if v == b => i += 1,
                _ => return Err(bad(format!("position {i} does not stay at vertex {b}"))),
            }
            if i >= path.len() {
                return Err(bad("path ends inside a vertex gadget".into()));
            }
        }
        Ok(Route { start: inst.s, steps })
    }

    /// Copy of the graph without the links of hubs in `drop`; traversing a dropped hub
    /// can always be replaced by the rim between the same two ports.
    fn without_hubs(&self, drop: &BTreeSet<Vertex>) -> CapacitatedGraph {
        let mut out = CapacitatedGraph::new(self.graph.vertex_count());
        for e in self.graph.edges() {
            if !drop.contains(&e.u) && !drop.contains(&e.v) {
                out.add_edge(e.u, e.v, 1, 1).expect("copied edge is valid");
            }
        }
        out
    }
}

/// Whether a backend guarantees shortest cycles or only finds some cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendMode {
    Shortest,
    FeasibilityOnly,
}

/// Finds a cycle through all required vertices of a unit-weight graph.
pub trait CycleBackend {
    fn name(&self) -> &'static str;

    fn mode(&self) -> BackendMode {
        BackendMode::Shortest
    }

    /// Closed vertex sequence starting and ending at `required[0]`, or `None` if no
    /// simple cycle through every required vertex exists. `counters` receives search
    /// statistics.
    fn find_cycle(
        &self,
        g: &CapacitatedGraph,
        required: &[Vertex],
        counters: &mut BTreeMap<String, u64>,
    ) -> Result<Option<Vec<Vertex>>>;
}

/// Branch-and-bound over simple cycles after contracting the graph.
///
/// Non-required vertices of degree at most 1 are deleted and non-required vertices of
/// degree 2 contracted; of parallel chains only the shortest is searched. Neighbours are
/// expanded in increasing id order and a branch is cut once the cost so far plus the
/// largest `d(cur, q) + d(q, root)` over unvisited required `q` reaches the best cycle.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveBackend {
    pub node_budget: u64,
}

impl Default for ExhaustiveBackend {
    fn default() -> Self {
        ExhaustiveBackend { node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Debug, Clone)]
struct Chain {
    a: Vertex,
    b: Vertex,
    len: u64,
    /// Full vertex sequence from `a` to `b`.
    path: Vec<Vertex>,
}

#[derive(Debug, Default)]
struct Reduced {
    chains: BTreeMap<usize, Chain>,
    adj: BTreeMap<Vertex, BTreeSet<usize>>,
    next: usize,
}

impl Reduced {
    fn insert(&mut self, c: Chain) {
        if c.a == c.b {
            return;
        }
        let id = self.next;
        self.next += 1;
        self.adj.entry(c.a).or_default().insert(id);
        self.adj.entry(c.b).or_default().insert(id);
        self.chains.insert(id, c);
    }

    fn remove(&mut self, id: usize) -> Chain {
        let c = self.chains.remove(&id).expect("chain exists");
        for x in [c.a, c.b] {
            if let Some(s) = self.adj.get_mut(&x) {
                s.remove(&id);
            }
        }
        c
    }

    fn far(&self, id: usize, from: Vertex) -> (Vertex, Vec<Vertex>) {
        let c = &self.chains[&id];
        if c.a == from {
            (c.b, c.path.clone())
        } else {
            (c.a, c.path.iter().rev().copied().collect())
        }
    }
}

impl CycleBackend for ExhaustiveBackend {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn find_cycle(
        &self,
        g: &CapacitatedGraph,
        required: &[Vertex],
        counters: &mut BTreeMap<String, u64>,
    ) -> Result<Option<Vec<Vertex>>> {
        let Some(&root) = required.first() else {
            return Err(WrpError::Precondition("cycle search needs a root vertex".into()));
        };
        let req: BTreeSet<Vertex> = required.iter().copied().collect();
        let mut r = Reduced::default();
        for v in 0..g.vertex_count() {
            r.adj.insert(v, BTreeSet::new());
        }
        for e in g.edges() {
            r.insert(Chain { a: e.u, b: e.v, len: e.weight, path: vec![e.u, e.v] });
        }
        // Candidate cycles made of two parallel chains, found while deduplicating.
        let mut best: Option<(u64, Vec<Vertex>)> = None;
        loop {
            let mut changed = false;
            let verts: Vec<Vertex> = r.adj.keys().copied().collect();
            for v in verts {
                if req.contains(&v) {
                    continue;
                }
                let deg = r.adj[&v].len();
                if deg <= 1 {
                    for id in r.adj[&v].clone() {
                        r.remove(id);
                    }
                    r.adj.remove(&v);
                    changed = true;
                } else if deg == 2 {
                    let ids: Vec<usize> = r.adj[&v].iter().copied().collect();
                    let (a, pa) = r.far(ids[0], v);
                    let (b, pb) = r.far(ids[1], v);
                    let len = r.chains[&ids[0]].len + r.chains[&ids[1]].len;
                    r.remove(ids[0]);
                    r.remove(ids[1]);
                    r.adj.remove(&v);
                    let mut path: Vec<Vertex> = pa.into_iter().rev().collect();
                    path.extend_from_slice(&pb[1..]);
                    r.insert(Chain { a, b, len, path });
                    changed = true;
                }
            }
            let mut by_pair: BTreeMap<(Vertex, Vertex), Vec<usize>> = BTreeMap::new();
            for (&id, c) in &r.chains {
                by_pair.entry((c.a.min(c.b), c.a.max(c.b))).or_default().push(id);
            }
            for ((a, b), mut ids) in by_pair {
                if ids.len() < 2 {
                    continue;
                }
                ids.sort_by_key(|id| (r.chains[id].len, *id));
                if req.iter().all(|&q| q == a || q == b) {
                    let (c1, c2) = (&r.chains[&ids[0]], &r.chains[&ids[1]]);
                    let len = c1.len + c2.len;
                    if best.as_ref().is_none_or(|(l, _)| len < *l) {
                        let (_, p1) = r.far(ids[0], root);
                        let (_, p2) = r.far(ids[1], root);
                        let mut cyc = p1;
                        cyc.extend(p2.into_iter().rev().skip(1));
                        best = Some((len, cyc));
                    }
                }
                for &id in &ids[1..] {
                    r.remove(id);
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
        counters.insert("reduced_vertices".into(), r.adj.len() as u64);
        counters.insert("reduced_edges".into(), r.chains.len() as u64);
        if !r.adj.contains_key(&root) {
            counters.insert("search_nodes".into(), 0);
            return Ok(best.map(|(_, c)| c));
        }

        // Distances from every required vertex in the reduced graph.
        let mut dist: BTreeMap<Vertex, BTreeMap<Vertex, u64>> = BTreeMap::new();
        for &q in &req {
            let mut d: BTreeMap<Vertex, u64> = BTreeMap::new();
            let mut heap = BinaryHeap::from([Reverse((0u64, q))]);
            while let Some(Reverse((dq, x))) = heap.pop() {
                if d.contains_key(&x) {
                    continue;
                }
                d.insert(x, dq);
                for &id in r.adj.get(&x).into_iter().flatten() {
                    let (y, _) = r.far(id, x);
                    if !d.contains_key(&y) {
                        heap.push(Reverse((dq + r.chains[&id].len, y)));
                    }
                }
            }
            dist.insert(q, d);
        }
        if req.iter().any(|q| !dist[&root].contains_key(q)) {
            counters.insert("search_nodes".into(), 0);
            return Ok(best.map(|(_, c)| c));
        }
        let mut adj: BTreeMap<Vertex, Vec<(Vertex, usize)>> = BTreeMap::new();
        for (&v, ids) in &r.adj {
            let mut list: Vec<(Vertex, usize)> = ids.iter().map(|&id| (r.far(id, v).0, id)).collect();
            list.sort();
            adj.insert(v, list);
        }
        let mut search = Search {
            r: &r,
            adj: &adj,
            dist: &dist,
            req: &req,
            root,
            pos: BTreeMap::from([(root, 0)]),
            prefix: vec![0],
            last_req: 0,
            path: Vec::new(),
            best,
            nodes: 0,
            budget: self.node_budget,
        };
        search.dfs(root, 0, 1)?;
        counters.insert("search_nodes".into(), search.nodes);
        Ok(search.best.map(|(_, c)| c))
    }
}

struct Search<'a> {
    r: &'a Reduced,
    adj: &'a BTreeMap<Vertex, Vec<(Vertex, usize)>>,
    dist: &'a BTreeMap<Vertex, BTreeMap<Vertex, u64>>,
    req: &'a BTreeSet<Vertex>,
    root: Vertex,
    /// Position of each vertex on the current path.
    pos: BTreeMap<Vertex, usize>,
    /// Cost of the path up to each position.
    prefix: Vec<u64>,
    /// Position of the last required vertex on the path.
    last_req: usize,
    /// Chains taken so far.
    path: Vec<usize>,
    best: Option<(u64, Vec<Vertex>)>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn bound(&self, cur: Vertex) -> u64 {
        let to_root = |q: Vertex| self.dist[&q].get(&cur).copied().unwrap_or(u64::MAX / 4);
        let open = self.req.iter().filter(|q| !self.pos.contains_key(q));
        open.map(|&q| to_root(q) + self.dist[&q].get(&self.root).copied().unwrap_or(u64::MAX / 4))
            .max()
            .unwrap_or_else(|| to_root(self.root))
    }

    fn dfs(&mut self, cur: Vertex, cost: u64, seen_req: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(WrpError::Budget { what: "cycle search node", limit: self.budget as usize });
        }
        if let Some((b, _)) = &self.best {
            if cost + self.bound(cur) >= *b {
                return Ok(());
            }
        }
        for &(next, id) in &self.adj[&cur] {
            let len = self.r.chains[&id].len;
            if next == self.root {
                let closes = seen_req == self.req.len() && self.path.first() != Some(&id);
                if closes && self.best.as_ref().is_none_or(|(b, _)| cost + len < *b) {
                    self.path.push(id);
                    let cycle = self.expand();
                    self.path.pop();
                    self.best = Some((cost + len, cycle));
                }
                continue;
            }
            if self.pos.contains_key(&next) || self.shortcut(next, cost + len) {
                continue;
            }
            let at = self.prefix.len();
            let saved = self.last_req;
            if self.req.contains(&next) {
                self.last_req = at;
            }
            self.pos.insert(next, at);
            self.prefix.push(cost + len);
            self.path.push(id);
            let add = usize::from(self.req.contains(&next));
            self.dfs(next, cost + len, seen_req + add)?;
            self.path.pop();
            self.prefix.pop();
            self.pos.remove(&next);
            self.last_req = saved;
        }
        Ok(())
    }

    /// True when `next` has a cheaper chord back to a path vertex with no required
    /// vertex in between; the shortcut path then dominates every completion.
    fn shortcut(&self, next: Vertex, cost: u64) -> bool {
        let cur_pos = self.prefix.len() - 1;
        self.adj[&next].iter().any(|&(y, id)| match self.pos.get(&y) {
            Some(&p) if p >= self.last_req && p < cur_pos => self.r.chains[&id].len < cost - self.prefix[p],
            _ => false,
        })
    }

    fn expand(&self) -> Vec<Vertex> {
        let mut out = vec![self.root];
        let mut at = self.root;
        for &id in &self.path {
            let (next, p) = self.r.far(id, at);
            out.extend_from_slice(&p[1..]);
            at = next;
        }
        out
    }
}

/// Optimal route via the line-graph reduction, or `None` when infeasible.
///
/// Fails with [`WrpError::TooManyWaypoints`] when the instance has more than `max_k`
/// waypoints.
pub fn solve_via_kcycle(inst: &Instance, backend: &dyn CycleBackend, max_k: usize) -> Result<SolveOutcome> {
    if inst.k() > max_k {
        return Err(WrpError::TooManyWaypoints { k: inst.k(), limit: max_k });
    }
    let mut out = SolveOutcome::default();
    out.counters.insert("k".into(), inst.k() as u64);
    if inst.s == inst.t && inst.waypoints.is_empty() {
        out.solution = Some(Solution { route: Route::empty(inst.s), cost: 0 });
        return Ok(out);
    }
    let (cyc, t1) = reduce_to_cycle(inst, 1);
    let (norm, t2) = normalize_instance(&cyc)?;
    let trace = t1.then(t2);
    out.trace = trace.summary();
    let lg = build_waypoint_line_graph(&norm)?;
    out.counters.insert("lr_vertices".into(), lg.graph.vertex_count() as u64);
    out.counters.insert("lr_edges".into(), lg.graph.edge_count() as u64);
    let required: Vec<Vertex> = std::iter::once(lg.s_hub).chain(lg.waypoint_hubs.iter().copied()).collect();
    let drop: BTreeSet<Vertex> = (0..norm.n()).filter(|&v| !norm.is_required(v)).map(|v| lg.hub[v]).collect();
    let search_graph = lg.without_hubs(&drop);
    let Some(cycle) = backend.find_cycle(&search_graph, &required, &mut out.counters)? else {
        return Ok(out);
    };
    let route = lg.map_path_to_route(&norm, &cycle)?;
    let lifted = trace.lift_route(&route)?;
    let cost = lifted.weight(&inst.graph);
    debug_assert_eq!((cycle.len() as u64 - 1) % 5, 0);
    out.counters.insert("cycle_length".into(), cycle.len() as u64 - 1);
    out.solution = Some(Solution { route: lifted, cost });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_route;
    use crate::oracle::brute_force_solve;

    fn inst(n: usize, edges: &[(usize, usize, u32, u64)], s: usize, t: usize, w: &[usize]) -> Instance {
        Instance::new(CapacitatedGraph::from_edges(n, edges).unwrap(), s, t, w.iter().copied()).unwrap()
    }

    #[test]
    fn normalize_capacity_two_edge() {
        let g = CapacitatedGraph::from_edges(2, &[(0, 1, 2, 1)]).unwrap();
        let (n, _) = normalize_simple_unit(&g).unwrap();
        assert_eq!(n.edge_count(), 4);
        assert_eq!(n.vertex_count(), 4);
    }

    #[test]
    fn normalize_weight_three() {
        let g = CapacitatedGraph::from_edges(2, &[(0, 1, 1, 3)]).unwrap();
        let (n, tr) = normalize_simple_unit(&g).unwrap();
        assert_eq!(n.edge_count(), 6);
        assert_eq!(tr.scale(), 2);
        assert!(n.edges().iter().all(|e| e.weight == 1 && e.capacity == 1));
    }

    #[test]
    fn normalize_rejects_zero_weight() {
        let g = CapacitatedGraph::from_edges(2, &[(0, 1, 1, 0)]).unwrap();
        assert_eq!(normalize_simple_unit(&g).unwrap_err(), WrpError::ZeroWeight(0));
    }

    #[test]
    fn single_edge_line_graph() {
        let i = inst(2, &[(0, 1, 1, 1)], 0, 1, &[]);
        let lg = build_waypoint_line_graph(&i).unwrap();
        assert_eq!(lg.graph.vertex_count(), 6);
        assert_eq!(lg.graph.edge_count(), 5);
        let r = Route { start: 0, steps: vec![Step { edge: 0, forward: true }] };
        let p = lg.map_route_to_path(&i, &r).unwrap();
        assert_eq!(p.len() - 1, 5);
        assert_eq!(lg.map_path_to_route(&i, &p).unwrap(), r);
    }

    #[test]
    fn degree_three_waypoint_gadget() {
        let i = inst(4, &[(0, 1, 1, 1), (0, 2, 1, 1), (0, 3, 1, 1)], 1, 2, &[0]);
        let lg = build_waypoint_line_graph(&i).unwrap();
        let rims = lg.provenance.iter().filter(|p| matches!(p, Provenance::Rim { vertex: 0, .. })).count();
        assert_eq!(rims, 3);
        assert_eq!(lg.graph.degree(lg.hub[0]), 3);
    }

    #[test]
    fn malformed_path_is_rejected() {
        let i = inst(2, &[(0, 1, 1, 1)], 0, 1, &[]);
        let lg = build_waypoint_line_graph(&i).unwrap();
        let mut p =
            lg.map_route_to_path(&i, &Route { start: 0, steps: vec![Step { edge: 0, forward: true }] }).unwrap();
        p.swap(2, 3);
        assert!(matches!(lg.map_path_to_route(&i, &p), Err(WrpError::MalformedPath(_))));
    }

    #[test]
    fn agrees_with_oracle_on_small_cases() {
        let cases = [
            inst(3, &[(0, 1, 1, 1), (1, 2, 1, 1), (2, 0, 1, 1)], 0, 0, &[1]),
            inst(3, &[(0, 1, 2, 3), (1, 2, 1, 1)], 1, 2, &[0]),
            inst(3, &[(0, 1, 1, 3), (1, 2, 1, 1)], 1, 2, &[0]),
            inst(4, &[(0, 1, 1, 1), (1, 2, 2, 2), (2, 3, 1, 1), (3, 0, 1, 4), (0, 2, 1, 1)], 0, 2, &[1, 3]),
        ];
        for i in &cases {
            let lg = solve_via_kcycle(i, &ExhaustiveBackend::default(), DEFAULT_MAX_K).unwrap();
            let or = brute_force_solve(i, 1_000_000).unwrap();
            assert_eq!(lg.cost(), or.cost());
            if let Some(sol) = lg.solution {
                assert!(validate_route(i, &sol.route).is_ok());
            }
        }
    }

    #[test]
    fn too_many_waypoints() {
        let i = inst(4, &[(0, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1)], 0, 0, &[1, 2, 3]);
        assert!(matches!(
            solve_via_kcycle(&i, &ExhaustiveBackend::default(), 2),
            Err(WrpError::TooManyWaypoints { .. })
        ));
    }
}
