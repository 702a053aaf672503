//! Capacitated multigraphs, problem instances and routes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};

/// Dense vertex id.
pub type Vertex = usize;
/// Dense edge id; equal to the edge's index in [`CapacitatedGraph::edges`].
pub type EdgeId = usize;

/// One undirected edge record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: Vertex,
    pub v: Vertex,
    pub capacity: u32,
    pub weight: u64,
}

impl Edge {
    /// Endpoint opposite to `x`. `x` must be an endpoint.
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            debug_assert_eq!(x, self.v);
            self.u
        }
    }

    /// True if `x` is an endpoint.
    pub fn touches(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }
}

/// Undirected multigraph with per-edge capacity and weight.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CapacitatedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<EdgeId>>,
}

impl CapacitatedGraph {
    /// Graph with `n` vertices and no edges.
    pub fn new(n: usize) -> Self {
        CapacitatedGraph { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from `(u, v, capacity, weight)` tuples.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex, u32, u64)]) -> Result<Self> {
        let mut g = CapacitatedGraph::new(n);
        for &(u, v, c, w) in edges {
            g.add_edge(u, v, c, w)?;
        }
        Ok(g)
    }

    /// Appends a vertex and returns its id.
    pub fn add_vertex(&mut self) -> Vertex {
        self.n += 1;
        self.adj.push(Vec::new());
        self.n - 1
    }

    /// Appends an edge and returns its id.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex, capacity: u32, weight: u64) -> Result<EdgeId> {
        if u >= self.n {
            return Err(WrpError::UnknownVertex(u));
        }
        if v >= self.n {
            return Err(WrpError::UnknownVertex(v));
        }
        if u == v {
            return Err(WrpError::SelfLoop(u));
        }
        let id = self.edges.len();
        if capacity == 0 {
            return Err(WrpError::ZeroCapacity(id));
        }
        self.edges.push(Edge { id, u, v, capacity, weight });
        self.adj[u].push(id);
        self.adj[v].push(id);
        Ok(id)
    }

    /// Moves one endpoint of edge `e` from `old` to `new`.
    pub(crate) fn reattach(&mut self, e: EdgeId, old: Vertex, new: Vertex) {
        let edge = &mut self.edges[e];
        if edge.u == old {
            edge.u = new;
        } else {
            edge.v = new;
        }
        self.adj[old].retain(|&x| x != e);
        self.adj[new].push(e);
    }

    pub(crate) fn set_edge(&mut self, e: EdgeId, capacity: u32, weight: u64) {
        self.edges[e].capacity = capacity;
        self.edges[e].weight = weight;
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All edge records in id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge record by id.
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Incident edge ids of `v` in insertion order.
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.adj[v]
    }

    /// Number of incident edge records of `v`.
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// Distinct neighbours of `v`, sorted.
    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self.adj[v].iter().map(|&e| self.edges[e].other(v)).collect();
        set.into_iter().collect()
    }

    /// Largest edge weight, or 0 without edges.
    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).max().unwrap_or(0)
    }

    /// True if every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &e in &self.adj[x] {
                let y = self.edges[e].other(x);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }

    /// Simple adjacency sets, ignoring multiplicity.
    pub fn simple_adjacency(&self) -> Vec<BTreeSet<Vertex>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for e in &self.edges {
            adj[e.u].insert(e.v);
            adj[e.v].insert(e.u);
        }
        adj
    }
}

/// A waypoint routing instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub graph: CapacitatedGraph,
    pub s: Vertex,
    pub t: Vertex,
    /// Waypoints, never containing `s` or `t`.
    pub waypoints: BTreeSet<Vertex>,
}

impl Instance {
    /// Validates and builds an instance. Listing `s` or `t` as a waypoint is a no-op.
    pub fn new(
        graph: CapacitatedGraph,
        s: Vertex,
        t: Vertex,
        waypoints: impl IntoIterator<Item = Vertex>,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        for x in [s, t] {
            if x >= n {
                return Err(WrpError::UnknownVertex(x));
            }
        }
        let mut set = BTreeSet::new();
        for w in waypoints {
            if w >= n {
                return Err(WrpError::UnknownVertex(w));
            }
            if w != s && w != t {
                set.insert(w);
            }
        }
        if !graph.is_connected() {
            return Err(WrpError::Disconnected);
        }
        Ok(Instance { graph, s, t, waypoints: set })
    }

    /// Number of waypoints, excluding `s` and `t`.
    pub fn k(&self) -> usize {
        self.waypoints.len()
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    /// True if `v` must be visited (waypoint, `s` or `t`).
    pub fn is_required(&self, v: Vertex) -> bool {
        v == self.s || v == self.t || self.waypoints.contains(&v)
    }
}

/// One directed traversal of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: EdgeId,
    /// True when the edge is traversed from its `u` end to its `v` end.
    pub forward: bool,
}

impl Step {
    /// Tail vertex of the traversal.
    pub fn tail(&self, g: &CapacitatedGraph) -> Vertex {
        let e = g.edge(self.edge);
        if self.forward {
            e.u
        } else {
            e.v
        }
    }

    /// Head vertex of the traversal.
    pub fn head(&self, g: &CapacitatedGraph) -> Vertex {
        let e = g.edge(self.edge);
        if self.forward {
            e.v
        } else {
            e.u
        }
    }

    /// The step leaving `from` along `edge`.
    pub fn leaving(g: &CapacitatedGraph, edge: EdgeId, from: Vertex) -> Step {
        Step { edge, forward: g.edge(edge).u == from }
    }

    /// Same edge, opposite direction.
    pub fn reversed(self) -> Step {
        Step { edge: self.edge, forward: !self.forward }
    }
}

/// A walk given by its start vertex and a sequence of edge traversals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Route {
    pub start: Vertex,
    pub steps: Vec<Step>,
}

impl Route {
    /// Walk with no steps at `start`.
    pub fn empty(start: Vertex) -> Self {
        Route { start, steps: Vec::new() }
    }

    /// Builds a route by following edges from `start`, choosing directions automatically.
    pub fn from_edges(g: &CapacitatedGraph, start: Vertex, edges: &[EdgeId]) -> Result<Self> {
        let mut at = start;
        let mut steps = Vec::with_capacity(edges.len());
        for &e in edges {
            if e >= g.edge_count() {
                return Err(WrpError::UnknownEdge(e));
            }
            if !g.edge(e).touches(at) {
                return Err(WrpError::InvalidRoute(format!("edge {e} does not touch vertex {at}")));
            }
            let step = Step::leaving(g, e, at);
            at = step.head(g);
            steps.push(step);
        }
        Ok(Route { start, steps })
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// True for the zero-step walk.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Last vertex, assuming the walk is continuous.
    pub fn end(&self, g: &CapacitatedGraph) -> Vertex {
        self.steps.last().map_or(self.start, |s| s.head(g))
    }

    /// Vertices in visiting order, assuming the walk is continuous.
    pub fn vertices(&self, g: &CapacitatedGraph) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.start);
        out.extend(self.steps.iter().map(|s| s.head(g)));
        out
    }

    /// The same walk traversed backwards.
    pub fn reversed(&self, g: &CapacitatedGraph) -> Route {
        Route { start: self.end(g), steps: self.steps.iter().rev().map(|s| s.reversed()).collect() }
    }

    /// Sum of traversed edge weights.
    pub fn weight(&self, g: &CapacitatedGraph) -> u64 {
        self.steps.iter().map(|s| g.edge(s.edge).weight).sum()
    }
}

/// One failed route constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    UnknownEdge { step: usize, edge: EdgeId },
    WrongStart { expected: Vertex, found: Vertex },
    WrongEnd { expected: Vertex, found: Vertex },
    Discontinuous { step: usize, at: Vertex, tail: Vertex },
    CapacityExceeded { edge: EdgeId, uses: u32, capacity: u32 },
    WaypointUnvisited { waypoint: Vertex },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEdge { step, edge } => write!(f, "unknown edge {edge} at step {step}"),
            Violation::WrongStart { expected, found } => {
                write!(f, "route starts at {found}, expected {expected}")
            }
            Violation::WrongEnd { expected, found } => write!(f, "route ends at {found}, expected {expected}"),
            Violation::Discontinuous { step, at, tail } => {
                write!(f, "discontinuous at step {step}: walk is at {at}, step leaves {tail}")
            }
            Violation::CapacityExceeded { edge, uses, capacity } => {
                write!(f, "capacity exceeded on edge {edge}: {uses} uses, capacity {capacity}")
            }
            Violation::WaypointUnvisited { waypoint } => write!(f, "waypoint unvisited: {waypoint}"),
        }
    }
}

/// Outcome of [`validate_route`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RouteReport {
    pub violations: Vec<Violation>,
}

impl RouteReport {
    /// True when no constraint failed.
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks continuity, endpoints, capacities and waypoint coverage.
pub fn validate_route(inst: &Instance, r: &Route) -> RouteReport {
    let g = &inst.graph;
    let mut violations = Vec::new();
    if r.start != inst.s {
        violations.push(Violation::WrongStart { expected: inst.s, found: r.start });
    }
    let mut at = r.start;
    let mut uses: BTreeMap<EdgeId, u32> = BTreeMap::new();
    let mut visited = BTreeSet::from([r.start]);
    let mut broken = false;
    for (i, step) in r.steps.iter().enumerate() {
        if step.edge >= g.edge_count() {
            violations.push(Violation::UnknownEdge { step: i, edge: step.edge });
            broken = true;
            continue;
        }
        let tail = step.tail(g);
        if tail != at {
            violations.push(Violation::Discontinuous { step: i, at, tail });
        }
        *uses.entry(step.edge).or_default() += 1;
        at = step.head(g);
        visited.insert(tail);
        visited.insert(at);
    }
    if !broken && at != inst.t {
        violations.push(Violation::WrongEnd { expected: inst.t, found: at });
    }
    for (&e, &n) in &uses {
        let cap = g.edge(e).capacity;
        if n > cap {
            violations.push(Violation::CapacityExceeded { edge: e, uses: n, capacity: cap });
        }
    }
    for &w in &inst.waypoints {
        if !visited.contains(&w) {
            violations.push(Violation::WaypointUnvisited { waypoint: w });
        }
    }
    RouteReport { violations }
}

/// Total weight of a valid route.
pub fn route_cost(inst: &Instance, r: &Route) -> Result<u64> {
    let report = validate_route(inst, r);
    if let Some(v) = report.violations.first() {
        return Err(WrpError::InvalidRoute(v.to_string()));
    }
    Ok(r.weight(&inst.graph))
}
