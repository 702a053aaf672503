//! Instance transforms and the traces that map routes back through them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, Edge, EdgeId, Instance, Route, Step, Vertex};

/// Which transform produced a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    Clamp,
    ReduceToCycle,
    Unify,
    NormalizeSimpleUnit,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Clamp => "clamp",
            TransformKind::ReduceToCycle => "reduce_to_cycle",
            TransformKind::Unify => "unify",
            TransformKind::NormalizeSimpleUnit => "normalize_simple_unit",
        })
    }
}

/// Where an output edge of a stage came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOrigin {
    /// Piece `index` of chain `copy` (of `len` pieces) that replaces input edge `edge`.
    /// Chains run from the input edge's `u` to its `v`; `along` is true when the
    /// output edge's own `u -> v` orientation agrees with that direction.
    Piece { edge: EdgeId, copy: u32, index: u32, len: u32, along: bool },
    /// Edge with no counterpart in the input (added by the cycle reduction).
    Synthetic,
}

/// One applied transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub kind: TransformKind,
    /// Indexed by output edge id.
    pub edge_origin: Vec<EdgeOrigin>,
    /// Indexed by output vertex id; `None` for vertices created by the stage.
    pub vertex_origin: Vec<Option<Vertex>>,
    /// Factor by which this stage multiplies route weights.
    pub scale: u64,
    /// For the cycle reduction: the input `(s, t)`.
    pub terminals: Option<(Vertex, Vertex)>,
}

/// Ordered list of applied stages, first applied first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransformTrace {
    pub stages: Vec<Stage>,
}

impl TransformTrace {
    /// Trace with no stages.
    pub fn identity() -> Self {
        TransformTrace::default()
    }

    /// Composition: `self` first, then `next`.
    pub fn then(mut self, next: TransformTrace) -> Self {
        self.stages.extend(next.stages);
        self
    }

    /// Product of stage scales.
    pub fn scale(&self) -> u64 {
        self.stages.iter().map(|s| s.scale).product()
    }

    /// Stage kinds in application order.
    pub fn kinds(&self) -> Vec<TransformKind> {
        self.stages.iter().map(|s| s.kind).collect()
    }

    /// Short text such as `clamp>reduce_to_cycle>unify scale=2`.
    pub fn summary(&self) -> String {
        let names: Vec<String> = self.stages.iter().map(|s| s.kind.to_string()).collect();
        let names = if names.is_empty() { "identity".to_string() } else { names.join(">") };
        format!("{names} scale={}", self.scale())
    }

    /// Maps a transformed vertex back to the original, if it existed there.
    pub fn lift_vertex(&self, v: Vertex) -> Option<Vertex> {
        self.stages.iter().rev().try_fold(v, |x, st| st.vertex_origin.get(x).copied().flatten())
    }

    /// Maps a route on the transformed instance to one on the original instance.
    pub fn lift_route(&self, r: &Route) -> Result<Route> {
        self.stages.iter().rev().try_fold(r.clone(), |route, st| st.lift(&route))
    }
}

impl Stage {
    fn lift(&self, r: &Route) -> Result<Route> {
        match self.kind {
            TransformKind::ReduceToCycle => self.lift_reduction(r),
            _ => self.lift_pieces(r),
        }
    }

    fn origin_vertex(&self, v: Vertex) -> Result<Vertex> {
        self.vertex_origin
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| WrpError::InvalidRoute(format!("vertex {v} has no origin under {}", self.kind)))
    }

    fn lift_pieces(&self, r: &Route) -> Result<Route> {
        let start = self.origin_vertex(r.start)?;
        let mut steps = Vec::new();
        let mut open: Option<(EdgeId, u32, bool, u32, u32)> = None;
        for (i, step) in r.steps.iter().enumerate() {
            let origin = self.edge_origin.get(step.edge).ok_or(WrpError::UnknownEdge(step.edge))?;
            let EdgeOrigin::Piece { edge, copy, index, len, along } = *origin else {
                return Err(WrpError::InvalidRoute(format!("step {i} uses a synthetic edge")));
            };
            let fwd = step.forward == along;
            let pos = if fwd { index } else { len - 1 - index };
            match open {
                None if pos == 0 => open = Some((edge, copy, fwd, 1, len)),
                Some((e, c, f, next, l)) if e == edge && c == copy && f == fwd && next == pos => {
                    open = Some((e, c, f, next + 1, l))
                }
                _ => return Err(WrpError::InvalidRoute(format!("step {i} enters a chain of edge {edge} midway"))),
            }
            if let Some((e, _, f, done, l)) = open {
                if done == l {
                    steps.push(Step { edge: e, forward: f });
                    open = None;
                }
            }
        }
        if open.is_some() {
            return Err(WrpError::InvalidRoute("route stops inside a chain".into()));
        }
        Ok(Route { start, steps })
    }

    fn lift_reduction(&self, r: &Route) -> Result<Route> {
        let (s, t) = self.terminals.expect("reduction stage records terminals");
        let bad = |m: &str| WrpError::InvalidRoute(format!("cycle route {m}"));
        if r.steps.len() < 2 {
            return Err(bad("is too short to contain both synthetic edges"));
        }
        let first = r.steps[0];
        let last = r.steps[r.steps.len() - 1];
        let inner = &r.steps[1..r.steps.len() - 1];
        let synth = |e: EdgeId| matches!(self.edge_origin.get(e), Some(EdgeOrigin::Synthetic));
        if !synth(first.edge) || !synth(last.edge) || inner.iter().any(|s| synth(s.edge)) {
            return Err(bad("must use the synthetic edges exactly at its ends"));
        }
        // The synthetic edge created first joins the new vertex to s.
        let first_to_s = first.edge < last.edge;
        let steps: Vec<Step> =
            if first_to_s { inner.to_vec() } else { inner.iter().rev().map(|x| x.reversed()).collect() };
        debug_assert_ne!(s, t);
        Ok(Route { start: s, steps })
    }
}

fn identity_pieces(g: &CapacitatedGraph) -> Vec<EdgeOrigin> {
    (0..g.edge_count()).map(|e| EdgeOrigin::Piece { edge: e, copy: 0, index: 0, len: 1, along: true }).collect()
}

fn identity_vertices(n: usize) -> Vec<Option<Vertex>> {
    (0..n).map(Some).collect()
}

/// Replaces every capacity by `min(capacity, 2)`.
pub fn clamp_capacities(g: &CapacitatedGraph) -> (CapacitatedGraph, TransformTrace) {
    let mut out = g.clone();
    for e in g.edges() {
        out.set_edge(e.id, e.capacity.min(2), e.weight);
    }
    let stage = Stage {
        kind: TransformKind::Clamp,
        edge_origin: identity_pieces(g),
        vertex_origin: identity_vertices(g.vertex_count()),
        scale: 1,
        terminals: None,
    };
    (out, TransformTrace { stages: vec![stage] })
}

/// [`clamp_capacities`] lifted to instances.
pub fn clamp_instance(inst: &Instance) -> (Instance, TransformTrace) {
    let (graph, trace) = clamp_capacities(&inst.graph);
    (Instance { graph, ..inst.clone() }, trace)
}

/// Adds a vertex joined to `s` and `t` by edges of weight `unit`; it becomes both terminals
/// and the old terminals become waypoints. Identity with an empty trace when `s == t`.
pub fn reduce_to_cycle(inst: &Instance, unit: u64) -> (Instance, TransformTrace) {
    if inst.s == inst.t {
        return (inst.clone(), TransformTrace::identity());
    }
    let mut g = inst.graph.clone();
    let v = g.add_vertex();
    g.add_edge(v, inst.s, 1, unit).expect("fresh vertex differs from s");
    g.add_edge(v, inst.t, 1, unit).expect("fresh vertex differs from t");
    let mut edge_origin = identity_pieces(&inst.graph);
    edge_origin.extend([EdgeOrigin::Synthetic, EdgeOrigin::Synthetic]);
    let mut vertex_origin = identity_vertices(inst.n());
    vertex_origin.push(None);
    let mut waypoints = inst.waypoints.clone();
    waypoints.insert(inst.s);
    waypoints.insert(inst.t);
    let stage = Stage {
        kind: TransformKind::ReduceToCycle,
        edge_origin,
        vertex_origin,
        scale: 1,
        terminals: Some((inst.s, inst.t)),
    };
    (Instance { graph: g, s: v, t: v, waypoints }, TransformTrace { stages: vec![stage] })
}

/// Replaces every edge by `copies` chains of `len` pieces of weight `piece_weight`,
/// all with capacity 1. The first piece of the first chain keeps the edge id.
pub(crate) fn expand_chains(
    g: &CapacitatedGraph,
    kind: TransformKind,
    plan: impl Fn(&Edge) -> Result<(u32, u32, u64)>,
) -> Result<(CapacitatedGraph, TransformTrace)> {
    let mut out = g.clone();
    let mut edge_origin = identity_pieces(g);
    let mut vertex_origin = identity_vertices(g.vertex_count());
    for e in g.edges() {
        let (copies, len, w) = plan(e)?;
        for copy in 0..copies {
            let mut prev = e.u;
            for index in 0..len {
                let next = if index + 1 == len {
                    e.v
                } else {
                    vertex_origin.push(None);
                    out.add_vertex()
                };
                let origin = EdgeOrigin::Piece { edge: e.id, copy, index, len, along: true };
                if copy == 0 && index == 0 {
                    out.set_edge(e.id, 1, w);
                    if next != e.v {
                        out.reattach(e.id, e.v, next);
                    }
                    edge_origin[e.id] = origin;
                } else {
                    out.add_edge(prev, next, 1, w)?;
                    edge_origin.push(origin);
                }
                prev = next;
            }
        }
    }
    let stage = Stage { kind, edge_origin, vertex_origin, scale: 2, terminals: None };
    Ok((out, TransformTrace { stages: vec![stage] }))
}

/// Replaces each edge by `capacity` parallel two-piece paths, each piece weighing the
/// original weight (a global scale of 2). Requires capacities at most 2.
pub fn unify(g: &CapacitatedGraph) -> Result<(CapacitatedGraph, TransformTrace)> {
    expand_chains(g, TransformKind::Unify, |e| {
        if e.capacity > 2 {
            return Err(WrpError::Precondition(format!("edge {} has capacity {} > 2; clamp first", e.id, e.capacity)));
        }
        Ok((e.capacity, 2, e.weight))
    })
}

/// [`unify`] lifted to instances.
pub fn unify_instance(inst: &Instance) -> Result<(Instance, TransformTrace)> {
    let (graph, trace) = unify(&inst.graph)?;
    Ok((Instance { graph, ..inst.clone() }, trace))
}
