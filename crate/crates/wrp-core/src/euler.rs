//! Eulerian circuits and the separation of an Eulerian walk along a vertex separator.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, EdgeId, Route, Step, Vertex};

/// Closed walk from `start` using every edge in `edges` exactly once.
///
/// Returns `None` when the edges do not form a connected even-degree multigraph
/// containing `start`. An empty edge list yields the empty walk. Always leaves a
/// vertex by its lowest-id unused edge, so the output is deterministic.
pub fn euler_circuit(g: &CapacitatedGraph, edges: &[EdgeId], start: Vertex) -> Option<Route> {
    if edges.is_empty() {
        return Some(Route::empty(start));
    }
    let mut inc: BTreeMap<Vertex, BTreeSet<EdgeId>> = BTreeMap::new();
    for &e in edges {
        let ed = g.edge(e);
        inc.entry(ed.u).or_default().insert(e);
        inc.entry(ed.v).or_default().insert(e);
    }
    if edges.iter().collect::<BTreeSet<_>>().len() != edges.len() || inc.values().any(|s| s.len() % 2 == 1) {
        return None;
    }
    if !inc.contains_key(&start) {
        return None;
    }
    // Hierholzer with an explicit stack of (vertex, step that reached it).
    let mut stack: Vec<(Vertex, Option<Step>)> = vec![(start, None)];
    let mut out: Vec<Step> = Vec::with_capacity(edges.len());
    while let Some(&(v, via)) = stack.last() {
        let next = inc.get(&v).and_then(|s| s.iter().next().copied());
        match next {
            Some(e) => {
                let step = Step::leaving(g, e, v);
                let w = step.head(g);
                inc.get_mut(&v).unwrap().remove(&e);
                inc.get_mut(&w).unwrap().remove(&e);
                stack.push((w, Some(step)));
            }
            None => {
                stack.pop();
                if let Some(step) = via {
                    out.push(step);
                }
            }
        }
    }
    if out.len() != edges.len() {
        return None;
    }
    out.reverse();
    Some(Route { start, steps: out })
}

/// Side of an `(A, B)` separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A walk confined to one side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideWalk {
    pub side: Side,
    pub walk: Route,
}

/// Output of [`eulerian_separate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub walks: Vec<SideWalk>,
    /// Concatenating `walks` in this order gives one Eulerian circuit.
    pub order: Vec<usize>,
}

type Transitions = BTreeMap<(Vertex, EdgeId), EdgeId>;

fn trail_ids(g: &CapacitatedGraph, edges: &[EdgeId], partner: &Transitions) -> BTreeMap<EdgeId, usize> {
    let mut id: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut next = 0;
    for &e0 in edges {
        if id.contains_key(&e0) {
            continue;
        }
        let mut e = e0;
        let mut at = g.edge(e0).v;
        loop {
            id.insert(e, next);
            let f = partner[&(at, e)];
            at = g.edge(f).other(at);
            e = f;
            if e == e0 {
                break;
            }
        }
        next += 1;
    }
    id
}

/// Splits the edge set of a connected even-degree graph into side-confined walks with
/// endpoints in `separator`, at most `2 * |separator|` of them, whose concatenation is
/// one Eulerian circuit.
///
/// `a_side` lists the non-separator vertices of side `A`; every other non-separator
/// vertex is on side `B`. Edges inside the separator are assigned to `A`.
pub fn eulerian_separate(
    g: &CapacitatedGraph,
    separator: &BTreeSet<Vertex>,
    a_side: &BTreeSet<Vertex>,
) -> Result<Separation> {
    let edges: Vec<EdgeId> = (0..g.edge_count()).collect();
    if edges.is_empty() {
        return Ok(Separation { walks: vec![], order: vec![] });
    }
    if !g.is_connected() {
        return Err(WrpError::Precondition("graph is disconnected".into()));
    }
    if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(WrpError::Precondition(format!("vertex {v} has odd degree")));
    }
    if let Some(v) = a_side.intersection(separator).next() {
        return Err(WrpError::Precondition(format!("vertex {v} is both in A and in the separator")));
    }
    let side_of_vertex = |v: Vertex| {
        if separator.contains(&v) {
            None
        } else if a_side.contains(&v) {
            Some(Side::A)
        } else {
            Some(Side::B)
        }
    };
    let mut side = vec![Side::A; g.edge_count()];
    for e in g.edges() {
        side[e.id] = match (side_of_vertex(e.u), side_of_vertex(e.v)) {
            (None, None) => Side::A,
            (Some(x), None) | (None, Some(x)) => x,
            (Some(x), Some(y)) if x == y => x,
            _ => return Err(WrpError::Precondition(format!("edge {} crosses the separator", e.id))),
        };
    }
    if !separator.iter().any(|&v| v < g.vertex_count() && g.degree(v) > 0) {
        return Err(WrpError::Precondition("separator touches no edge".into()));
    }

    // Pair edge ends at every vertex, same side first; at most one mixed pair per vertex.
    let mut partner: Transitions = BTreeMap::new();
    for v in 0..g.vertex_count() {
        let (mut a, mut b): (Vec<EdgeId>, Vec<EdgeId>) = g.incident(v).iter().partition(|&&e| side[e] == Side::A);
        let mut pairs = Vec::new();
        if a.len() % 2 == 1 {
            pairs.push((a.pop().unwrap(), b.pop().unwrap()));
        }
        pairs.extend(a.chunks(2).map(|c| (c[0], c[1])));
        pairs.extend(b.chunks(2).map(|c| (c[0], c[1])));
        for (x, y) in pairs {
            partner.insert((v, x), y);
            partner.insert((v, y), x);
        }
    }

    // Merge closed trails by re-pairing transitions at shared vertices.
    loop {
        let ids = trail_ids(g, &edges, &partner);
        let trails = ids.values().copied().max().unwrap_or(0) + 1;
        if trails == 1 {
            break;
        }
        let mixed = |x: EdgeId, y: EdgeId| usize::from(side[x] != side[y]);
        type Pairing = (EdgeId, EdgeId);
        let mut best: Option<(usize, Vertex, Pairing, Pairing)> = None;
        'scan: for v in 0..g.vertex_count() {
            let here: Vec<(EdgeId, EdgeId)> =
                g.incident(v).iter().map(|&e| (e, partner[&(v, e)])).filter(|(x, y)| x < y).collect();
            for (i, &(e1, e2)) in here.iter().enumerate() {
                for &(e3, e4) in &here[i + 1..] {
                    if ids[&e1] == ids[&e3] {
                        continue;
                    }
                    let before = mixed(e1, e2) + mixed(e3, e4);
                    for (p, q) in [((e1, e3), (e2, e4)), ((e1, e4), (e2, e3))] {
                        let delta = (mixed(p.0, p.1) + mixed(q.0, q.1)).saturating_sub(before);
                        if best.is_none_or(|b| delta < b.0) {
                            best = Some((delta, v, p, q));
                        }
                        if delta == 0 {
                            break 'scan;
                        }
                    }
                }
            }
        }
        let (_, v, p, q) = best.expect("connected graph has a shared vertex between trails");
        for (x, y) in [p, q] {
            partner.insert((v, x), y);
            partner.insert((v, y), x);
        }
    }

    // Walk the single circuit starting right after a side switch, if there is one.
    let switch = (0..g.vertex_count())
        .find_map(|v| g.incident(v).iter().find(|&&e| side[e] != side[partner[&(v, e)]]).map(|&e| (v, e)));
    let (start, first) = match switch {
        Some(x) => x,
        None => {
            let v = *separator.iter().find(|&&v| v < g.vertex_count() && g.degree(v) > 0).unwrap();
            (v, g.incident(v)[0])
        }
    };
    let mut steps = Vec::with_capacity(edges.len());
    let mut e = first;
    let mut at = start;
    loop {
        let step = Step::leaving(g, e, at);
        steps.push(step);
        at = step.head(g);
        e = partner[&(at, e)];
        if e == first && at == start {
            break;
        }
    }
    let mut walks: Vec<SideWalk> = Vec::new();
    let mut cur_start = start;
    let mut cur: Vec<Step> = Vec::new();
    for step in steps {
        if let Some(&last) = cur.last() {
            if side[last.edge] != side[step.edge] {
                let walk = Route { start: cur_start, steps: std::mem::take(&mut cur) };
                cur_start = walk.end(g);
                walks.push(SideWalk { side: side[last.edge], walk });
            }
        }
        cur.push(step);
    }
    let last_side = side[cur[0].edge];
    walks.push(SideWalk { side: last_side, walk: Route { start: cur_start, steps: cur } });
    let order = (0..walks.len()).collect();
    Ok(Separation { walks, order })
}
