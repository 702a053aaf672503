//! Signature tables: the per-node view of valid sub-solutions.
//!
//! A signature of a bag is a multiset of walk endpoint pairs inside the bag plus the
//! set of bag edges used, or the distinguished `EMPTY` signature. The table of a node
//! maps every valid signature to a minimum-weight set of edge-disjoint walks in the
//! subtree graph realizing it. Tables are derived from the DP profiles in
//! [`crate::dp`]: every profile's segments are grouped into walks in all possible
//! ways and padded with trivial walks at bag vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dp::{DpRun, Partial, Profile, ProfileTable};
use crate::error::{Result, WrpError};
use crate::euler::euler_circuit;
use crate::graph::{CapacitatedGraph, EdgeId, Route, Step, Vertex};

/// Canonical signature. `EMPTY` has no pairs and no edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature {
    /// Pairs `(s, r)` with `s <= r`, sorted.
    pub pairs: Vec<(Vertex, Vertex)>,
    /// Used bag edges, sorted.
    pub edges: Vec<EdgeId>,
}

impl Signature {
    pub const EMPTY: Signature = Signature { pairs: Vec::new(), edges: Vec::new() };

    /// Builds a canonical signature.
    pub fn new(pairs: impl IntoIterator<Item = (Vertex, Vertex)>, edges: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        Signature { pairs, edges }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.edges.is_empty()
    }

    /// Number of walks.
    pub fn ell(&self) -> usize {
        self.pairs.len()
    }

    /// Number of distinct endpoint vertices.
    pub fn beta(&self) -> usize {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().len()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "EMPTY");
        }
        let pairs: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let edges: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        write!(f, "{}|{}", pairs.join(","), edges.join(","))
    }
}

/// Minimum-weight walk set realizing a signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSolution {
    pub weight: u64,
    /// One walk per pair of the signature, in pair order. `EMPTY` holds zero or one walk.
    pub walks: Vec<Route>,
}

/// Valid signatures of one node.
pub type SignatureTable = BTreeMap<Signature, SubSolution>;

/// Every canonical signature over `bag`: `EMPTY` plus each non-empty pair multiset with
/// `ell <= beta` combined with each subset of the edges of `G[bag]`.
///
/// Fails with [`WrpError::WidthLimit`] when `bag` has more than `limit` vertices.
pub fn enumerate_signatures(g: &CapacitatedGraph, bag: &[Vertex], limit: usize) -> Result<Vec<Signature>> {
    if bag.len() > limit {
        return Err(WrpError::WidthLimit { width: bag.len().saturating_sub(1), cap: limit.saturating_sub(1) });
    }
    let mut bag: Vec<Vertex> = bag.to_vec();
    bag.sort_unstable();
    bag.dedup();
    let inner = bag_edges(g, &bag);
    let mut candidates = Vec::new();
    for a in 0..bag.len() {
        for b in a..bag.len() {
            candidates.push((bag[a], bag[b]));
        }
    }
    let mut multisets = Vec::new();
    pair_multisets(&candidates, 0, bag.len(), &mut Vec::new(), &mut multisets);
    let mut out = vec![Signature::EMPTY];
    for pairs in multisets.into_iter().filter(|p| !p.is_empty()) {
        let sig = Signature::new(pairs, []);
        if sig.ell() > sig.beta() {
            continue;
        }
        for mask in 0u64..(1u64 << inner.len()) {
            let edges = (0..inner.len()).filter(|i| mask >> i & 1 == 1).map(|i| inner[i]);
            out.push(Signature::new(sig.pairs.iter().copied(), edges));
        }
    }
    out.sort();
    Ok(out)
}

fn pair_multisets(
    cands: &[(Vertex, Vertex)],
    from: usize,
    left: usize,
    cur: &mut Vec<(Vertex, Vertex)>,
    out: &mut Vec<Vec<(Vertex, Vertex)>>,
) {
    out.push(cur.clone());
    if left == 0 {
        return;
    }
    for i in from..cands.len() {
        cur.push(cands[i]);
        pair_multisets(cands, i, left - 1, cur, out);
        cur.pop();
    }
}

/// Edges of `G[bag]`, sorted.
pub fn bag_edges(g: &CapacitatedGraph, bag: &[Vertex]) -> Vec<EdgeId> {
    let set: BTreeSet<Vertex> = bag.iter().copied().collect();
    g.edges().iter().filter(|e| set.contains(&e.u) && set.contains(&e.v)).map(|e| e.id).collect()
}

/// Context for deriving the table of one node.
#[derive(Debug, Clone)]
pub struct NodeView<'a> {
    pub graph: &'a CapacitatedGraph,
    pub bag: &'a [Vertex],
    /// Waypoints (including the terminal) in the subtree graph.
    pub subtree_required: BTreeSet<Vertex>,
}

/// Derives the signature table of a node from its profile table.
pub fn derive_table(view: &NodeView<'_>, profiles: &ProfileTable) -> SignatureTable {
    let g = view.graph;
    let mut table = SignatureTable::new();
    let mut keys: BTreeMap<Signature, (u64, Vec<EdgeId>)> = BTreeMap::new();
    let mut put = |sig: Signature, key: (u64, Vec<EdgeId>), sol: &dyn Fn() -> SubSolution| {
        if keys.get(&sig).is_none_or(|cur| key < *cur) {
            table.insert(sig.clone(), canonical_solution(g, sol()));
            keys.insert(sig, key);
        }
    };
    let bag_required: Vec<Vertex> = view.bag.iter().copied().filter(|v| view.subtree_required.contains(v)).collect();
    let forgotten: Vec<Vertex> = view.subtree_required.iter().copied().filter(|v| !view.bag.contains(v)).collect();
    if view.subtree_required.is_empty() {
        put(Signature::EMPTY, (0, vec![]), &|| SubSolution { weight: 0, walks: vec![] });
    } else if bag_required.is_empty() && forgotten.len() == 1 {
        put(Signature::EMPTY, (0, vec![]), &|| SubSolution { weight: 0, walks: vec![Route::empty(forgotten[0])] });
    }
    let mut cache = SplitCache::new();
    for (p, val) in profiles {
        let mut edges: Vec<EdgeId> = val.edges.iter().chain(&p.bag_edges).copied().collect();
        edges.sort_unstable();
        let key = (val.weight, edges);
        if p.done {
            if bag_required.is_empty() && !val.edges.is_empty() {
                put(Signature::EMPTY, key, &|| {
                    let start = g.edge(val.edges[0]).u;
                    let w = euler_circuit(g, &val.edges, start).expect("closed state is Eulerian");
                    SubSolution { weight: val.weight, walks: vec![w] }
                });
            }
            continue;
        }
        let segs = segments(g, p, val);
        let ends: Vec<(Vertex, Vertex)> = segs.iter().map(|w| (w.start, w.end(g))).collect();
        let covered: BTreeSet<Vertex> = segs.iter().flat_map(|w| w.vertices(g)).collect();
        let splits = cache.entry(ends.clone()).or_insert_with(|| split_segments(&ends));
        for (pairs, trails) in splits.iter() {
            for padded in pad_trivial(view.bag, &bag_required, pairs, &covered) {
                let sig = Signature::new(padded.iter().copied(), p.bag_edges.iter().copied());
                put(sig, key.clone(), &|| {
                    let mut walks: Vec<Route> = trails.iter().map(|t| chain(g, &segs, &ends, t)).collect();
                    walks.extend(padded[pairs.len()..].iter().map(|&(v, _)| Route::empty(v)));
                    SubSolution { weight: val.weight, walks }
                });
            }
        }
    }
    table
}

/// Orients each walk from its smaller endpoint and sorts walks into pair order.
fn canonical_solution(g: &CapacitatedGraph, sol: SubSolution) -> SubSolution {
    let mut walks: Vec<((Vertex, Vertex), Route)> = sol
        .walks
        .into_iter()
        .map(|w| {
            let (a, b) = (w.start, w.end(g));
            if a <= b {
                ((a, b), w)
            } else {
                ((b, a), w.reversed(g))
            }
        })
        .collect();
    walks.sort();
    SubSolution { weight: sol.weight, walks: walks.into_iter().map(|(_, w)| w).collect() }
}

/// A trail over segments: segment indices, each flagged when traversed backwards.
type Trail = Vec<(usize, bool)>;
/// Pair multisets reachable by splitting a segment set into trails, one representative each.
type Splits = BTreeMap<Vec<(Vertex, Vertex)>, Vec<Trail>>;
/// Split results keyed by the segment endpoint list.
type SplitCache = BTreeMap<Vec<(Vertex, Vertex)>, Splits>;

/// The profile's excursion walks followed by its bag edges as one-edge walks. Every
/// segment runs between bag vertices, so a walk of a signature is a trail over segments
/// and a closed one can be anchored at any of its joints.
fn segments(g: &CapacitatedGraph, p: &Profile, val: &Partial) -> Vec<Route> {
    let mut segs: Vec<Route> = val.walks.clone();
    for &e in &p.bag_edges {
        let ed = g.edge(e);
        segs.push(Route { start: ed.u, steps: vec![Step::leaving(g, e, ed.u)] });
    }
    segs
}

fn chain(g: &CapacitatedGraph, segs: &[Route], ends: &[(Vertex, Vertex)], t: &Trail) -> Route {
    let (i, rev) = t[0];
    let mut r = Route::empty(if rev { ends[i].1 } else { ends[i].0 });
    for &(i, rev) in t {
        if rev {
            r.steps.extend(segs[i].reversed(g).steps);
        } else {
            r.steps.extend(segs[i].steps.iter().copied());
        }
    }
    r
}

/// An oriented partial trail: first vertex, last vertex and its segments.
#[derive(Clone)]
struct Fragment {
    from: Vertex,
    to: Vertex,
    trail: Trail,
}

impl Fragment {
    fn flip(mut self) -> Fragment {
        self.trail.reverse();
        for s in &mut self.trail {
            s.1 = !s.1;
        }
        Fragment { from: self.to, to: self.from, trail: self.trail }
    }

    /// Oriented so that it ends at `v`, which must be one of its ends.
    fn ending_at(self, v: Vertex) -> Fragment {
        if self.to == v {
            self
        } else {
            self.flip()
        }
    }
}

/// Adds segments one at a time, each starting a fragment, extending one, or joining two.
/// States with equal fragment endpoints have equal futures, so one is kept per multiset.
fn split_segments(ends: &[(Vertex, Vertex)]) -> Splits {
    let key = |fs: &[Fragment]| {
        let mut k: Vec<(Vertex, Vertex)> = fs.iter().map(|f| (f.from.min(f.to), f.from.max(f.to))).collect();
        k.sort_unstable();
        k
    };
    let mut states: BTreeMap<Vec<(Vertex, Vertex)>, Vec<Fragment>> = BTreeMap::from([(vec![], vec![])]);
    for (i, &(a, b)) in ends.iter().enumerate() {
        let mut next = BTreeMap::new();
        let mut put = |fs: Vec<Fragment>| {
            next.entry(key(&fs)).or_insert(fs);
        };
        for fs in states.values() {
            let mut fresh = fs.clone();
            fresh.push(Fragment { from: a, to: b, trail: vec![(i, false)] });
            put(fresh);
            for j in 0..fs.len() {
                for (x, y, rev) in [(a, b, false), (b, a, true)] {
                    if fs[j].from != x && fs[j].to != x {
                        continue;
                    }
                    let mut rest = fs.clone();
                    let mut f = rest.swap_remove(j).ending_at(x);
                    f.trail.push((i, rev));
                    f.to = y;
                    let mut ext = rest.clone();
                    ext.push(f.clone());
                    put(ext);
                    for k in 0..rest.len() {
                        if rest[k].from != y && rest[k].to != y {
                            continue;
                        }
                        let mut joined = rest.clone();
                        let h = joined.swap_remove(k).ending_at(y).flip();
                        let mut f = f.clone();
                        f.trail.extend(h.trail);
                        f.to = h.to;
                        joined.push(f);
                        put(joined);
                    }
                }
            }
        }
        states = next;
    }
    states.into_iter().map(|(k, fs)| (k, fs.into_iter().map(|f| f.trail).collect())).collect()
}

/// Adds trivial pairs `(v, v)` at bag vertices so every bag waypoint is covered and
/// `ell <= beta`. The added pairs follow the given ones.
fn pad_trivial(
    bag: &[Vertex],
    bag_required: &[Vertex],
    pairs: &[(Vertex, Vertex)],
    covered: &BTreeSet<Vertex>,
) -> Vec<Vec<(Vertex, Vertex)>> {
    let endpoints: BTreeSet<Vertex> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let slack = endpoints.len() as i64 - pairs.len() as i64;
    let mut out = Vec::new();
    let mut counts = vec![0usize; bag.len()];
    pad_rec(bag, bag_required, &endpoints, covered, 0, slack, &mut counts, pairs, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn pad_rec(
    bag: &[Vertex],
    req: &[Vertex],
    endpoints: &BTreeSet<Vertex>,
    covered: &BTreeSet<Vertex>,
    i: usize,
    slack: i64,
    counts: &mut Vec<usize>,
    pairs: &[(Vertex, Vertex)],
    out: &mut Vec<Vec<(Vertex, Vertex)>>,
) {
    if i == bag.len() {
        if slack < 0 {
            return;
        }
        let total = pairs.len() + counts.iter().sum::<usize>();
        if total == 0 {
            return;
        }
        let all_covered =
            req.iter().all(|v| covered.contains(v) || counts[bag.iter().position(|b| b == v).unwrap()] > 0);
        if all_covered {
            let mut p = pairs.to_vec();
            for (k, &c) in counts.iter().enumerate() {
                p.extend(std::iter::repeat_n((bag[k], bag[k]), c));
            }
            out.push(p);
        }
        return;
    }
    let v = bag[i];
    let fresh = !endpoints.contains(&v);
    // One trivial walk at a fresh vertex is free; every other one costs one unit of slack.
    let max = if fresh { slack.max(0) as usize + 1 } else { slack.max(0) as usize };
    for c in 0..=max {
        let cost = if c == 0 {
            0
        } else if fresh {
            c as i64 - 1
        } else {
            c as i64
        };
        counts[i] = c;
        pad_rec(bag, req, endpoints, covered, i + 1, slack - cost, counts, pairs, out);
    }
    counts[i] = 0;
}

/// Derives every node's signature table from a run with kept tables.
pub fn derive_all(run: &DpRun) -> Result<Vec<SignatureTable>> {
    if run.tables.len() != run.prepared.nice.nodes.len() {
        return Err(WrpError::Precondition("DP run did not keep its node tables".into()));
    }
    let p = &run.prepared;
    Ok(p.nice
        .nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            let view = NodeView {
                graph: &p.instance.graph,
                bag: &node.bag,
                subtree_required: run.seen[id].iter().copied().filter(|&v| p.required[v]).collect(),
            };
            derive_table(&view, &run.tables[id])
        })
        .collect())
}

/// Text dump: a `node <id>` header per node followed by `sig <pairs>|<edges> w=<weight>` lines.
pub fn format_tables(tables: &[SignatureTable]) -> String {
    let mut out = String::new();
    for (id, t) in tables.iter().enumerate() {
        out.push_str(&format!("node {id} entries={}\n", t.len()));
        for (sig, sol) in t {
            out.push_str(&format!("sig {sig} w={}\n", sol.weight));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{run_dp, DpConfig};
    use crate::graph::Instance;

    fn g(n: usize, edges: &[(usize, usize)]) -> CapacitatedGraph {
        let list: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1, 1)).collect();
        CapacitatedGraph::from_edges(n, &list).unwrap()
    }

    #[test]
    fn single_vertex_bag_has_two_signatures() {
        let sigs = enumerate_signatures(&g(1, &[]), &[0], 8).unwrap();
        assert_eq!(sigs, vec![Signature::EMPTY, Signature::new([(0, 0)], [])]);
    }

    #[test]
    fn empty_bag_has_only_empty() {
        assert_eq!(enumerate_signatures(&g(1, &[]), &[], 8).unwrap(), vec![Signature::EMPTY]);
    }

    #[test]
    fn width_limit() {
        assert!(matches!(enumerate_signatures(&g(3, &[]), &[0, 1, 2], 2), Err(WrpError::WidthLimit { .. })));
    }

    #[test]
    fn display_format() {
        assert_eq!(Signature::new([(2, 2), (1, 0)], [7, 5]).to_string(), "0-1,2-2|5,7");
        assert_eq!(Signature::EMPTY.to_string(), "EMPTY");
    }

    #[test]
    fn leaf_tables_follow_waypoint_status() {
        let graph = CapacitatedGraph::from_edges(3, &[(0, 1, 1, 1), (1, 2, 1, 1), (2, 0, 1, 1)]).unwrap();
        let inst = Instance::new(graph, 0, 0, [1]).unwrap();
        let run = run_dp(&inst, &DpConfig { keep_tables: true, ..Default::default() }).unwrap();
        let tables = derive_all(&run).unwrap();
        for (id, node) in run.prepared.nice.nodes.iter().enumerate() {
            if node.children.is_empty() {
                let v = node.bag[0];
                let expect = if run.prepared.required[v] { 1 } else { 2 };
                assert_eq!(tables[id].len(), expect, "leaf {id} on {v}");
                assert!(tables[id].values().all(|s| s.weight == 0));
            }
        }
        assert!(!format_tables(&tables).is_empty());
    }
}
