//! Canonical instances, seeded random generators and hardness gadgets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, Instance, Vertex};
use crate::io::Coords;

/// Generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Fig1Left,
    Fig1Right,
    PartialKtree,
    GridDeg3Tail,
    Bipartite3RegTrees,
    HamEncode,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Fig1Left,
        Family::Fig1Right,
        Family::PartialKtree,
        Family::GridDeg3Tail,
        Family::Bipartite3RegTrees,
        Family::HamEncode,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Fig1Left => "fig1-left",
            Family::Fig1Right => "fig1-right",
            Family::PartialKtree => "partial-ktree",
            Family::GridDeg3Tail => "grid-deg3-tail",
            Family::Bipartite3RegTrees => "bipartite-3reg-trees",
            Family::HamEncode => "ham-encode",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = WrpError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| WrpError::Precondition(format!("unknown family '{s}'")))
    }
}

/// Everything a generator needs; unused fields are ignored by a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Vertex count for `partial-ktree`.
    pub n: usize,
    /// Tree width bound for `partial-ktree`.
    pub k: usize,
    /// Maximum number of waypoints for random families.
    pub waypoints: usize,
    /// Probability of keeping each droppable edge of the k-tree.
    pub keep: f64,
    /// Optional cap on the number of edges of `partial-ktree`.
    pub max_edges: Option<usize>,
    /// Size exponent for `grid-deg3-tail` and `bipartite-3reg-trees`.
    pub r: u32,
    /// Base graph for `ham-encode`, `grid-deg3-tail` and `bipartite-3reg-trees`:
    /// `cycle:<n>`, `path:<n>`, `grid:<w>x<h>` or `cube`.
    pub base: String,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family) -> Self {
        let base = match family {
            Family::GridDeg3Tail => "grid:3x2",
            Family::Bipartite3RegTrees => "cube",
            _ => "cycle:6",
        };
        GeneratorSpec { family, n: 8, k: 2, waypoints: 3, keep: 0.7, max_edges: None, r: 1, base: base.into(), seed: 0 }
    }
}

/// Generator output.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    /// Planar coordinates, for the grid family.
    pub coords: Option<Coords>,
    /// Vertices allowed to have degree 2 in the gadget family.
    pub degree_two: Option<BTreeSet<Vertex>>,
}

impl Generated {
    fn plain(instance: Instance) -> Self {
        Generated { instance, coords: None, degree_two: None }
    }
}

/// Runs the generator described by `spec`; equal specs give equal output.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.family {
        Family::Fig1Left => Ok(Generated::plain(canonical("fig1-left")?)),
        Family::Fig1Right => Ok(Generated::plain(canonical("fig1-right")?)),
        Family::PartialKtree => Ok(Generated::plain(gen_partial_ktree(spec, &mut rng)?)),
        Family::HamEncode => {
            let (g, coords) = base_graph(&spec.base)?;
            Ok(Generated { instance: ham_encode(&g)?, coords, degree_two: None })
        }
        Family::GridDeg3Tail => {
            let (g, coords) = base_graph(&spec.base)?;
            let coords = coords.ok_or_else(|| WrpError::Precondition("grid tail needs a grid base".into()))?;
            let base = random_grid_instance(g, spec.waypoints, &mut rng)?;
            let (instance, coords) = gen_grid_tail(&base, &coords, spec.r)?;
            Ok(Generated { instance, coords: Some(coords), degree_two: None })
        }
        Family::Bipartite3RegTrees => {
            let (g, _) = base_graph(&spec.base)?;
            let base = ham_encode(&g)?;
            let mut edges: Vec<usize> = (0..g.edge_count()).collect();
            edges.shuffle(&mut rng);
            let (instance, degree_two) = gen_bipartite_trees_gadget(&base, edges[0], spec.r)?;
            Ok(Generated { instance, coords: None, degree_two: Some(degree_two) })
        }
    }
}

/// The two instances drawn in the introduction's figure.
///
/// `fig1-left`: two rows `0-1-2-3-4` and `5-6-7` with rungs, `s = 0`, `t = 4`,
/// waypoints `2` and `6`, one capacity-2 edge `2-3`. `fig1-right`: `s = 0`, `t = 1` and
/// three waypoints each joined to both terminals.
pub fn canonical(name: &str) -> Result<Instance> {
    match name {
        "fig1-left" => {
            let edges = [
                (0, 1, 1, 1),
                (1, 2, 1, 1),
                (2, 3, 2, 1),
                (3, 4, 1, 1),
                (0, 5, 1, 1),
                (5, 6, 1, 1),
                (6, 7, 1, 1),
                (7, 4, 1, 1),
                (1, 5, 1, 1),
                (3, 7, 1, 1),
            ];
            Instance::new(CapacitatedGraph::from_edges(8, &edges)?, 0, 4, [2, 6])
        }
        "fig1-right" => {
            let edges = [(0, 2, 1, 1), (2, 1, 1, 1), (0, 3, 1, 1), (3, 1, 1, 1), (0, 4, 1, 1), (4, 1, 1, 1)];
            Instance::new(CapacitatedGraph::from_edges(5, &edges)?, 0, 1, [2, 3, 4])
        }
        _ => Err(WrpError::Precondition(format!("unknown canonical instance '{name}'"))),
    }
}

/// Random partial k-tree: a random k-tree with edges dropped while it stays connected.
fn gen_partial_ktree(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let (n, k) = (spec.n, spec.k);
    if k == 0 || k > 4 || n < k + 1 {
        return Err(WrpError::Precondition(format!("partial-ktree needs 1 <= k <= 4 and n >= k + 1, got n={n} k={k}")));
    }
    let mut edges: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    for a in 0..=k {
        for b in a + 1..=k {
            edges.insert((a, b));
        }
    }
    let mut cliques: Vec<Vec<Vertex>> = (0..=k).map(|skip| (0..=k).filter(|&x| x != skip).collect()).collect();
    for v in k + 1..n {
        let base = cliques[rng.gen_range(0..cliques.len())].clone();
        for &x in &base {
            edges.insert((x, v));
        }
        for skip in 0..base.len() {
            let mut c: Vec<Vertex> = base.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
            c.push(v);
            cliques.push(c);
        }
    }
    let mut order: Vec<(Vertex, Vertex)> = edges.iter().copied().collect();
    order.shuffle(rng);
    for e in order {
        let over = spec.max_edges.is_some_and(|m| edges.len() > m);
        if (over || !rng.gen_bool(spec.keep.clamp(0.0, 1.0))) && connected_without(n, &edges, e) {
            edges.remove(&e);
        }
    }
    let mut g = CapacitatedGraph::new(n);
    for &(u, v) in &edges {
        g.add_edge(u, v, rng.gen_range(1..=2), rng.gen_range(1..=4))?;
    }
    let s = rng.gen_range(0..n);
    let t = rng.gen_range(0..n);
    let mut rest: Vec<Vertex> = (0..n).filter(|&v| v != s && v != t).collect();
    rest.shuffle(rng);
    let count = rng.gen_range(0..=spec.waypoints.min(rest.len()));
    Instance::new(g, s, t, rest.into_iter().take(count))
}

fn connected_without(n: usize, edges: &BTreeSet<(Vertex, Vertex)>, skip: (Vertex, Vertex)) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges.iter().filter(|&&e| e != skip) {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// Unit graph named by `cycle:<n>`, `path:<n>`, `grid:<w>x<h>` or `cube`. Grids are brick
/// walls (maximum degree 3) and come with coordinates.
pub fn base_graph(spec: &str) -> Result<(CapacitatedGraph, Option<Coords>)> {
    let bad = || WrpError::Precondition(format!("bad base graph '{spec}'"));
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let unit = |n: usize, edges: &[(Vertex, Vertex)]| {
        let list: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1, 1)).collect();
        CapacitatedGraph::from_edges(n, &list)
    };
    match kind {
        "cycle" | "path" => {
            let n: usize = arg.parse().map_err(|_| bad())?;
            let min = if kind == "cycle" { 3 } else { 2 };
            if n < min {
                return Err(bad());
            }
            let mut edges: Vec<(Vertex, Vertex)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if kind == "cycle" {
                edges.push((n - 1, 0));
            }
            Ok((unit(n, &edges)?, None))
        }
        "grid" => {
            let (w, h) = arg.split_once('x').ok_or_else(bad)?;
            let (w, h): (usize, usize) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
            if w < 2 || h < 1 {
                return Err(bad());
            }
            let id = |x: usize, y: usize| y * w + x;
            let mut edges = Vec::new();
            let mut coords = Coords::new();
            for y in 0..h {
                for x in 0..w {
                    coords.insert(id(x, y), (x as i64, y as i64));
                    if x + 1 < w {
                        edges.push((id(x, y), id(x + 1, y)));
                    }
                    if y + 1 < h && (x + y) % 2 == 0 {
                        edges.push((id(x, y), id(x, y + 1)));
                    }
                }
            }
            Ok((unit(w * h, &edges)?, Some(coords)))
        }
        "cube" => {
            let mut edges = Vec::new();
            for a in 0..8usize {
                for bit in [1, 2, 4] {
                    if a & bit == 0 {
                        edges.push((a, a | bit));
                    }
                }
            }
            Ok((unit(8, &edges)?, None))
        }
        _ => Err(bad()),
    }
}

/// Hamiltonian cycle as WRP: unit capacities, `s = t = 0`, every other vertex a waypoint.
pub fn ham_encode(g: &CapacitatedGraph) -> Result<Instance> {
    let mut out = CapacitatedGraph::new(g.vertex_count());
    for e in g.edges() {
        out.add_edge(e.u, e.v, 1, e.weight)?;
    }
    Instance::new(out, 0, 0, 1..g.vertex_count())
}

fn random_grid_instance(g: CapacitatedGraph, waypoints: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let n = g.vertex_count();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let (s, t) = (order[0], order[1 % n]);
    let count = waypoints.min(n.saturating_sub(2));
    Instance::new(g, s, t, order.into_iter().skip(2).take(count))
}

/// Appends a waypoint-free path of `n^r` vertices going left from the bottom-left vertex.
pub fn gen_grid_tail(base: &Instance, coords: &Coords, r: u32) -> Result<(Instance, Coords)> {
    let g = &base.graph;
    if (0..g.vertex_count()).any(|v| g.degree(v) > 3) {
        return Err(WrpError::Precondition("grid tail needs maximum degree 3".into()));
    }
    let anchor = coords
        .iter()
        .min_by_key(|(&v, &(x, y))| (x, y, v))
        .map(|(&v, _)| v)
        .ok_or_else(|| WrpError::Precondition("grid tail needs coordinates".into()))?;
    if g.degree(anchor) > 2 {
        return Err(WrpError::Precondition(format!("anchor {anchor} already has degree 3")));
    }
    let len = g
        .vertex_count()
        .checked_pow(r)
        .filter(|&l| l <= 1 << 20)
        .ok_or_else(|| WrpError::Precondition("tail too long".into()))?;
    let mut out = g.clone();
    let mut coords = coords.clone();
    let (ax, ay) = coords[&anchor];
    let mut prev = anchor;
    for i in 1..=len {
        let v = out.add_vertex();
        out.add_edge(prev, v, 1, 1)?;
        coords.insert(v, (ax - i as i64, ay));
        prev = v;
    }
    let inst = Instance::new(out, base.s, base.t, base.waypoints.iter().copied())?;
    Ok((inst, coords))
}

/// Replaces edge `edge = (u, w)` by the path `u - v - v' - w` and attaches the two-tree
/// gadget with `2^(r-1)` leaves per tree. Returns the instance and the vertices whose
/// degree stays 2.
///
/// The base must be bipartite with maximum degree 3.
pub fn gen_bipartite_trees_gadget(base: &Instance, edge: usize, r: u32) -> Result<(Instance, BTreeSet<Vertex>)> {
    let g = &base.graph;
    if r == 0 || r > 12 {
        return Err(WrpError::Precondition("gadget needs 1 <= r <= 12".into()));
    }
    if edge >= g.edge_count() {
        return Err(WrpError::UnknownEdge(edge));
    }
    if (0..g.vertex_count()).any(|v| g.degree(v) > 3) || two_coloring(g).is_none() {
        return Err(WrpError::Precondition("gadget base must be bipartite with maximum degree 3".into()));
    }
    let (u, w) = (g.edge(edge).u, g.edge(edge).v);
    let mut out = CapacitatedGraph::new(g.vertex_count());
    for e in g.edges().iter().filter(|e| e.id != edge) {
        out.add_edge(e.u, e.v, 1, e.weight)?;
    }
    let v = out.add_vertex();
    let v2 = out.add_vertex();
    out.add_edge(u, v, 1, 1)?;
    out.add_edge(v, v2, 1, 1)?;
    out.add_edge(v2, w, 1, 1)?;
    let leaves = hang_tree(&mut out, v, r)?;
    let leaves2 = hang_tree(&mut out, v2, r)?;
    let count = leaves.len();
    let mut mids = Vec::new();
    let mut mids2 = Vec::new();
    for (ls, ms) in [(&leaves, &mut mids), (&leaves2, &mut mids2)] {
        for pair in ls.windows(2) {
            let m = out.add_vertex();
            out.add_edge(pair[0], m, 1, 1)?;
            out.add_edge(m, pair[1], 1, 1)?;
            ms.push(m);
        }
    }
    out.add_edge(leaves[count - 1], leaves2[0], 1, 1)?;
    if count > 1 {
        out.add_edge(leaves[0], leaves2[count - 1], 1, 1)?;
    }
    for i in 0..mids.len() {
        out.add_edge(mids[i], mids2[mids.len() - 1 - i], 1, 1)?;
    }
    let mut degree_two: BTreeSet<Vertex> = (0..g.vertex_count()).filter(|&x| g.degree(x) == 2).collect();
    if count == 1 {
        degree_two.extend([leaves[0], leaves2[0]]);
    }
    let inst = Instance::new(out, base.s, base.t, base.waypoints.iter().copied())?;
    Ok((inst, degree_two))
}

/// Attaches a full binary tree with `2^(r-1)` leaves below `at`; returns the leaves in
/// left-to-right order.
fn hang_tree(g: &mut CapacitatedGraph, at: Vertex, r: u32) -> Result<Vec<Vertex>> {
    let root = g.add_vertex();
    g.add_edge(at, root, 1, 1)?;
    let mut level = vec![root];
    for _ in 1..r {
        let mut next = Vec::with_capacity(level.len() * 2);
        for &p in &level {
            for _ in 0..2 {
                let c = g.add_vertex();
                g.add_edge(p, c, 1, 1)?;
                next.push(c);
            }
        }
        level = next;
    }
    Ok(level)
}

/// Proper 2-coloring, or `None` if the graph has an odd cycle.
pub fn two_coloring(g: &CapacitatedGraph) -> Option<Vec<u8>> {
    let n = g.vertex_count();
    let mut color = vec![u8::MAX; n];
    for s in 0..n {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for y in g.neighbors(x) {
                if color[y] == u8::MAX {
                    color[y] = 1 - color[x];
                    queue.push_back(y);
                } else if color[y] == color[x] {
                    return None;
                }
            }
        }
    }
    Some(color)
}

/// Structural checks for the gadget family: simple, bipartite, every vertex of degree
/// 3 except `degree_two`, whose members have degree 2. Returns the failures.
pub fn check_gadget_structure(g: &CapacitatedGraph, degree_two: &BTreeSet<Vertex>) -> Vec<String> {
    let mut out = Vec::new();
    if two_coloring(g).is_none() {
        out.push("not bipartite".to_string());
    }
    let mut pairs = BTreeMap::new();
    for e in g.edges() {
        if pairs.insert((e.u.min(e.v), e.u.max(e.v)), e.id).is_some() {
            out.push(format!("parallel edge {}", e.id));
        }
    }
    for v in 0..g.vertex_count() {
        let want = if degree_two.contains(&v) { 2 } else { 3 };
        if g.degree(v) != want {
            out.push(format!("vertex {v} has degree {} (want {want})", g.degree(v)));
        }
    }
    out
}

/// Maximum degree check shared by the grid family.
pub fn max_degree(g: &CapacitatedGraph) -> usize {
    (0..g.vertex_count()).map(|v| g.degree(v)).max().unwrap_or(0)
}
