//! Tree decompositions: construction, validation and conversion to nice form.
//!
//! Exact mode applies the simplicial and almost-simplicial reduction rules under a
//! contraction-degeneracy lower bound, then runs a subset dynamic program over
//! elimination orders of whatever remains. Heuristic mode eliminates by minimum fill-in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, EdgeId, Vertex};

/// A tree decomposition: sorted bags plus undirected tree links between bag indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<Vertex>>,
    pub links: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one (0 for no bags).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }
}

/// Node type of a nice tree decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf,
    Introduce(Vertex),
    Forget(Vertex),
    Join,
}

/// One node of a nice tree decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceNode {
    pub kind: NodeKind,
    pub bag: Vec<Vertex>,
    pub children: Vec<usize>,
}

/// Rooted nice decomposition. Children always have smaller ids than their parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
}

impl NiceTreeDecomposition {
    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// The underlying plain decomposition.
    pub fn to_plain(&self) -> TreeDecomposition {
        let bags = self.nodes.iter().map(|n| n.bag.clone()).collect();
        let links = self.nodes.iter().enumerate().flat_map(|(i, n)| n.children.iter().map(move |&c| (i, c))).collect();
        TreeDecomposition { bags, links }
    }
}

/// How [`decompose`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposeMode {
    /// Minimum width; fails once `budget` subset states are stored.
    Exact { budget: usize },
    /// Min-fill elimination, ties broken by lowest vertex id.
    Heuristic,
}

/// Default subset budget for exact mode.
pub const DEFAULT_EXACT_BUDGET: usize = 2_000_000;

type Adj = Vec<BTreeSet<Vertex>>;

fn eliminate(adj: &mut Adj, alive: &mut BTreeSet<Vertex>, v: Vertex) {
    let nb: Vec<Vertex> = adj[v].iter().copied().collect();
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj[a].remove(&v);
    }
    adj[v].clear();
    alive.remove(&v);
}

fn fill_in(adj: &Adj, v: Vertex) -> usize {
    let nb: Vec<Vertex> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        missing += nb[i + 1..].iter().filter(|b| !adj[a].contains(b)).count();
    }
    missing
}

fn is_clique(adj: &Adj, set: &[Vertex]) -> bool {
    set.iter().enumerate().all(|(i, &a)| set[i + 1..].iter().all(|b| adj[a].contains(b)))
}

/// Min-fill elimination order over the vertices in `alive`.
fn min_fill_order(mut adj: Adj, mut alive: BTreeSet<Vertex>) -> Vec<Vertex> {
    let mut order = Vec::with_capacity(alive.len());
    while let Some(&v) = alive.iter().min_by_key(|&&v| (fill_in(&adj, v), v)) {
        order.push(v);
        eliminate(&mut adj, &mut alive, v);
    }
    order
}

/// Width of an elimination order: the largest later-neighbourhood in the filled graph.
pub fn order_width(adj: &[BTreeSet<Vertex>], order: &[Vertex]) -> usize {
    let mut adj: Adj = adj.to_vec();
    let mut alive: BTreeSet<Vertex> = order.iter().copied().collect();
    let mut width = 0;
    for &v in order {
        width = width.max(adj[v].len());
        eliminate(&mut adj, &mut alive, v);
    }
    width
}

/// Contraction-degeneracy lower bound (minor-min-width).
fn minor_min_width(adj: &Adj, alive: &BTreeSet<Vertex>) -> usize {
    let mut adj = adj.clone();
    let mut alive = alive.clone();
    let mut low = 0;
    while alive.len() >= 2 {
        let v = *alive.iter().min_by_key(|&&v| (adj[v].len(), v)).expect("non-empty");
        low = low.max(adj[v].len());
        if let Some(&u) = adj[v].iter().min_by_key(|&&u| (adj[u].len(), u)) {
            let nb: Vec<Vertex> = adj[v].iter().copied().filter(|&x| x != u).collect();
            for x in nb {
                adj[x].remove(&v);
                adj[x].insert(u);
                adj[u].insert(x);
            }
            adj[u].remove(&v);
        }
        adj[v].clear();
        alive.remove(&v);
    }
    low
}

fn exact_order(adj0: &Adj, budget: usize) -> Result<(usize, Vec<Vertex>)> {
    let n = adj0.len();
    let mut adj = adj0.clone();
    let mut alive: BTreeSet<Vertex> = (0..n).collect();
    let mut low = minor_min_width(&adj, &alive);
    let mut order = Vec::with_capacity(n);

    // Reduction rules; each elimination keeps the treewidth of the remainder exact.
    loop {
        let found = alive.iter().copied().find_map(|v| {
            let nb: Vec<Vertex> = adj[v].iter().copied().collect();
            let simplicial = is_clique(&adj, &nb);
            let almost = nb.len() <= low
                && nb.iter().any(|&u| {
                    let rest: Vec<Vertex> = nb.iter().copied().filter(|&x| x != u).collect();
                    is_clique(&adj, &rest)
                });
            (simplicial || almost).then_some((v, nb.len()))
        });
        let Some((v, d)) = found else { break };
        low = low.max(d);
        order.push(v);
        eliminate(&mut adj, &mut alive, v);
    }
    if alive.is_empty() {
        return Ok((low, order));
    }

    let heuristic = min_fill_order(adj.clone(), alive.clone());
    let ub = order_width(&adj, &heuristic);
    if ub <= low {
        order.extend(heuristic);
        return Ok((low, order));
    }
    let rem: Vec<Vertex> = alive.iter().copied().collect();
    if rem.len() > 64 {
        return Err(WrpError::Budget { what: "exact treewidth (64-vertex kernel)", limit: 64 });
    }
    let local: BTreeMap<Vertex, usize> = rem.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nbr: Vec<u64> = rem.iter().map(|&v| adj[v].iter().fold(0u64, |m, x| m | (1u64 << local[x]))).collect();
    let r = rem.len();
    let full: u64 = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    let q_size = |s: u64, v: usize| -> usize {
        let mut comp = 1u64 << v;
        let mut frontier = comp;
        while frontier != 0 {
            let mut next = 0u64;
            let mut f = frontier;
            while f != 0 {
                let x = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= nbr[x] & s & !comp;
            }
            comp |= next;
            frontier = next;
        }
        let mut out = 0u64;
        let mut c = comp;
        while c != 0 {
            let x = c.trailing_zeros() as usize;
            c &= c - 1;
            out |= nbr[x];
        }
        (out & !comp & !s).count_ones() as usize
    };

    // levels[k]: eliminated set of size k -> (width so far, last eliminated vertex).
    let mut levels: Vec<BTreeMap<u64, (usize, usize)>> = vec![BTreeMap::from([(0u64, (0, usize::MAX))])];
    let mut stored = 1usize;
    for _ in 0..r {
        let mut next: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        for (&s, &(val, _)) in levels.last().expect("level") {
            let mut free = full & !s;
            while free != 0 {
                let v = free.trailing_zeros() as usize;
                free &= free - 1;
                let w = val.max(q_size(s, v));
                if w >= ub {
                    continue;
                }
                let key = s | (1u64 << v);
                let slot = next.entry(key).or_insert((usize::MAX, usize::MAX));
                if (w, v) < *slot {
                    *slot = (w, v);
                }
            }
        }
        stored += next.len();
        if stored > budget {
            return Err(WrpError::Budget { what: "exact treewidth subset", limit: budget });
        }
        if next.is_empty() {
            order.extend(heuristic);
            return Ok((low.max(ub), order));
        }
        levels.push(next);
    }
    let (best, _) = levels[r][&full];
    let mut s = full;
    let mut rev = Vec::with_capacity(r);
    for k in (1..=r).rev() {
        let (_, last) = levels[k][&s];
        rev.push(rem[last]);
        s &= !(1u64 << last);
    }
    rev.reverse();
    order.extend(rev);
    Ok((low.max(best), order))
}

/// Decomposition whose bags are `{v} ∪ later neighbours of v` along `order`.
pub fn decomposition_from_order(adj: &[BTreeSet<Vertex>], order: &[Vertex]) -> TreeDecomposition {
    let n = adj.len();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut filled: Adj = adj.to_vec();
    let mut alive: BTreeSet<Vertex> = order.iter().copied().collect();
    let mut bags = Vec::with_capacity(order.len());
    let mut parent_vertex = Vec::with_capacity(order.len());
    for &v in order {
        let later: Vec<Vertex> = filled[v].iter().copied().collect();
        let mut bag = later.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        parent_vertex.push(later.iter().copied().min_by_key(|&u| pos[u]));
        eliminate(&mut filled, &mut alive, v);
    }
    let mut links = Vec::new();
    let mut roots = Vec::new();
    for (i, p) in parent_vertex.iter().enumerate() {
        match p {
            Some(u) => links.push((i, pos[*u])),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        links.push((w[0], w[1]));
    }
    TreeDecomposition { bags, links }
}

/// Builds a decomposition of `g` (edge multiplicities ignored).
pub fn decompose(g: &CapacitatedGraph, mode: DecomposeMode) -> Result<TreeDecomposition> {
    let adj = g.simple_adjacency();
    let order = match mode {
        DecomposeMode::Heuristic => min_fill_order(adj.clone(), (0..g.vertex_count()).collect()),
        DecomposeMode::Exact { budget } => exact_order(&adj, budget)?.1,
    };
    Ok(decomposition_from_order(&adj, &order))
}

/// Exact treewidth of `g`.
pub fn treewidth_exact(g: &CapacitatedGraph, budget: usize) -> Result<usize> {
    let adj = g.simple_adjacency();
    let (w, order) = exact_order(&adj, budget)?;
    debug_assert_eq!(order_width(&adj, &order), w);
    Ok(w)
}

/// One failed decomposition axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TdViolation {
    VertexUncovered(Vertex),
    EdgeUncovered(EdgeId),
    Connectivity(Vertex),
    NotATree,
    UnknownVertex(Vertex),
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::VertexUncovered(v) => write!(f, "vertex uncovered: {v}"),
            TdViolation::EdgeUncovered(e) => write!(f, "edge uncovered: {e}"),
            TdViolation::Connectivity(v) => write!(f, "connectivity: bags containing {v} are not connected"),
            TdViolation::NotATree => write!(f, "links do not form a tree"),
            TdViolation::UnknownVertex(v) => write!(f, "bag mentions unknown vertex {v}"),
        }
    }
}

fn tree_components(nodes: usize, links: &[(usize, usize)], keep: &dyn Fn(usize) -> bool) -> usize {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let members: Vec<usize> = (0..nodes).filter(|&i| keep(i)).collect();
    let mut comps = members.len();
    for &(a, b) in links {
        if keep(a) && keep(b) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                comps -= 1;
            }
        }
    }
    comps
}

/// Checks the three decomposition axioms and that links form a tree.
pub fn validate_decomposition(g: &CapacitatedGraph, td: &TreeDecomposition) -> Vec<TdViolation> {
    let mut out = Vec::new();
    let nb = td.bags.len();
    if nb > 0 && (td.links.len() != nb - 1 || tree_components(nb, &td.links, &|_| true) != 1) {
        out.push(TdViolation::NotATree);
    }
    let mut holders: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.vertex_count()];
    for (i, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            match holders.get_mut(v) {
                Some(h) => {
                    h.insert(i);
                }
                None => out.push(TdViolation::UnknownVertex(v)),
            }
        }
    }
    for (v, h) in holders.iter().enumerate() {
        if h.is_empty() {
            out.push(TdViolation::VertexUncovered(v));
        } else if tree_components(nb, &td.links, &|i| h.contains(&i)) != 1 {
            out.push(TdViolation::Connectivity(v));
        }
    }
    for e in g.edges() {
        if holders[e.u].intersection(&holders[e.v]).next().is_none() {
            out.push(TdViolation::EdgeUncovered(e.id));
        }
    }
    out
}

/// Converts a valid decomposition into nice form rooted at its last bag, with binary
/// joins and a chain of forget nodes above the natural root so the root bag is empty.
pub fn make_nice(td: &TreeDecomposition) -> NiceTreeDecomposition {
    let nb = td.bags.len();
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for &(a, b) in &td.links {
        tree[a].push(b);
        tree[b].push(a);
    }
    let mut nodes: Vec<NiceNode> = Vec::new();
    if nb == 0 {
        return NiceTreeDecomposition { nodes, root: 0 };
    }
    let root_bag = nb - 1;
    // Iterative post-order from the root.
    let mut order = Vec::with_capacity(nb);
    let mut parent = vec![usize::MAX; nb];
    let mut stack = vec![root_bag];
    parent[root_bag] = root_bag;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &tree[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    let mut top: Vec<Option<usize>> = vec![None; nb];
    for &x in order.iter().rev() {
        let bag = &td.bags[x];
        let mut kids: Vec<usize> = tree[x].iter().copied().filter(|&y| y != parent[x]).collect();
        kids.sort_unstable();
        let mut tops = Vec::new();
        for c in kids {
            let Some(mut cur) = top[c] else { continue };
            let mut cur_bag = nodes[cur].bag.clone();
            for &v in td.bags[c].iter().filter(|v| !bag.contains(v)) {
                cur_bag.retain(|&u| u != v);
                nodes.push(NiceNode { kind: NodeKind::Forget(v), bag: cur_bag.clone(), children: vec![cur] });
                cur = nodes.len() - 1;
            }
            for &v in bag.iter().filter(|v| !td.bags[c].contains(v)) {
                cur_bag.push(v);
                cur_bag.sort_unstable();
                nodes.push(NiceNode { kind: NodeKind::Introduce(v), bag: cur_bag.clone(), children: vec![cur] });
                cur = nodes.len() - 1;
            }
            tops.push(cur);
        }
        if tops.is_empty() {
            let Some(&first) = bag.first() else { continue };
            nodes.push(NiceNode { kind: NodeKind::Leaf, bag: vec![first], children: vec![] });
            let mut cur = nodes.len() - 1;
            let mut cur_bag = vec![first];
            for &v in &bag[1..] {
                cur_bag.push(v);
                nodes.push(NiceNode { kind: NodeKind::Introduce(v), bag: cur_bag.clone(), children: vec![cur] });
                cur = nodes.len() - 1;
            }
            tops.push(cur);
        }
        let mut acc = tops[0];
        for &t in &tops[1..] {
            nodes.push(NiceNode { kind: NodeKind::Join, bag: bag.clone(), children: vec![acc, t] });
            acc = nodes.len() - 1;
        }
        top[x] = Some(acc);
    }
    let mut cur = top[root_bag].expect("root bag is non-empty or has children");
    let mut bag = nodes[cur].bag.clone();
    for v in bag.clone() {
        bag.retain(|&u| u != v);
        nodes.push(NiceNode { kind: NodeKind::Forget(v), bag: bag.clone(), children: vec![cur] });
        cur = nodes.len() - 1;
    }
    NiceTreeDecomposition { nodes, root: cur }
}

/// Checks node typing rules, child ordering, the empty root and the plain axioms.
pub fn check_nice(g: &CapacitatedGraph, nice: &NiceTreeDecomposition) -> Vec<String> {
    let mut out = Vec::new();
    for (i, node) in nice.nodes.iter().enumerate() {
        if node.children.iter().any(|&c| c >= i) {
            out.push(format!("node {i}: child id not smaller than parent"));
        }
        let child_bag = |k: usize| node.children.get(k).map(|&c| &nice.nodes[c].bag);
        let with = |b: &Vec<Vertex>, v: Vertex| {
            let mut b = b.clone();
            b.push(v);
            b.sort_unstable();
            b
        };
        let ok = match node.kind {
            NodeKind::Leaf => node.children.is_empty() && node.bag.len() == 1,
            NodeKind::Introduce(v) => {
                node.children.len() == 1
                    && !child_bag(0).unwrap().contains(&v)
                    && with(child_bag(0).unwrap(), v) == node.bag
            }
            NodeKind::Forget(v) => {
                node.children.len() == 1 && !node.bag.contains(&v) && with(&node.bag, v) == *child_bag(0).unwrap()
            }
            NodeKind::Join => {
                node.children.len() == 2 && child_bag(0) == Some(&node.bag) && child_bag(1) == Some(&node.bag)
            }
        };
        if !ok {
            out.push(format!("node {i}: typing rule for {:?} violated", node.kind));
        }
    }
    if nice.nodes.get(nice.root).is_none_or(|r| !r.bag.is_empty()) {
        out.push("root bag is not empty".into());
    }
    out.extend(validate_decomposition(g, &nice.to_plain()).into_iter().map(|v| v.to_string()));
    out
}

/// Extends a decomposition of a graph to its unified graph: every subdivision vertex
/// `x` (id at least `original_n`, neighbours `u`, `v`) gets a bag `{u, v, x}` hung off
/// the first bag holding both `u` and `v`.
pub fn hang_subdivisions(
    td: &TreeDecomposition,
    unified: &CapacitatedGraph,
    original_n: usize,
) -> Result<TreeDecomposition> {
    let mut out = td.clone();
    for x in original_n..unified.vertex_count() {
        let nb = unified.neighbors(x);
        let host = td
            .bags
            .iter()
            .position(|b| nb.iter().all(|v| b.contains(v)))
            .ok_or_else(|| WrpError::Decomposition(format!("no bag holds the neighbours of {x}")))?;
        let mut bag = nb.clone();
        bag.push(x);
        bag.sort_unstable();
        out.bags.push(bag);
        out.links.push((host, out.bags.len() - 1));
    }
    Ok(out)
}
