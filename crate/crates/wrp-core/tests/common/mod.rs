//! Independent checkers and input builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wrp_core::dp::{run_dp, DpConfig};
use wrp_core::euler::{Separation, Side};
use wrp_core::instances::{generate, Family, GeneratorSpec};
use wrp_core::signature::{derive_all, enumerate_signatures, Signature, SubSolution};
use wrp_core::{CapacitatedGraph, EdgeId, Instance, Route, Vertex};

/// Seeded random instance in the desk range: n <= 8, |E| <= 12, k <= 3.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(3..=8);
    let k = rng.gen_range(1..=3usize).min(n - 1);
    let spec = GeneratorSpec {
        n,
        k,
        waypoints: 3,
        keep: rng.gen_range(0.3..0.9),
        max_edges: Some(12),
        seed,
        ..GeneratorSpec::new(Family::PartialKtree)
    };
    generate(&spec).unwrap().instance
}

/// Connected graph with all degrees even: a union of random cycles.
pub fn random_eulerian(seed: u64) -> CapacitatedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=9);
    loop {
        let mut g = CapacitatedGraph::new(n);
        let cycles = rng.gen_range(1..=4);
        for _ in 0..cycles {
            let len = rng.gen_range(3..=n);
            let mut vs: Vec<Vertex> = (0..n).collect();
            vs.shuffle(&mut rng);
            for i in 0..len {
                g.add_edge(vs[i], vs[(i + 1) % len], 1, 1).unwrap();
            }
        }
        let touched = (0..n).all(|v| g.degree(v) > 0);
        if touched && g.is_connected() {
            return g;
        }
    }
}

/// Random separator plus an assignment of the remaining components to side A.
pub fn random_separator(g: &CapacitatedGraph, seed: u64) -> (BTreeSet<Vertex>, BTreeSet<Vertex>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    let n = g.vertex_count();
    let mut sep: BTreeSet<Vertex> = (0..n).filter(|_| rng.gen_bool(0.35)).collect();
    if sep.is_empty() {
        sep.insert(rng.gen_range(0..n));
    }
    let mut comp = vec![usize::MAX; n];
    let mut a_side = BTreeSet::new();
    for v in 0..n {
        if sep.contains(&v) || comp[v] != usize::MAX {
            continue;
        }
        let to_a = rng.gen_bool(0.5);
        let mut stack = vec![v];
        comp[v] = v;
        while let Some(x) = stack.pop() {
            if to_a {
                a_side.insert(x);
            }
            for y in g.neighbors(x) {
                if !sep.contains(&y) && comp[y] == usize::MAX {
                    comp[y] = v;
                    stack.push(y);
                }
            }
        }
    }
    (sep, a_side)
}

fn walk_vertices(g: &CapacitatedGraph, w: &Route) -> Option<Vec<Vertex>> {
    let mut out = vec![w.start];
    for s in &w.steps {
        let e = g.edge(s.edge);
        let (a, b) = if s.forward { (e.u, e.v) } else { (e.v, e.u) };
        if a != *out.last().unwrap() {
            return None;
        }
        out.push(b);
    }
    Some(out)
}

/// Checks the four separation conditions plus the walk-count bound.
pub fn check_separation(
    g: &CapacitatedGraph,
    sep: &BTreeSet<Vertex>,
    a_side: &BTreeSet<Vertex>,
    out: &Separation,
) -> Vec<String> {
    let mut errs = Vec::new();
    let in_side = |v: Vertex, side: Side| sep.contains(&v) || (a_side.contains(&v) == (side == Side::A));
    if out.walks.len() > 2 * sep.len() {
        errs.push(format!("{} walks for separator of size {}", out.walks.len(), sep.len()));
    }
    let mut used = vec![0usize; g.edge_count()];
    for (i, sw) in out.walks.iter().enumerate() {
        let Some(vs) = walk_vertices(g, &sw.walk) else {
            errs.push(format!("walk {i} is not continuous"));
            continue;
        };
        for s in &sw.walk.steps {
            used[s.edge] += 1;
        }
        // 1: endpoints in the separator.
        if !sep.contains(&vs[0]) || !sep.contains(vs.last().unwrap()) {
            errs.push(format!("walk {i} has an endpoint outside the separator"));
        }
        // 2: entirely on one side.
        if vs.iter().any(|&v| !in_side(v, sw.side)) {
            errs.push(format!("walk {i} leaves side {:?}", sw.side));
        }
    }
    // 3: per side, at most as many walks as distinct separator endpoints.
    for side in [Side::A, Side::B] {
        let walks: Vec<&Route> = out.walks.iter().filter(|w| w.side == side).map(|w| &w.walk).collect();
        let ends: BTreeSet<Vertex> = walks.iter().flat_map(|w| [w.start, w.end(g)]).collect();
        if walks.len() > ends.len() {
            errs.push(format!("side {side:?}: {} walks but {} endpoints", walks.len(), ends.len()));
        }
    }
    // Edge-disjoint cover.
    if used.iter().any(|&c| c != 1) {
        errs.push("walks do not use every edge exactly once".into());
    }
    // 4: the concatenation in order is one closed Eulerian walk.
    let mut steps = Vec::new();
    let ordered: Vec<&Route> = out.order.iter().map(|&i| &out.walks[i].walk).collect();
    if out.order.iter().collect::<BTreeSet<_>>().len() != out.walks.len() {
        errs.push("order is not a permutation".into());
    } else if let Some(first) = ordered.first() {
        for w in &ordered {
            steps.extend_from_slice(&w.steps);
        }
        let whole = Route { start: first.start, steps };
        match walk_vertices(g, &whole) {
            Some(vs) if vs.last() == Some(&first.start) => {}
            _ => errs.push("concatenation is not a closed walk".into()),
        }
    }
    errs
}

/// Edges of the graph induced by `verts`.
pub fn induced_edges(g: &CapacitatedGraph, verts: &BTreeSet<Vertex>) -> Vec<EdgeId> {
    g.edges().iter().filter(|e| verts.contains(&e.u) && verts.contains(&e.v)).map(|e| e.id).collect()
}

/// Re-validates a stored sub-solution against the definition of a valid signature.
pub fn check_subsolution(
    g: &CapacitatedGraph,
    bag: &[Vertex],
    subtree: &BTreeSet<Vertex>,
    required: &BTreeSet<Vertex>,
    sig: &Signature,
    sol: &SubSolution,
) -> Vec<String> {
    let mut errs = Vec::new();
    let bag_set: BTreeSet<Vertex> = bag.iter().copied().collect();
    let allowed: BTreeSet<EdgeId> = induced_edges(g, subtree).into_iter().collect();
    let bag_inner: BTreeSet<EdgeId> = induced_edges(g, &bag_set).into_iter().collect();
    let mut used: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut covered = BTreeSet::new();
    let mut weight = 0;
    for (i, w) in sol.walks.iter().enumerate() {
        let Some(vs) = walk_vertices(g, w) else {
            errs.push(format!("walk {i} is not continuous"));
            continue;
        };
        covered.extend(vs.iter().copied());
        for s in &w.steps {
            *used.entry(s.edge).or_default() += 1;
            weight += g.edge(s.edge).weight;
        }
        if vs.iter().any(|v| !subtree.contains(v)) {
            errs.push(format!("walk {i} leaves the subtree"));
        }
    }
    // 1: pairwise edge-disjoint (and each walk a trail).
    if used.values().any(|&c| c > 1) {
        errs.push("walks share an edge".into());
    }
    if weight != sol.weight {
        errs.push(format!("stored weight {} but walks weigh {weight}", sol.weight));
    }
    if sig.is_empty() {
        if sol.walks.len() > 1 {
            errs.push("EMPTY holds more than one walk".into());
        }
        if covered.iter().any(|v| bag_set.contains(v)) {
            errs.push("EMPTY walk touches the bag".into());
        }
        if let Some(w) = sol.walks.first() {
            if w.start != w.end(g) {
                errs.push("EMPTY walk is not closed".into());
            }
        }
    } else {
        if sig.pairs.len() != sol.walks.len() {
            errs.push("walk count differs from pair count".into());
        }
        // 1: endpoints match the pairs.
        let mut ends: Vec<(Vertex, Vertex)> = sol
            .walks
            .iter()
            .map(|w| {
                let (a, b) = (w.start, w.end(g));
                (a.min(b), a.max(b))
            })
            .collect();
        ends.sort();
        if ends != sig.pairs {
            errs.push(format!("walk endpoints {ends:?} differ from pairs {:?}", sig.pairs));
        }
        if sig.pairs.iter().any(|(a, b)| !bag_set.contains(a) || !bag_set.contains(b)) {
            errs.push("pair endpoint outside the bag".into());
        }
        // 2: ell <= beta.
        if sig.ell() > sig.beta() {
            errs.push("more walks than distinct endpoints".into());
        }
    }
    // 3: every waypoint of the subtree graph is covered.
    if let Some(w) = required.iter().find(|w| subtree.contains(w) && !covered.contains(w)) {
        errs.push(format!("waypoint {w} uncovered"));
    }
    // 4: only subtree edges, and no bag edge outside E_b.
    for &e in used.keys() {
        if !allowed.contains(&e) {
            errs.push(format!("edge {e} outside the subtree graph"));
        }
        if bag_inner.contains(&e) && !sig.edges.contains(&e) {
            errs.push(format!("bag edge {e} used but not in E_b"));
        }
    }
    // 5: every edge of E_b used.
    if let Some(e) = sig.edges.iter().find(|e| !used.contains_key(e)) {
        errs.push(format!("E_b edge {e} unused"));
    }
    errs
}

/// Minimum weight per valid signature by enumerating every edge subset of the subtree
/// graph and every split of it into trails with bag endpoints.
pub fn exhaustive_table(
    g: &CapacitatedGraph,
    bag: &[Vertex],
    subtree: &BTreeSet<Vertex>,
    required: &BTreeSet<Vertex>,
) -> BTreeMap<Signature, u64> {
    let edges = induced_edges(g, subtree);
    assert!(edges.len() <= 12, "too many edges for exhaustive enumeration");
    let m = edges.len();
    let bag_set: BTreeSet<Vertex> = bag.iter().copied().collect();
    let req: BTreeSet<Vertex> = required.intersection(subtree).copied().collect();
    let bag_req: Vec<Vertex> = req.iter().copied().filter(|v| bag_set.contains(v)).collect();
    let mut memo: BTreeMap<u32, BTreeSet<Vec<(Vertex, Vertex)>>> = BTreeMap::new();
    let mut table: BTreeMap<Signature, u64> = BTreeMap::new();
    let put = |t: &mut BTreeMap<Signature, u64>, s: Signature, w: u64| {
        let e = t.entry(s).or_insert(w);
        *e = (*e).min(w);
    };
    for mask in 0u32..(1 << m) {
        let f: Vec<EdgeId> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
        let weight: u64 = f.iter().map(|&e| g.edge(e).weight).sum();
        let verts: BTreeSet<Vertex> = f.iter().flat_map(|&e| [g.edge(e).u, g.edge(e).v]).collect();
        if req.iter().any(|v| !bag_set.contains(v) && !verts.contains(v)) {
            continue;
        }
        // EMPTY: one closed walk away from the bag, or nothing at all.
        if f.is_empty() {
            let outside: Vec<&Vertex> = req.iter().filter(|v| !bag_set.contains(v)).collect();
            if req.is_empty() || (bag_req.is_empty() && outside.len() == 1) {
                put(&mut table, Signature::EMPTY, 0);
            }
        } else if verts.iter().all(|v| !bag_set.contains(v)) && bag_req.is_empty() && is_closed_trail_set(g, &f) {
            put(&mut table, Signature::EMPTY, weight);
        }
        let e_b: Vec<EdgeId> =
            f.iter().copied().filter(|&e| bag_set.contains(&g.edge(e).u) && bag_set.contains(&g.edge(e).v)).collect();
        let splits = trail_splits(g, &edges, &bag_set, mask, &mut memo);
        for pairs in splits {
            // Trivial walks at bag vertices: any counts with ell <= beta.
            let mut counts = vec![0usize; bag.len()];
            loop {
                let mut all = pairs.clone();
                for (i, &c) in counts.iter().enumerate() {
                    all.extend(std::iter::repeat_n((bag[i], bag[i]), c));
                }
                let sig = Signature::new(all, e_b.iter().copied());
                let cover_ok =
                    bag_req.iter().all(|v| verts.contains(v) || counts[bag.iter().position(|b| b == v).unwrap()] > 0);
                if !sig.pairs.is_empty() && sig.ell() <= sig.beta() && cover_ok {
                    put(&mut table, sig, weight);
                }
                // Next counts vector, each entry in 0..=2.
                let mut i = 0;
                while i < counts.len() && counts[i] == 2 {
                    counts[i] = 0;
                    i += 1;
                }
                if i == counts.len() {
                    break;
                }
                counts[i] += 1;
            }
        }
    }
    table
}

fn is_closed_trail_set(g: &CapacitatedGraph, f: &[EdgeId]) -> bool {
    let mut deg: BTreeMap<Vertex, usize> = BTreeMap::new();
    for &e in f {
        *deg.entry(g.edge(e).u).or_default() += 1;
        *deg.entry(g.edge(e).v).or_default() += 1;
    }
    if deg.values().any(|d| d % 2 == 1) {
        return false;
    }
    let start = g.edge(f[0]).u;
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &e in f {
            let ed = g.edge(e);
            if ed.touches(x) {
                let y = ed.other(x);
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    seen.len() == deg.len()
}

/// Every multiset of endpoint pairs of a split of the edge set `mask` into trails whose
/// endpoints lie in the bag (closed trails anchored at a bag vertex on them).
fn trail_splits(
    g: &CapacitatedGraph,
    edges: &[EdgeId],
    bag: &BTreeSet<Vertex>,
    mask: u32,
    memo: &mut BTreeMap<u32, BTreeSet<Vec<(Vertex, Vertex)>>>,
) -> BTreeSet<Vec<(Vertex, Vertex)>> {
    if mask == 0 {
        return BTreeSet::from([vec![]]);
    }
    if let Some(r) = memo.get(&mask) {
        return r.clone();
    }
    let low = mask.trailing_zeros();
    let mut trails = Vec::new();
    for &x in bag {
        trail_dfs(g, edges, bag, mask, low, x, x, 0, &mut trails);
    }
    let mut out = BTreeSet::new();
    for (pair, used) in trails {
        for rest in trail_splits(g, edges, bag, mask & !used, memo) {
            let mut v = rest.clone();
            v.push(pair);
            v.sort();
            out.insert(v);
        }
    }
    memo.insert(mask, out.clone());
    out
}

#[allow(clippy::too_many_arguments)]
fn trail_dfs(
    g: &CapacitatedGraph,
    edges: &[EdgeId],
    bag: &BTreeSet<Vertex>,
    mask: u32,
    low: u32,
    start: Vertex,
    cur: Vertex,
    used: u32,
    out: &mut Vec<((Vertex, Vertex), u32)>,
) {
    if used >> low & 1 == 1 && bag.contains(&cur) {
        out.push(((start.min(cur), start.max(cur)), used));
    }
    for i in 0..edges.len() as u32 {
        if mask >> i & 1 == 0 || used >> i & 1 == 1 {
            continue;
        }
        let e = g.edge(edges[i as usize]);
        if !e.touches(cur) {
            continue;
        }
        trail_dfs(g, edges, bag, mask, low, start, e.other(cur), used | 1 << i, out);
    }
}

/// Second enumerator of canonical signatures: all ordered pair sequences, canonicalized.
pub fn naive_signatures(g: &CapacitatedGraph, bag: &[Vertex]) -> BTreeSet<Signature> {
    let bag_set: BTreeSet<Vertex> = bag.iter().copied().collect();
    let inner = induced_edges(g, &bag_set);
    let pairs: Vec<(Vertex, Vertex)> = bag.iter().flat_map(|&a| bag.iter().map(move |&b| (a, b))).collect();
    let mut seqs: Vec<Vec<(Vertex, Vertex)>> = vec![vec![]];
    let mut frontier = seqs.clone();
    for _ in 0..bag.len() {
        let mut next = Vec::new();
        for s in &frontier {
            for &p in &pairs {
                let mut t = s.clone();
                t.push(p);
                next.push(t);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    let mut out = BTreeSet::from([Signature::EMPTY]);
    for s in seqs.into_iter().filter(|s| !s.is_empty()) {
        for mask in 0u32..(1 << inner.len()) {
            let sig =
                Signature::new(s.iter().copied(), (0..inner.len()).filter(|i| mask >> i & 1 == 1).map(|i| inner[i]));
            if sig.ell() <= sig.beta() {
                out.insert(sig);
            }
        }
    }
    out
}

/// Runs every signature check on one instance: table size against the signature count,
/// canonical keys, sub-solution validity, and, for subtrees with at most 10 edges,
/// equality with the exhaustive table. Returns the number of exhaustively compared nodes.
pub fn audit_signatures(inst: &Instance) -> Result<usize, String> {
    let run = run_dp(inst, &DpConfig { keep_tables: true, ..Default::default() }).map_err(|e| e.to_string())?;
    let tables = derive_all(&run).map_err(|e| e.to_string())?;
    let p = &run.prepared;
    let g = &p.instance.graph;
    let required: BTreeSet<usize> = (0..g.vertex_count()).filter(|&v| p.required[v]).collect();
    let mut exhaustive = 0;
    for (id, node) in p.nice.nodes.iter().enumerate() {
        let subtree = &run.seen[id];
        let all = enumerate_signatures(g, &node.bag, 16).map_err(|e| e.to_string())?;
        if tables[id].len() > all.len() {
            return Err(format!("node {id}: table larger than signature space"));
        }
        for (sig, sol) in &tables[id] {
            if all.binary_search(sig).is_err() {
                return Err(format!("node {id}: non-canonical {sig}"));
            }
            let errs = check_subsolution(g, &node.bag, subtree, &required, sig, sol);
            if !errs.is_empty() {
                return Err(format!("node {id} sig {sig}: {errs:?}"));
            }
        }
        if induced_edges(g, subtree).len() <= 10 {
            let truth = exhaustive_table(g, &node.bag, subtree, &required);
            let got: Vec<(String, u64)> = tables[id].iter().map(|(s, v)| (s.to_string(), v.weight)).collect();
            let want: Vec<(String, u64)> = truth.iter().map(|(s, &w)| (s.to_string(), w)).collect();
            if got != want {
                return Err(format!("node {id} bag {:?}: table differs from exhaustive enumeration", node.bag));
            }
            exhaustive += 1;
        }
    }
    Ok(exhaustive)
}
