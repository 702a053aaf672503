//! Dynamic program over a nice tree decomposition of the unified cycle instance.
//!
//! The instance is first clamped, reduced to `s = t` and unified, so every edge has
//! capacity 1 and a solution is a closed trail through the terminal. At a node with
//! bag `X` a partial solution is cut at the bag vertices into segments:
//! *excursions* (trails between bag vertices whose interior is already forgotten) and
//! single bag edges. The DP state ([`Profile`]) records the multiset of excursion
//! endpoint pairs, the set of used bag edges and whether the trail is already closed.
//! Two partial solutions with the same profile are interchangeable in any completion,
//! so keeping the lightest one per profile is exact. The signature tables
//! are derived from these profiles in [`crate::signature`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WrpError};
use crate::euler::euler_circuit;
use crate::graph::{CapacitatedGraph, EdgeId, Instance, Route, Step, Vertex};
use crate::solution::{Solution, SolveOutcome};
use crate::transform::{clamp_instance, reduce_to_cycle, unify_instance, TransformTrace};
use crate::treewidth::{
    check_nice, decompose, hang_subdivisions, make_nice, DecomposeMode, NiceTreeDecomposition, NodeKind,
    DEFAULT_EXACT_BUDGET,
};

/// Default cap on the width of the decomposition handed to the DP.
pub const DEFAULT_WIDTH_CAP: usize = 8;
/// Default cap on the number of entries in a single node table.
pub const DEFAULT_TABLE_BUDGET: usize = 2_000_000;

/// Limits and options for [`solve_tw`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    pub width_cap: usize,
    pub table_budget: usize,
    pub decomposition_budget: usize,
    /// Keep every node table for inspection after the run.
    pub keep_tables: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            width_cap: DEFAULT_WIDTH_CAP,
            table_budget: DEFAULT_TABLE_BUDGET,
            decomposition_budget: DEFAULT_EXACT_BUDGET,
            keep_tables: false,
        }
    }
}

/// DP state at one node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Profile {
    /// Excursion endpoint pairs `(a, b)` with `a <= b`, sorted.
    pub excursions: Vec<(Vertex, Vertex)>,
    /// Used edges with both endpoints in the bag, sorted.
    pub bag_edges: Vec<EdgeId>,
    /// The trail is closed and lies entirely among forgotten vertices.
    pub done: bool,
}

impl Profile {
    /// No edges used and not closed.
    pub fn is_blank(&self) -> bool {
        !self.done && self.excursions.is_empty() && self.bag_edges.is_empty()
    }
}

/// Lightest known partial solution for a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partial {
    pub weight: u64,
    /// All used edges, sorted.
    pub edges: Vec<EdgeId>,
    /// One trail per excursion, aligned with [`Profile::excursions`], running from
    /// the smaller endpoint to the larger.
    pub walks: Vec<Route>,
}

impl Partial {
    fn beats(&self, other: &Partial) -> bool {
        (self.weight, &self.edges) < (other.weight, &other.edges)
    }
}

/// Table of one node.
pub type ProfileTable = BTreeMap<Profile, Partial>;

fn offer(table: &mut ProfileTable, profile: Profile, partial: Partial) {
    match table.get(&profile) {
        Some(cur) if !partial.beats(cur) => {}
        _ => {
            table.insert(profile, partial);
        }
    }
}

/// Sorts excursions together with their walks into canonical order.
fn canonical(g: &CapacitatedGraph, pairs: Vec<((Vertex, Vertex), Route)>) -> (Vec<(Vertex, Vertex)>, Vec<Route>) {
    let mut pairs: Vec<((Vertex, Vertex), Route)> =
        pairs.into_iter().map(|((a, b), w)| if a <= b { ((a, b), w) } else { ((b, a), w.reversed(g)) }).collect();
    pairs.sort();
    pairs.into_iter().unzip()
}

fn concat(a: &Route, b: &Route) -> Route {
    let mut steps = a.steps.clone();
    steps.extend_from_slice(&b.steps);
    Route { start: a.start, steps }
}

fn merge_sorted(a: &[EdgeId], b: &[EdgeId]) -> Vec<EdgeId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

/// The unified cycle instance together with its decomposition.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Unified instance; `s == t` is the terminal.
    pub instance: Instance,
    /// Maps routes on `instance` back to the input instance.
    pub trace: TransformTrace,
    pub nice: NiceTreeDecomposition,
    /// `required[v]` is true for waypoints and the terminal.
    pub required: Vec<bool>,
}

/// Clamp, reduce to a cycle, decompose, unify and build the nice decomposition.
pub fn prepare(inst: &Instance, cfg: &DpConfig) -> Result<Prepared> {
    let (clamped, t1) = clamp_instance(inst);
    let (cyc, t2) = reduce_to_cycle(&clamped, 1);
    let td = match decompose(&cyc.graph, DecomposeMode::Exact { budget: cfg.decomposition_budget }) {
        Ok(td) => td,
        Err(e) if e.is_limit() => decompose(&cyc.graph, DecomposeMode::Heuristic)?,
        Err(e) => return Err(e),
    };
    let (unified, t3) = unify_instance(&cyc)?;
    let utd = hang_subdivisions(&td, &unified.graph, cyc.n())?;
    let nice = make_nice(&utd);
    if nice.width() > cfg.width_cap {
        return Err(WrpError::WidthLimit { width: nice.width(), cap: cfg.width_cap });
    }
    debug_assert!(check_nice(&unified.graph, &nice).is_empty());
    let mut required = vec![false; unified.n()];
    required[unified.s] = true;
    for &w in &unified.waypoints {
        required[w] = true;
    }
    Ok(Prepared { instance: unified, trace: t1.then(t2).then(t3), nice, required })
}

/// Evaluates node tables bottom-up.
pub struct DpRunner<'a> {
    p: &'a Prepared,
    budget: usize,
    /// Union of bags in each node's subtree.
    pub seen: Vec<BTreeSet<Vertex>>,
}

impl<'a> DpRunner<'a> {
    pub fn new(p: &'a Prepared, budget: usize) -> Self {
        DpRunner { p, budget, seen: Vec::with_capacity(p.nice.nodes.len()) }
    }

    fn g(&self) -> &CapacitatedGraph {
        &self.p.instance.graph
    }

    fn check_budget(&self, t: &ProfileTable) -> Result<()> {
        if t.len() > self.budget {
            return Err(WrpError::Budget { what: "DP table", limit: self.budget });
        }
        Ok(())
    }

    /// Computes the table of node `id` from its children's tables. Must be called in id order.
    pub fn step(&mut self, id: usize, child_tables: &[&ProfileTable]) -> Result<ProfileTable> {
        let node = &self.p.nice.nodes[id];
        let mut seen: BTreeSet<Vertex> = node.bag.iter().copied().collect();
        for &c in &node.children {
            seen.extend(self.seen[c].iter().copied());
        }
        let table = match node.kind {
            NodeKind::Leaf => BTreeMap::from([(
                Profile { excursions: vec![], bag_edges: vec![], done: false },
                Partial { weight: 0, edges: vec![], walks: vec![] },
            )]),
            NodeKind::Introduce(v) => {
                let child = node.children[0];
                if let Some(u) =
                    self.g().neighbors(v).into_iter().find(|u| self.seen[child].contains(u) && !node.bag.contains(u))
                {
                    return Err(WrpError::Decomposition(format!(
                        "introduce {v} at node {id}: neighbour {u} already forgotten"
                    )));
                }
                self.introduce(&node.bag, v, child_tables[0])?
            }
            NodeKind::Forget(v) => self.forget(&node.bag, v, child_tables[0])?,
            NodeKind::Join => self.join(child_tables[0], child_tables[1])?,
        };
        self.check_budget(&table)?;
        self.seen.push(seen);
        Ok(table)
    }

    fn bag_has_required(&self, bag: &[Vertex]) -> bool {
        bag.iter().any(|&x| self.p.required[x])
    }

    fn introduce(&self, bag: &[Vertex], v: Vertex, child: &ProfileTable) -> Result<ProfileTable> {
        let g = self.g();
        let local: Vec<EdgeId> = g
            .incident(v)
            .iter()
            .copied()
            .filter(|&e| {
                let o = g.edge(e).other(v);
                o != v && bag.contains(&o)
            })
            .collect();
        let mut out = ProfileTable::new();
        for (p, val) in child {
            if p.done {
                if !self.p.required[v] {
                    offer(&mut out, p.clone(), val.clone());
                }
                continue;
            }
            for mask in 0u32..(1u32 << local.len()) {
                let chosen: Vec<EdgeId> = (0..local.len()).filter(|i| mask >> i & 1 == 1).map(|i| local[i]).collect();
                let extra: u64 = chosen.iter().map(|&e| g.edge(e).weight).sum();
                let profile = Profile {
                    excursions: p.excursions.clone(),
                    bag_edges: merge_sorted(&p.bag_edges, &chosen),
                    done: false,
                };
                let partial = Partial {
                    weight: val.weight + extra,
                    edges: merge_sorted(&val.edges, &chosen),
                    walks: val.walks.clone(),
                };
                offer(&mut out, profile, partial);
            }
            self.check_budget(&out)?;
        }
        Ok(out)
    }

    fn forget(&self, bag: &[Vertex], v: Vertex, child: &ProfileTable) -> Result<ProfileTable> {
        let g = self.g();
        let terminal = self.p.instance.s;
        let mut out = ProfileTable::new();
        for (p, val) in child {
            if p.done {
                if !self.p.required[v] {
                    offer(&mut out, p.clone(), val.clone());
                }
                continue;
            }
            let mut loops: Vec<Route> = Vec::new();
            let mut ends: Vec<(Vertex, Route)> = Vec::new();
            let mut rest: Vec<((Vertex, Vertex), Route)> = Vec::new();
            for (&(a, b), w) in p.excursions.iter().zip(&val.walks) {
                if a == v && b == v {
                    loops.push(w.clone());
                } else if a == v {
                    ends.push((b, w.clone()));
                } else if b == v {
                    ends.push((a, w.reversed(g)));
                } else {
                    rest.push(((a, b), w.clone()));
                }
            }
            let mut rest_edges = Vec::new();
            for &e in &p.bag_edges {
                if g.edge(e).touches(v) {
                    let step = Step::leaving(g, e, v);
                    ends.push((step.head(g), Route { start: v, steps: vec![step] }));
                } else {
                    rest_edges.push(e);
                }
            }
            if loops.is_empty() && ends.is_empty() {
                if !self.p.required[v] {
                    offer(&mut out, p.clone(), val.clone());
                } else if v == terminal && p.is_blank() {
                    let done = Profile { excursions: vec![], bag_edges: vec![], done: true };
                    offer(&mut out, done, Partial { weight: 0, edges: vec![], walks: vec![] });
                }
                continue;
            }
            if ends.len() % 2 == 1 {
                continue;
            }
            if ends.is_empty() {
                if rest.is_empty() && rest_edges.is_empty() && !self.bag_has_required(bag) {
                    let done = Profile { excursions: vec![], bag_edges: vec![], done: true };
                    offer(&mut out, done, Partial { weight: val.weight, edges: val.edges.clone(), walks: vec![] });
                }
                continue;
            }
            ends.sort();
            let mut loop_chain = Route::empty(v);
            for l in &loops {
                loop_chain = concat(&loop_chain, l);
            }
            let mut matchings = Vec::new();
            perfect_matchings(&ends, &mut vec![false; ends.len()], &mut Vec::new(), &mut matchings);
            for m in matchings {
                let mut pairs = rest.clone();
                for (k, &(i, j)) in m.iter().enumerate() {
                    let into_v = ends[i].1.reversed(g);
                    let mut w = if k == 0 { concat(&into_v, &loop_chain) } else { into_v };
                    w = concat(&w, &ends[j].1);
                    pairs.push(((ends[i].0, ends[j].0), w));
                }
                let (excursions, walks) = canonical(g, pairs);
                let profile = Profile { excursions, bag_edges: rest_edges.clone(), done: false };
                offer(&mut out, profile, Partial { weight: val.weight, edges: val.edges.clone(), walks });
            }
            self.check_budget(&out)?;
        }
        Ok(out)
    }

    fn join(&self, left: &ProfileTable, right: &ProfileTable) -> Result<ProfileTable> {
        let g = self.g();
        let mut out = ProfileTable::new();
        for (p1, v1) in left {
            for (p2, v2) in right {
                if p1.done || p2.done {
                    let (d, dv, o) = if p1.done { (p1, v1, p2) } else { (p2, v2, p1) };
                    if !o.is_blank() {
                        continue;
                    }
                    offer(&mut out, d.clone(), dv.clone());
                    continue;
                }
                if p1.bag_edges.iter().any(|e| p2.bag_edges.binary_search(e).is_ok()) {
                    continue;
                }
                let mut pairs: Vec<((Vertex, Vertex), Route)> =
                    p1.excursions.iter().copied().zip(v1.walks.iter().cloned()).collect();
                pairs.extend(p2.excursions.iter().copied().zip(v2.walks.iter().cloned()));
                let (excursions, walks) = canonical(g, pairs);
                let profile =
                    Profile { excursions, bag_edges: merge_sorted(&p1.bag_edges, &p2.bag_edges), done: false };
                let partial =
                    Partial { weight: v1.weight + v2.weight, edges: merge_sorted(&v1.edges, &v2.edges), walks };
                offer(&mut out, profile, partial);
            }
            self.check_budget(&out)?;
        }
        Ok(out)
    }
}

/// All perfect matchings of `ends`, skipping partners whose far endpoint repeats one
/// already tried (they yield the same profile).
fn perfect_matchings(
    ends: &[(Vertex, Route)],
    used: &mut Vec<bool>,
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let Some(i) = used.iter().position(|&u| !u) else {
        out.push(cur.clone());
        return;
    };
    used[i] = true;
    let mut tried = BTreeSet::new();
    for j in i + 1..ends.len() {
        if used[j] || !tried.insert(ends[j].0) {
            continue;
        }
        used[j] = true;
        cur.push((i, j));
        perfect_matchings(ends, used, cur, out);
        cur.pop();
        used[j] = false;
    }
    used[i] = false;
}

/// Result of a full DP run.
#[derive(Debug, Clone)]
pub struct DpRun {
    pub prepared: Prepared,
    /// Node tables in node order; empty unless [`DpConfig::keep_tables`] was set.
    pub tables: Vec<ProfileTable>,
    /// Subtree vertex sets per node.
    pub seen: Vec<BTreeSet<Vertex>>,
    /// The root's closed state, if any.
    pub root: Option<Partial>,
    pub total_entries: u64,
    pub max_table: u64,
}

/// Runs the DP on a prepared instance.
pub fn run_prepared(prepared: Prepared, cfg: &DpConfig) -> Result<DpRun> {
    let n = prepared.nice.nodes.len();
    let mut tables: Vec<Option<ProfileTable>> = vec![None; n];
    let mut pending: Vec<usize> = vec![0; n];
    for node in &prepared.nice.nodes {
        for &c in &node.children {
            pending[c] += 1;
        }
    }
    let (mut total, mut max_t) = (0u64, 0u64);
    let mut runner = DpRunner::new(&prepared, cfg.table_budget);
    for id in 0..n {
        let children = prepared.nice.nodes[id].children.clone();
        let table = {
            let refs: Vec<&ProfileTable> =
                children.iter().map(|&c| tables[c].as_ref().expect("child computed")).collect();
            runner.step(id, &refs)?
        };
        total += table.len() as u64;
        max_t = max_t.max(table.len() as u64);
        tables[id] = Some(table);
        if !cfg.keep_tables {
            for c in children {
                tables[c] = None;
            }
        }
    }
    let seen = std::mem::take(&mut runner.seen);
    let root = tables[prepared.nice.root].as_ref().and_then(|t| t.iter().find(|(p, _)| p.done).map(|(_, v)| v.clone()));
    let tables = if cfg.keep_tables { tables.into_iter().map(|t| t.unwrap_or_default()).collect() } else { Vec::new() };
    Ok(DpRun { prepared, tables, seen, root, total_entries: total, max_table: max_t })
}

/// Runs clamp, cycle reduction, unification, decomposition and the DP.
pub fn run_dp(inst: &Instance, cfg: &DpConfig) -> Result<DpRun> {
    run_prepared(prepare(inst, cfg)?, cfg)
}

/// Optimal route via the treewidth DP, or `None` when infeasible.
pub fn solve_tw(inst: &Instance, cfg: &DpConfig) -> Result<SolveOutcome> {
    let run = run_dp(inst, cfg)?;
    let mut out = SolveOutcome { trace: run.prepared.trace.summary(), ..Default::default() };
    out.counters.insert("nodes".into(), run.prepared.nice.nodes.len() as u64);
    out.counters.insert("width".into(), run.prepared.nice.width() as u64);
    out.counters.insert("table_entries".into(), run.total_entries);
    out.counters.insert("max_table".into(), run.max_table);
    if let Some(best) = &run.root {
        let p = &run.prepared;
        let circuit = euler_circuit(&p.instance.graph, &best.edges, p.instance.s)
            .ok_or_else(|| WrpError::InvalidRoute("root edge set is not a closed trail through the terminal".into()))?;
        let route = p.trace.lift_route(&circuit)?;
        let scale = p.trace.scale();
        debug_assert_eq!(best.weight % scale, 0);
        let cycle_cost = best.weight / scale;
        let cost = if inst.s == inst.t { cycle_cost } else { cycle_cost - 2 };
        debug_assert_eq!(route.weight(&inst.graph), cost);
        out.solution = Some(Solution { route, cost });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{route_cost, validate_route};
    use crate::oracle::brute_force_solve;

    fn inst(n: usize, edges: &[(usize, usize, u32, u64)], s: usize, t: usize, w: &[usize]) -> Instance {
        Instance::new(CapacitatedGraph::from_edges(n, edges).unwrap(), s, t, w.iter().copied()).unwrap()
    }

    fn agree(i: &Instance) {
        let dp = solve_tw(i, &DpConfig::default()).unwrap();
        let or = brute_force_solve(i, 1_000_000).unwrap();
        assert_eq!(dp.cost(), or.cost(), "instance {i:?}");
        if let Some(sol) = dp.solution {
            assert!(validate_route(i, &sol.route).is_ok(), "{:?}", validate_route(i, &sol.route));
            assert_eq!(route_cost(i, &sol.route), Ok(sol.cost));
        }
    }

    #[test]
    fn triangle_cycle() {
        agree(&inst(3, &[(0, 1, 1, 1), (1, 2, 1, 1), (2, 0, 1, 1)], 0, 0, &[1]));
    }

    #[test]
    fn trivial_instance_is_free() {
        let i = inst(2, &[(0, 1, 1, 5)], 0, 0, &[]);
        let out = solve_tw(&i, &DpConfig::default()).unwrap();
        assert_eq!(out.cost(), Some(0));
        assert!(out.solution.unwrap().route.is_empty());
    }

    #[test]
    fn capacity_two_dead_end() {
        agree(&inst(3, &[(0, 1, 2, 3), (1, 2, 1, 1)], 1, 2, &[0]));
        agree(&inst(3, &[(0, 1, 1, 3), (1, 2, 1, 1)], 1, 2, &[0]));
    }

    #[test]
    fn small_mixed_instances() {
        agree(&inst(4, &[(0, 1, 1, 1), (1, 2, 2, 2), (2, 3, 1, 1), (3, 0, 1, 4), (0, 2, 1, 1)], 0, 2, &[1, 3]));
        agree(&inst(5, &[(0, 1, 2, 1), (1, 2, 1, 1), (2, 0, 1, 1), (2, 3, 2, 2), (3, 4, 2, 1)], 4, 4, &[0, 1]));
        agree(&inst(4, &[(0, 1, 1, 1), (1, 2, 1, 1), (1, 3, 1, 1)], 0, 2, &[3]));
    }

    #[test]
    fn width_cap_is_enforced() {
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((a, b, 1, 1));
            }
        }
        let i = inst(5, &edges, 0, 1, &[2]);
        let cfg = DpConfig { width_cap: 3, ..Default::default() };
        assert!(matches!(solve_tw(&i, &cfg), Err(WrpError::WidthLimit { .. })));
    }
}
