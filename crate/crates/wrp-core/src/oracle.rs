//! Brute-force uniform-cost search used as ground truth.
//!
//! A state is the current vertex plus the remaining capacity of every edge. The set
//! of visited vertices is a function of the capacity vector, so it needs no extra field.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Result, WrpError};
use crate::graph::{Instance, Route, Step, Vertex};
use crate::solution::{Solution, SolveOutcome};
use crate::transform::clamp_instance;

/// Default cap on distinct search states.
pub const DEFAULT_STATE_BUDGET: usize = 4_000_000;

type Key = (Vertex, Box<[u8]>);

/// Exact optimum by uniform-cost search over (vertex, remaining capacities).
///
/// Capacities are clamped to 2 first. Fails with [`WrpError::Budget`] once more than
/// `budget` distinct states have been generated.
pub fn brute_force_solve(inst: &Instance, budget: usize) -> Result<SolveOutcome> {
    let (inst, _) = clamp_instance(inst);
    let g = &inst.graph;
    let full: Box<[u8]> = g.edges().iter().map(|e| e.capacity as u8).collect();
    let waypoint_edges: Vec<(Vertex, Vec<usize>)> =
        inst.waypoints.iter().map(|&w| (w, g.incident(w).to_vec())).collect();
    let covered =
        |caps: &[u8]| waypoint_edges.iter().all(|(w, es)| *w == inst.s || es.iter().any(|&e| caps[e] < full[e]));

    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut dist: Vec<u64> = Vec::new();
    let mut parent: Vec<Option<(usize, Step)>> = Vec::new();
    let mut settled: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();

    let start: Key = (inst.s, full.clone());
    index.insert(start.clone(), 0);
    keys.push(start);
    dist.push(0);
    parent.push(None);
    settled.push(false);
    heap.push(Reverse((0u64, 0usize)));

    let mut expanded = 0u64;
    while let Some(Reverse((d, id))) = heap.pop() {
        if settled[id] || d > dist[id] {
            continue;
        }
        settled[id] = true;
        expanded += 1;
        let (v, caps) = keys[id].clone();
        if v == inst.t && covered(&caps) {
            let mut steps = Vec::new();
            let mut cur = id;
            while let Some((p, step)) = parent[cur] {
                steps.push(step);
                cur = p;
            }
            steps.reverse();
            let route = Route { start: inst.s, steps };
            let mut out = SolveOutcome { solution: Some(Solution { route, cost: d }), ..Default::default() };
            out.counters.insert("states".into(), keys.len() as u64);
            out.counters.insert("expanded".into(), expanded);
            return Ok(out);
        }
        for &e in g.incident(v) {
            if caps[e] == 0 {
                continue;
            }
            let step = Step::leaving(g, e, v);
            let mut next_caps = caps.clone();
            next_caps[e] -= 1;
            let key: Key = (step.head(g), next_caps);
            let nd = d + g.edge(e).weight;
            let nid = match index.get(&key) {
                Some(&i) => i,
                None => {
                    if keys.len() >= budget {
                        return Err(WrpError::Budget { what: "oracle state", limit: budget });
                    }
                    let i = keys.len();
                    index.insert(key.clone(), i);
                    keys.push(key);
                    dist.push(u64::MAX);
                    parent.push(None);
                    settled.push(false);
                    i
                }
            };
            if nd < dist[nid] {
                dist[nid] = nd;
                parent[nid] = Some((id, step));
                heap.push(Reverse((nd, nid)));
            }
        }
    }
    let mut out = SolveOutcome::default();
    out.counters.insert("states".into(), keys.len() as u64);
    out.counters.insert("expanded".into(), expanded);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{route_cost, CapacitatedGraph};

    #[test]
    fn triangle_needs_the_whole_cycle() {
        let g = CapacitatedGraph::from_edges(3, &[(0, 1, 1, 1), (1, 2, 1, 1), (2, 0, 1, 1)]).unwrap();
        let inst = Instance::new(g, 0, 0, [1]).unwrap();
        let out = brute_force_solve(&inst, 1000).unwrap();
        let sol = out.solution.unwrap();
        assert_eq!(sol.cost, 3);
        assert_eq!(route_cost(&inst, &sol.route), Ok(3));
    }

    #[test]
    fn capacity_two_allows_back_and_forth() {
        let g = CapacitatedGraph::from_edges(2, &[(0, 1, 2, 4)]).unwrap();
        let inst = Instance::new(g, 0, 0, [1]).unwrap();
        assert_eq!(brute_force_solve(&inst, 100).unwrap().cost(), Some(8));
    }

    #[test]
    fn dead_end_waypoint_is_infeasible_with_unit_capacity() {
        let g = CapacitatedGraph::from_edges(3, &[(0, 1, 1, 1), (1, 2, 1, 1)]).unwrap();
        let inst = Instance::new(g, 0, 1, [2]).unwrap();
        let out = brute_force_solve(&inst, 100).unwrap();
        assert!(out.solution.is_none());
        assert!(out.counters["states"] > 0);
    }

    #[test]
    fn trivial_instance_costs_zero() {
        let g = CapacitatedGraph::from_edges(2, &[(0, 1, 1, 1)]).unwrap();
        let inst = Instance::new(g, 1, 1, []).unwrap();
        let sol = brute_force_solve(&inst, 10).unwrap().solution.unwrap();
        assert_eq!(sol.cost, 0);
        assert!(sol.route.is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let g = CapacitatedGraph::from_edges(3, &[(0, 1, 2, 1), (1, 2, 2, 1), (2, 0, 2, 1)]).unwrap();
        let inst = Instance::new(g, 0, 0, [1, 2]).unwrap();
        assert!(matches!(brute_force_solve(&inst, 2), Err(WrpError::Budget { .. })));
    }
}
