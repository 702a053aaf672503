//! Fixed instances with known optima, checked across every solver.

use wrp_core::instances::{base_graph, gen_bipartite_trees_gadget, gen_grid_tail, ham_encode};
use wrp_core::linegraph::DEFAULT_MAX_K;
use wrp_core::oracle::DEFAULT_STATE_BUDGET;
use wrp_core::{
    brute_force_solve, canonical, route_cost, solve_tw, solve_via_kcycle, validate_route, CapacitatedGraph, DpConfig,
    ExhaustiveBackend, Instance, Route, Step,
};

fn all_costs(inst: &Instance) -> [Option<u64>; 3] {
    let tw = solve_tw(inst, &DpConfig::default()).unwrap();
    let lg = solve_via_kcycle(inst, &ExhaustiveBackend::default(), DEFAULT_MAX_K).unwrap();
    let or = brute_force_solve(inst, DEFAULT_STATE_BUDGET).unwrap();
    for out in [&tw, &lg, &or] {
        if let Some(sol) = &out.solution {
            assert!(validate_route(inst, &sol.route).is_ok());
            assert_eq!(route_cost(inst, &sol.route).unwrap(), sol.cost);
        }
    }
    [tw.cost(), lg.cost(), or.cost()]
}

#[test]
fn fig1_left_costs_seven() {
    assert_eq!(all_costs(&canonical("fig1-left").unwrap()), [Some(7); 3]);
}

#[test]
fn fig1_right_costs_six() {
    assert_eq!(all_costs(&canonical("fig1-right").unwrap()), [Some(6); 3]);
}

#[test]
fn fig1_left_depicted_walk_is_valid() {
    let inst = canonical("fig1-left").unwrap();
    let g = &inst.graph;
    // 0-5-6-7-3-2-3-4, using the capacity-2 edge 2-3 in both directions.
    let mut r = Route::empty(0);
    for (e, from) in [(4, 0), (5, 5), (6, 6), (9, 7), (2, 3), (2, 2), (3, 3)] {
        r.steps.push(Step::leaving(g, e, from));
    }
    assert!(validate_route(&inst, &r).is_ok());
    assert_eq!(route_cost(&inst, &r).unwrap(), 7);
}

#[test]
fn fig1_left_with_unit_capacities() {
    let inst = canonical("fig1-left").unwrap();
    let mut g = CapacitatedGraph::new(inst.n());
    for e in inst.graph.edges() {
        g.add_edge(e.u, e.v, 1, e.weight).unwrap();
    }
    let unit = Instance::new(g, inst.s, inst.t, inst.waypoints.iter().copied()).unwrap();
    let [tw, lg, or] = all_costs(&unit);
    assert_eq!(tw, or);
    assert_eq!(lg, or);
    assert!(or.is_none_or(|c| c > 7));
}

#[test]
fn hamiltonian_encoding_on_six_cycle() {
    let (cycle, _) = base_graph("cycle:6").unwrap();
    assert_eq!(all_costs(&ham_encode(&cycle).unwrap()), [Some(6); 3]);
    let (path, _) = base_graph("path:6").unwrap();
    assert_eq!(all_costs(&ham_encode(&path).unwrap()), [None; 3]);
}

#[test]
fn gadget_adds_the_path_detour() {
    let (cycle, _) = base_graph("cycle:6").unwrap();
    let base = ham_encode(&cycle).unwrap();
    let (gadget, _) = gen_bipartite_trees_gadget(&base, 0, 2).unwrap();
    let before = brute_force_solve(&base, DEFAULT_STATE_BUDGET).unwrap().cost();
    let after = solve_tw(&gadget, &DpConfig::default()).unwrap().cost();
    assert_eq!(before, Some(6));
    assert_eq!(after, Some(8));
}

#[test]
fn grid_tail_keeps_the_optimum() {
    let (g, coords) = base_graph("grid:3x2").unwrap();
    let coords = coords.unwrap();
    let base = Instance::new(g, 0, 4, [2]).unwrap();
    let (tailed, _) = gen_grid_tail(&base, &coords, 1).unwrap();
    assert!(tailed.n() > base.n());
    let before = brute_force_solve(&base, DEFAULT_STATE_BUDGET).unwrap().cost();
    let after = brute_force_solve(&tailed, DEFAULT_STATE_BUDGET).unwrap().cost();
    assert_eq!(before, Some(4));
    assert_eq!(before, after);
}

#[test]
fn trivial_instance_costs_zero_everywhere() {
    let g = CapacitatedGraph::from_edges(2, &[(0, 1, 1, 3)]).unwrap();
    let inst = Instance::new(g, 1, 1, []).unwrap();
    assert_eq!(all_costs(&inst), [Some(0); 3]);
}
