//! Signature tables derived from DP runs, checked against independent enumerators.

mod common;

use std::collections::BTreeSet;

use common::{naive_signatures, random_instance};
use wrp_core::signature::enumerate_signatures;
use wrp_core::{canonical, CapacitatedGraph, Instance};

fn audit(inst: &Instance) -> usize {
    common::audit_signatures(inst).unwrap()
}

#[test]
fn tables_on_canonical_instances() {
    assert!(audit(&canonical("fig1-right").unwrap()) > 0);
    assert!(audit(&canonical("fig1-left").unwrap()) > 0);
}

#[test]
fn tables_on_random_instances() {
    let mut compared = 0;
    for seed in 0..12 {
        compared += audit(&random_instance(seed));
    }
    assert!(compared > 50);
}

#[test]
fn two_enumerators_agree() {
    let g = CapacitatedGraph::from_edges(4, &[(0, 1, 1, 1), (1, 2, 1, 1), (0, 2, 1, 1), (2, 3, 1, 1)]).unwrap();
    for bag in [vec![], vec![0], vec![0, 1], vec![0, 1, 2], vec![1, 3], vec![1, 2, 3]] {
        let fast: BTreeSet<_> = enumerate_signatures(&g, &bag, 8).unwrap().into_iter().collect();
        assert_eq!(fast, naive_signatures(&g, &bag), "bag {bag:?}");
    }
}
