//! Result types shared by all solvers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::Route;

/// An optimal route with its cost on the original instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub route: Route,
    pub cost: u64,
}

/// Solver output: an optimum or `None` for infeasible, plus work counters.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: Option<Solution>,
    /// Named counters such as expanded states or table entries.
    pub counters: BTreeMap<String, u64>,
    /// Summary of the transforms applied before solving.
    pub trace: String,
}

impl SolveOutcome {
    /// Optimal cost, or `None` when infeasible.
    pub fn cost(&self) -> Option<u64> {
        self.solution.as_ref().map(|s| s.cost)
    }
}
