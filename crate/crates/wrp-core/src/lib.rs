//! Exact solvers for the waypoint routing problem: find a minimum-weight walk from
//! `s` to `t` that visits every waypoint while using each edge at most its capacity.

pub mod dp;
pub mod error;
pub mod euler;
pub mod graph;
pub mod instances;
pub mod io;
pub mod linegraph;
pub mod oracle;
pub mod signature;
pub mod solution;
pub mod transform;
pub mod treewidth;

pub use dp::{solve_tw, DpConfig};
pub use error::{Result, WrpError};
pub use graph::{route_cost, validate_route, CapacitatedGraph, Edge, EdgeId, Instance, Route, Step, Vertex};
pub use instances::{canonical, generate, Family, GeneratorSpec};
pub use linegraph::{solve_via_kcycle, CycleBackend, ExhaustiveBackend};
pub use oracle::brute_force_solve;
pub use solution::{Solution, SolveOutcome};
