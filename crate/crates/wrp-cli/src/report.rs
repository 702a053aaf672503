//! The solve report: line-oriented text plus an optional JSON sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wrp_core::io::{format_instance, format_route};
use wrp_core::{route_cost, validate_route, Instance, Route, SolveOutcome, WrpError};

/// SHA-256 of the instance in canonical text form.
pub fn instance_digest(inst: &Instance) -> String {
    format!("{:x}", Sha256::digest(format_instance(inst, None).as_bytes()))
}

/// Result of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: String,
    /// `None` when the instance is infeasible.
    pub cost: Option<u64>,
    pub route: Option<Route>,
    /// Wall time in milliseconds, only when timing was requested.
    pub time_ms: Option<f64>,
    pub counters: BTreeMap<String, u64>,
    pub trace: String,
}

impl RunReport {
    /// Builds a report and re-checks the route against the original instance.
    pub fn new(inst: &Instance, algorithm: &str, out: SolveOutcome, time: Option<Duration>) -> Result<Self, WrpError> {
        if let Some(sol) = &out.solution {
            let report = validate_route(inst, &sol.route);
            if let Some(v) = report.violations.first() {
                return Err(WrpError::InvalidRoute(format!("solver returned an invalid route: {v}")));
            }
            let cost = route_cost(inst, &sol.route)?;
            if cost != sol.cost {
                return Err(WrpError::InvalidRoute(format!("reported cost {} but route costs {cost}", sol.cost)));
            }
        }
        Ok(RunReport {
            instance: instance_digest(inst),
            algorithm: algorithm.to_string(),
            cost: out.cost(),
            route: out.solution.map(|s| s.route),
            time_ms: time.map(|d| d.as_secs_f64() * 1e3),
            counters: out.counters,
            trace: out.trace,
        })
    }

    /// Text form: `key value` lines, the route in route-file syntax, counters last.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance {}", self.instance);
        let _ = writeln!(out, "algorithm {}", self.algorithm);
        match (&self.cost, &self.route) {
            (Some(cost), Some(route)) => {
                let _ = writeln!(out, "status optimal");
                out.push_str(&format_route(route, *cost));
            }
            _ => {
                let _ = writeln!(out, "status infeasible");
            }
        }
        if !self.trace.is_empty() {
            let _ = writeln!(out, "trace {}", self.trace);
        }
        for (k, v) in &self.counters {
            let _ = writeln!(out, "counter {k} {v}");
        }
        if let Some(ms) = self.time_ms {
            let _ = writeln!(out, "time_ms {ms:.3}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wrp_core::{canonical, solve_tw, DpConfig};

    #[test]
    fn digest_is_stable_and_distinguishes_instances() {
        let a = canonical("fig1-left").unwrap();
        let b = canonical("fig1-right").unwrap();
        assert_eq!(instance_digest(&a), instance_digest(&a.clone()));
        assert_ne!(instance_digest(&a), instance_digest(&b));
        assert_eq!(instance_digest(&a).len(), 64);
    }

    #[test]
    fn text_report_has_route_and_cost() {
        let inst = canonical("fig1-right").unwrap();
        let out = solve_tw(&inst, &DpConfig::default()).unwrap();
        let r = RunReport::new(&inst, "tw", out, None).unwrap();
        let text = r.to_text();
        assert!(text.contains("status optimal\nroute 0 ;"));
        assert!(text.contains("\ncost 6\n"));
        assert!(!text.contains("time_ms"));
    }
}
