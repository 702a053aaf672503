//! Benchmark specs and result tables.
//!
//! A spec has one sweep per line, as `key=value` tokens:
//! `family=partial-ktree n=8..12 k=2 seeds=3 algos=tw,oracle`. Ranges are inclusive.
//! Other keys: `waypoints`, `keep`, `max_edges`, `r` (also a range), `base`.

use std::fmt::Write as _;
use std::time::Instant;

use wrp_core::instances::{generate, Family, GeneratorSpec};
use wrp_core::{Result, WrpError};

use crate::{solve_with, Algo, Limits};

/// One line of a bench spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub template: GeneratorSpec,
    pub sizes: Vec<usize>,
    /// Whether `sizes` ranges over `n` (true) or `r` (false).
    pub sizes_are_n: bool,
    pub seeds: u64,
    pub algos: Vec<Algo>,
}

/// One measured row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: Family,
    pub size: usize,
    pub vertices: usize,
    pub seed: u64,
    pub algo: Algo,
    /// Cost, `infeasible`, `limit: ...` or `skipped`.
    pub outcome: String,
    pub time_ms: f64,
}

fn perr(line: usize, message: String) -> WrpError {
    WrpError::Parse { line, message }
}

fn range(line: usize, v: &str) -> Result<Vec<usize>> {
    let bad = || perr(line, format!("bad range '{v}'"));
    match v.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![v.parse().map_err(|_| bad())?]),
    }
}

/// Parses a bench spec.
pub fn parse_spec(text: &str) -> Result<Vec<Sweep>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut family = None;
        let mut fields = Vec::new();
        for tok in body.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| perr(line, format!("expected key=value, got '{tok}'")))?;
            if k == "family" {
                family = Some(v.parse::<Family>().map_err(|e| perr(line, e.to_string()))?);
            } else {
                fields.push((k, v));
            }
        }
        let family = family.ok_or_else(|| perr(line, "missing family".into()))?;
        let mut sweep = Sweep {
            template: GeneratorSpec::new(family),
            sizes: vec![],
            sizes_are_n: family == Family::PartialKtree,
            seeds: 1,
            algos: vec![Algo::Tw],
        };
        let num = |v: &str| v.parse::<usize>().map_err(|_| perr(line, format!("bad number '{v}'")));
        for (k, v) in fields {
            match k {
                "n" => {
                    sweep.sizes = range(line, v)?;
                    sweep.sizes_are_n = true;
                }
                "r" => {
                    sweep.sizes = range(line, v)?;
                    sweep.sizes_are_n = false;
                }
                "k" => sweep.template.k = num(v)?,
                "waypoints" => sweep.template.waypoints = num(v)?,
                "max_edges" => sweep.template.max_edges = Some(num(v)?),
                "keep" => sweep.template.keep = v.parse().map_err(|_| perr(line, format!("bad probability '{v}'")))?,
                "base" => sweep.template.base = v.to_string(),
                "seeds" => sweep.seeds = num(v)? as u64,
                "algos" => {
                    sweep.algos =
                        v.split(',').map(|a| a.parse::<Algo>().map_err(|e| perr(line, e))).collect::<Result<_>>()?
                }
                _ => return Err(perr(line, format!("unknown key '{k}'"))),
            }
        }
        if sweep.sizes.is_empty() {
            sweep.sizes = vec![if sweep.sizes_are_n { sweep.template.n } else { sweep.template.r as usize }];
        }
        out.push(sweep);
    }
    Ok(out)
}

/// Runs every sweep in order. Seeds are `base_seed, base_seed + 1, ...`. The oracle
/// runs only on instances with at most [`crate::ORACLE_MAX_N`] vertices; limit errors
/// are recorded in the row and the run continues.
pub fn run(sweeps: &[Sweep], base_seed: u64, limits: &Limits) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for sweep in sweeps {
        for &size in &sweep.sizes {
            for i in 0..sweep.seeds {
                let mut spec = sweep.template.clone();
                spec.seed = base_seed + i;
                if sweep.sizes_are_n {
                    spec.n = size;
                } else {
                    spec.r = size as u32;
                }
                let inst = generate(&spec)?.instance;
                for &algo in &sweep.algos {
                    let mut row = Row {
                        family: spec.family,
                        size,
                        vertices: inst.n(),
                        seed: spec.seed,
                        algo,
                        outcome: String::new(),
                        time_ms: 0.0,
                    };
                    if algo == Algo::Oracle && inst.n() > crate::ORACLE_MAX_N {
                        row.outcome = "skipped".into();
                        rows.push(row);
                        continue;
                    }
                    let t0 = Instant::now();
                    let res = solve_with(algo, &inst, limits);
                    row.time_ms = t0.elapsed().as_secs_f64() * 1e3;
                    row.outcome = match res {
                        Ok((_, out)) => out.cost().map_or("infeasible".into(), |c| c.to_string()),
                        Err(e) if e.is_limit() => format!("limit: {e}"),
                        Err(e) => return Err(e),
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

const HEADER: [&str; 7] = ["family", "size", "vertices", "seed", "algo", "cost", "time_ms"];

fn cells(r: &Row) -> [String; 7] {
    [
        r.family.to_string(),
        r.size.to_string(),
        r.vertices.to_string(),
        r.seed.to_string(),
        r.algo.to_string(),
        r.outcome.clone(),
        format!("{:.3}", r.time_ms),
    ]
}

/// Aligned text table.
pub fn format_table(rows: &[Row]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(cells).collect();
    let mut width = HEADER.map(str::len);
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cols: &[String]| {
        let parts: Vec<String> = cols.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&HEADER.map(String::from));
    for r in &body {
        line(r);
    }
    out
}

/// Comma-separated table with a header line.
pub fn format_csv(rows: &[Row]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&cells(r).join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_and_algos() {
        let s = parse_spec("# sweep\nfamily=partial-ktree n=8..10 k=2 seeds=2 algos=tw,oracle\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].sizes, vec![8, 9, 10]);
        assert_eq!(s[0].algos, vec![Algo::Tw, Algo::Oracle]);
        assert_eq!(s[0].seeds, 2);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse_spec("family=nope"), Err(WrpError::Parse { line: 1, .. })));
        assert!(matches!(parse_spec("\nfamily=ham-encode n=5..2"), Err(WrpError::Parse { line: 2, .. })));
        assert!(parse_spec("n=3").is_err());
    }

    #[test]
    fn oracle_is_skipped_on_large_instances() {
        let sweeps = parse_spec("family=partial-ktree n=8..9 k=2 algos=tw,oracle").unwrap();
        let rows = run(&sweeps, 0, &Limits::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_ne!(rows[1].outcome, "skipped");
        assert_eq!(rows[3].outcome, "skipped");
        assert_eq!(rows[0].outcome, rows[1].outcome);
        let table = format_table(&rows);
        assert_eq!(table.lines().count(), 5);
        assert!(format_csv(&rows).starts_with("family,size,vertices,seed,algo,cost,time_ms\n"));
    }
}
