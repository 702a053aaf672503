//! Command-line surface: `solve`, `verify`, `decompose`, `gen` and `bench`.
//!
//! Exit codes: 0 on success (including an infeasible verdict), 1 when `verify`
//! rejects a route, 2 on parse or I/O errors, 3 when a solver limit is hit.

pub mod bench;
pub mod report;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;
use wrp_core::dp::{run_dp, DEFAULT_WIDTH_CAP};
use wrp_core::instances::{generate, Family, GeneratorSpec};
use wrp_core::io::{format_decomposition, format_instance, format_nice, parse_instance, parse_route};
use wrp_core::linegraph::{build_waypoint_line_graph, normalize_instance, DEFAULT_MAX_K};
use wrp_core::oracle::DEFAULT_STATE_BUDGET;
use wrp_core::signature::{derive_all, format_tables};
use wrp_core::transform::reduce_to_cycle;
use wrp_core::treewidth::{decompose, make_nice, DecomposeMode, DEFAULT_EXACT_BUDGET};
use wrp_core::{
    brute_force_solve, route_cost, solve_tw, solve_via_kcycle, validate_route, DpConfig, ExhaustiveBackend, Instance,
    SolveOutcome, WrpError,
};

pub use report::RunReport;

/// `auto` uses the oracle up to this many vertices.
pub const ORACLE_MAX_N: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "wrp", version, about = "Exact waypoint routing solvers")]
pub struct Cli {
    /// Seed for `gen` and `bench`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest decomposition width the DP accepts.
    #[arg(long, global = true, default_value_t = DEFAULT_WIDTH_CAP)]
    pub width_cap: usize,
    /// Largest waypoint count the line-graph backend accepts.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
    /// State budget of the brute-force oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_BUDGET)]
    pub state_budget: usize,
    /// Write the DP signature tables of a `tw` run to `<dir>/tables.txt`.
    #[arg(long, global = true)]
    pub dump_tables: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file and print a report.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "auto")]
        algo: Algo,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Include wall time in the report.
        #[arg(long)]
        timing: bool,
        /// Write the waypoint line graph with `prov` lines (linegraph only).
        #[arg(long)]
        dump_linegraph: Option<PathBuf>,
    },
    /// Check a route file against an instance file.
    Verify { instance: PathBuf, route: PathBuf },
    /// Print a tree decomposition of the instance graph.
    Decompose {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Print the nice form.
        #[arg(long)]
        nice: bool,
    },
    /// Generate an instance.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        waypoints: Option<usize>,
        #[arg(long)]
        base: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a bench spec and print a table.
    Bench {
        spec: PathBuf,
        /// Also write the rows as comma-separated values.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Heuristic,
}

/// Solver choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Auto,
    Tw,
    Linegraph,
    Oracle,
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Algo::Auto),
            "tw" => Ok(Algo::Tw),
            "linegraph" => Ok(Algo::Linegraph),
            "oracle" => Ok(Algo::Oracle),
            _ => Err(format!("unknown algorithm '{s}' (auto, tw, linegraph, oracle)")),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Auto => "auto",
            Algo::Tw => "tw",
            Algo::Linegraph => "linegraph",
            Algo::Oracle => "oracle",
        })
    }
}

/// Solver limits taken from the global flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub width_cap: usize,
    pub max_k: usize,
    pub state_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { width_cap: DEFAULT_WIDTH_CAP, max_k: DEFAULT_MAX_K, state_budget: DEFAULT_STATE_BUDGET }
    }
}

impl Limits {
    fn dp(&self) -> DpConfig {
        DpConfig { width_cap: self.width_cap, ..DpConfig::default() }
    }
}

/// Failures mapped to exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] WrpError),
    #[error("no solver applies: {0}")]
    NoSolver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_limit() => 3,
            CliError::NoSolver(_) => 3,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Runs one solver. `auto` takes the oracle up to [`ORACLE_MAX_N`] vertices, then the
/// DP when the heuristic width of the cycle-reduced graph fits the cap, then the line
/// graph when the waypoint count fits. Returns the solver actually used.
pub fn solve_with(algo: Algo, inst: &Instance, limits: &Limits) -> wrp_core::Result<(Algo, SolveOutcome)> {
    let out = match algo {
        Algo::Tw => solve_tw(inst, &limits.dp())?,
        Algo::Linegraph => solve_via_kcycle(inst, &ExhaustiveBackend::default(), limits.max_k)?,
        Algo::Oracle => brute_force_solve(inst, limits.state_budget)?,
        Algo::Auto => return solve_auto(inst, limits),
    };
    Ok((algo, out))
}

fn solve_auto(inst: &Instance, limits: &Limits) -> wrp_core::Result<(Algo, SolveOutcome)> {
    if inst.n() <= ORACLE_MAX_N {
        return solve_with(Algo::Oracle, inst, limits);
    }
    let (cyc, _) = reduce_to_cycle(inst, 1);
    let width = decompose(&cyc.graph, DecomposeMode::Heuristic)?.width();
    if width < limits.width_cap {
        match solve_with(Algo::Tw, inst, limits) {
            Err(e) if e.is_limit() => {}
            other => return other,
        }
    }
    if inst.k() <= limits.max_k {
        return solve_with(Algo::Linegraph, inst, limits);
    }
    Err(WrpError::WidthLimit { width: width + 1, cap: limits.width_cap })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(parse_instance(&read(path)?)?)
}

/// Runs a parsed command line, writing normal output to `out`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let limits = Limits { width_cap: cli.width_cap, max_k: cli.max_k, state_budget: cli.state_budget };
    let mut text = String::new();
    let code = match &cli.command {
        Command::Solve { file, algo, json, timing, dump_linegraph } => {
            let inst = load_instance(file)?;
            let t0 = Instant::now();
            let (used, outcome) = solve_with(*algo, &inst, &limits).map_err(|e| match e {
                WrpError::WidthLimit { .. } | WrpError::TooManyWaypoints { .. } if *algo == Algo::Auto => {
                    CliError::NoSolver(format!(
                        "{e}; raise --width-cap or --max-k, or use --algo oracle on small instances"
                    ))
                }
                e => e.into(),
            })?;
            let elapsed = t0.elapsed();
            if let Some(dir) = &cli.dump_tables {
                if used == Algo::Tw {
                    let run = run_dp(&inst, &DpConfig { keep_tables: true, ..limits.dp() })?;
                    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
                    write(&dir.join("tables.txt"), &format_tables(&derive_all(&run)?))?;
                }
            }
            if let Some(path) = dump_linegraph {
                let (cyc, _) = reduce_to_cycle(&inst, 1);
                let (norm, _) = normalize_instance(&cyc)?;
                write(path, &build_waypoint_line_graph(&norm)?.dump())?;
            }
            let report = RunReport::new(&inst, &used.to_string(), outcome, timing.then_some(elapsed))?;
            if let Some(path) = json {
                let body = serde_json::to_string_pretty(&report).expect("report serializes");
                write(path, &(body + "\n"))?;
            }
            text = report.to_text();
            0
        }
        Command::Verify { instance, route } => {
            let inst = load_instance(instance)?;
            let (r, declared) = parse_route(&read(route)?)?;
            let report = validate_route(&inst, &r);
            if report.is_ok() {
                let cost = route_cost(&inst, &r)?;
                text.push_str(&format!("valid\ncost {cost}\n"));
                match declared {
                    Some(d) if d != cost => {
                        text.push_str(&format!("declared cost {d} does not match\n"));
                        1
                    }
                    _ => 0,
                }
            } else {
                text.push_str("invalid\n");
                for v in &report.violations {
                    text.push_str(&format!("violation {v}\n"));
                }
                1
            }
        }
        Command::Decompose { file, mode, nice } => {
            let inst = load_instance(file)?;
            let mode = match mode {
                Mode::Exact => DecomposeMode::Exact { budget: DEFAULT_EXACT_BUDGET },
                Mode::Heuristic => DecomposeMode::Heuristic,
            };
            let td = decompose(&inst.graph, mode)?;
            text.push_str(&format!("# width {}\n", td.width()));
            text.push_str(&if *nice { format_nice(&make_nice(&td)) } else { format_decomposition(&td) });
            0
        }
        Command::Gen { family, n, k, r, waypoints, base, output } => {
            let mut spec = GeneratorSpec { seed: cli.seed, ..GeneratorSpec::new(*family) };
            spec.n = n.unwrap_or(spec.n);
            spec.k = k.unwrap_or(spec.k);
            spec.r = r.unwrap_or(spec.r);
            spec.waypoints = waypoints.unwrap_or(spec.waypoints);
            if let Some(b) = base {
                spec.base = b.clone();
            }
            let g = generate(&spec)?;
            let body = format_instance(&g.instance, g.coords.as_ref());
            match output {
                Some(path) => write(path, &body)?,
                None => text = body,
            }
            0
        }
        Command::Bench { spec, csv } => {
            let sweeps = bench::parse_spec(&read(spec)?)?;
            let rows = bench::run(&sweeps, cli.seed, &limits)?;
            if let Some(path) = csv {
                write(path, &bench::format_csv(&rows))?;
            }
            text = bench::format_table(&rows);
            0
        }
    };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
    Ok(code)
}
