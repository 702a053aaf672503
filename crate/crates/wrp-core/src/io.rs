//! Line-oriented text formats for instances, routes and decompositions.
//!
//! Instance: `v <count>`, `e <u> <v> <cap> <weight>`, `s <v>`, `t <v>`, `w <v>`,
//! optional `coord <v> <x> <y>`. Route: `route <start> ; <edge>:<+|-> ...` and `cost <int>`.
//! Decomposition: `node <id> : <v...>`, `link <a> <b>`, and for nice ones
//! `kind <id> leaf|forget:<v>|introduce:<v>|join` plus `root <id>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Result, WrpError};
use crate::graph::{CapacitatedGraph, Instance, Route, Step, Vertex};
use crate::treewidth::{NiceNode, NiceTreeDecomposition, NodeKind, TreeDecomposition};

/// Planar coordinates attached to vertices by grid generators.
pub type Coords = BTreeMap<Vertex, (i64, i64)>;

fn perr(line: usize, message: impl Into<String>) -> WrpError {
    WrpError::Parse { line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("bad {what} '{tok}'")))
}

/// Parses an instance and any `coord` lines.
pub fn parse_instance_with_coords(text: &str) -> Result<(Instance, Coords)> {
    let mut graph: Option<CapacitatedGraph> = None;
    let (mut s, mut t) = (None, None);
    let mut waypoints = Vec::new();
    let mut coords = Coords::new();
    for (ln, toks) in content_lines(text) {
        let arity = |k: usize| -> Result<()> {
            if toks.len() == k {
                Ok(())
            } else {
                Err(perr(ln, format!("'{}' expects {} fields", toks[0], k - 1)))
            }
        };
        match toks[0] {
            "v" => {
                arity(2)?;
                if graph.is_some() {
                    return Err(perr(ln, "duplicate 'v' line"));
                }
                graph = Some(CapacitatedGraph::new(num(ln, toks.get(1), "vertex count")?));
            }
            "e" => {
                arity(5)?;
                let g = graph.as_mut().ok_or_else(|| perr(ln, "'e' before 'v'"))?;
                let u = num(ln, toks.get(1), "endpoint")?;
                let v = num(ln, toks.get(2), "endpoint")?;
                let c = num(ln, toks.get(3), "capacity")?;
                let w = num(ln, toks.get(4), "weight")?;
                g.add_edge(u, v, c, w).map_err(|e| perr(ln, e.to_string()))?;
            }
            "s" | "t" => {
                arity(2)?;
                let x: Vertex = num(ln, toks.get(1), "vertex")?;
                let slot = if toks[0] == "s" { &mut s } else { &mut t };
                if slot.replace(x).is_some() {
                    return Err(perr(ln, format!("duplicate '{}' line", toks[0])));
                }
            }
            "w" => {
                arity(2)?;
                waypoints.push(num(ln, toks.get(1), "waypoint")?);
            }
            "coord" => {
                arity(4)?;
                let v = num(ln, toks.get(1), "vertex")?;
                let x = num(ln, toks.get(2), "x")?;
                let y = num(ln, toks.get(3), "y")?;
                coords.insert(v, (x, y));
            }
            other => return Err(perr(ln, format!("unknown directive '{other}'"))),
        }
    }
    let graph = graph.ok_or_else(|| perr(0, "missing 'v' line"))?;
    let s = s.ok_or_else(|| perr(0, "missing 's' line"))?;
    let t = t.ok_or_else(|| perr(0, "missing 't' line"))?;
    let inst = Instance::new(graph, s, t, waypoints)?;
    Ok((inst, coords))
}

/// Parses an instance, ignoring coordinates.
pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_instance_with_coords(text).map(|(i, _)| i)
}

/// Writes the edge list part shared by instance and graph dumps.
pub fn format_graph(g: &CapacitatedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "v {}", g.vertex_count());
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {} {}", e.u, e.v, e.capacity, e.weight);
    }
    out
}

/// Canonical instance text; coordinates are appended when given.
pub fn format_instance(inst: &Instance, coords: Option<&Coords>) -> String {
    let mut out = format_graph(&inst.graph);
    let _ = writeln!(out, "s {}", inst.s);
    let _ = writeln!(out, "t {}", inst.t);
    for w in &inst.waypoints {
        let _ = writeln!(out, "w {w}");
    }
    if let Some(coords) = coords {
        for (v, (x, y)) in coords {
            let _ = writeln!(out, "coord {v} {x} {y}");
        }
    }
    out
}

/// Route text with a trailing cost line.
pub fn format_route(r: &Route, cost: u64) -> String {
    let mut out = format!("route {} ;", r.start);
    for s in &r.steps {
        let _ = write!(out, " {}:{}", s.edge, if s.forward { '+' } else { '-' });
    }
    let _ = write!(out, "\ncost {cost}\n");
    out
}

/// Parses route text, returning the route and the declared cost if present.
pub fn parse_route(text: &str) -> Result<(Route, Option<u64>)> {
    let mut route = None;
    let mut cost = None;
    for (ln, toks) in content_lines(text) {
        match toks[0] {
            "route" => {
                let start = num(ln, toks.get(1), "start vertex")?;
                if toks.get(2) != Some(&";") {
                    return Err(perr(ln, "expected ';' after start vertex"));
                }
                let mut steps = Vec::new();
                for tok in &toks[3..] {
                    let (e, d) = tok.split_once(':').ok_or_else(|| perr(ln, format!("bad step '{tok}'")))?;
                    let edge = e.parse().map_err(|_| perr(ln, format!("bad edge id '{e}'")))?;
                    let forward = match d {
                        "+" => true,
                        "-" => false,
                        _ => return Err(perr(ln, format!("bad direction '{d}'"))),
                    };
                    steps.push(Step { edge, forward });
                }
                if route.replace(Route { start, steps }).is_some() {
                    return Err(perr(ln, "duplicate 'route' line"));
                }
            }
            "cost" => cost = Some(num(ln, toks.get(1), "cost")?),
            other => return Err(perr(ln, format!("unknown directive '{other}'"))),
        }
    }
    let route = route.ok_or_else(|| perr(0, "missing 'route' line"))?;
    Ok((route, cost))
}

fn write_bag(out: &mut String, id: usize, bag: &[Vertex]) {
    let _ = write!(out, "node {id} :");
    for v in bag {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

/// Plain decomposition text.
pub fn format_decomposition(td: &TreeDecomposition) -> String {
    let mut out = String::new();
    for (i, bag) in td.bags.iter().enumerate() {
        write_bag(&mut out, i, bag);
    }
    for (a, b) in &td.links {
        let _ = writeln!(out, "link {a} {b}");
    }
    out
}

/// Nice decomposition text with `kind` and `root` lines.
pub fn format_nice(nice: &NiceTreeDecomposition) -> String {
    let mut out = String::new();
    for (i, node) in nice.nodes.iter().enumerate() {
        write_bag(&mut out, i, &node.bag);
    }
    for (i, node) in nice.nodes.iter().enumerate() {
        for &c in &node.children {
            let _ = writeln!(out, "link {i} {c}");
        }
    }
    for (i, node) in nice.nodes.iter().enumerate() {
        let kind = match node.kind {
            NodeKind::Leaf => "leaf".to_string(),
            NodeKind::Forget(v) => format!("forget:{v}"),
            NodeKind::Introduce(v) => format!("introduce:{v}"),
            NodeKind::Join => "join".to_string(),
        };
        let _ = writeln!(out, "kind {i} {kind}");
    }
    let _ = writeln!(out, "root {}", nice.root);
    out
}

/// Parses a plain decomposition (`kind`/`root` lines are rejected).
pub fn parse_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut bags: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    let mut links = Vec::new();
    for (ln, toks) in content_lines(text) {
        match toks[0] {
            "node" => {
                let id = num(ln, toks.get(1), "node id")?;
                if toks.get(2) != Some(&":") {
                    return Err(perr(ln, "expected ':' after node id"));
                }
                let mut bag = Vec::new();
                for tok in &toks[3..] {
                    bag.push(tok.parse().map_err(|_| perr(ln, format!("bad vertex '{tok}'")))?);
                }
                bag.sort_unstable();
                bag.dedup();
                if bags.insert(id, bag).is_some() {
                    return Err(perr(ln, format!("duplicate node {id}")));
                }
            }
            "link" => {
                let a = num(ln, toks.get(1), "node id")?;
                let b = num(ln, toks.get(2), "node id")?;
                links.push((a, b));
            }
            other => return Err(perr(ln, format!("unknown directive '{other}'"))),
        }
    }
    let n = bags.len();
    if bags.keys().enumerate().any(|(i, &k)| i != k) {
        return Err(perr(0, "node ids must be 0..n-1"));
    }
    if links.iter().any(|&(a, b)| a >= n || b >= n) {
        return Err(perr(0, "link references an unknown node"));
    }
    Ok(TreeDecomposition { bags: bags.into_values().collect(), links })
}

/// Parses a nice decomposition; node ids must be listed children-first.
pub fn parse_nice(text: &str) -> Result<NiceTreeDecomposition> {
    let mut bags: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut kinds: BTreeMap<usize, NodeKind> = BTreeMap::new();
    let mut root = None;
    for (ln, toks) in content_lines(text) {
        match toks[0] {
            "node" => {
                let id = num(ln, toks.get(1), "node id")?;
                let mut bag = Vec::new();
                for tok in toks.iter().skip(3) {
                    bag.push(tok.parse().map_err(|_| perr(ln, format!("bad vertex '{tok}'")))?);
                }
                bag.sort_unstable();
                bags.insert(id, bag);
            }
            "link" => {
                let a = num(ln, toks.get(1), "node id")?;
                let b = num(ln, toks.get(2), "node id")?;
                children.entry(a).or_default().push(b);
            }
            "kind" => {
                let id = num(ln, toks.get(1), "node id")?;
                let tag = toks.get(2).ok_or_else(|| perr(ln, "missing kind"))?;
                let kind = match tag.split_once(':') {
                    None if *tag == "leaf" => NodeKind::Leaf,
                    None if *tag == "join" => NodeKind::Join,
                    Some(("forget", v)) => NodeKind::Forget(v.parse().map_err(|_| perr(ln, "bad vertex"))?),
                    Some(("introduce", v)) => NodeKind::Introduce(v.parse().map_err(|_| perr(ln, "bad vertex"))?),
                    _ => return Err(perr(ln, format!("bad kind '{tag}'"))),
                };
                kinds.insert(id, kind);
            }
            "root" => root = Some(num(ln, toks.get(1), "root id")?),
            other => return Err(perr(ln, format!("unknown directive '{other}'"))),
        }
    }
    let n = bags.len();
    let mut nodes = Vec::with_capacity(n);
    for (i, (id, bag)) in bags.into_iter().enumerate() {
        if id != i {
            return Err(perr(0, "node ids must be 0..n-1"));
        }
        let kind = kinds.remove(&id).ok_or_else(|| perr(0, format!("node {id} has no kind")))?;
        let mut ch = children.remove(&id).unwrap_or_default();
        ch.sort_unstable();
        nodes.push(NiceNode { kind, bag, children: ch });
    }
    let root = root.ok_or_else(|| perr(0, "missing 'root' line"))?;
    Ok(NiceTreeDecomposition { nodes, root })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "# path\nv 3\ne 0 1 2 5\ne 1 2 1 1 # tail\ns 0\nt 2\nw 1\ncoord 0 0 0\n";

    #[test]
    fn instance_round_trip() {
        let (inst, coords) = parse_instance_with_coords(TEXT).unwrap();
        assert_eq!(inst.graph.edge_count(), 2);
        assert_eq!(coords.get(&0), Some(&(0, 0)));
        let text = format_instance(&inst, Some(&coords));
        let (again, coords2) = parse_instance_with_coords(&text).unwrap();
        assert_eq!(inst, again);
        assert_eq!(coords, coords2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_instance("v 2\ne 0 0 1 1\ns 0\nt 1\n").unwrap_err();
        assert!(matches!(err, WrpError::Parse { line: 2, .. }));
        let err = parse_instance("v 2\ne 0 1 1\n").unwrap_err();
        assert!(matches!(err, WrpError::Parse { line: 2, .. }));
        assert!(matches!(parse_instance("v 2\ne 0 1 1 1\ns 0\n"), Err(WrpError::Parse { .. })));
        assert!(matches!(parse_instance("v 2\nx 1\n"), Err(WrpError::Parse { line: 2, .. })));
    }

    #[test]
    fn disconnected_is_a_model_error() {
        assert_eq!(parse_instance("v 3\ne 0 1 1 1\ns 0\nt 1\n"), Err(WrpError::Disconnected));
    }

    #[test]
    fn route_round_trip() {
        let r = Route { start: 4, steps: vec![Step { edge: 3, forward: true }, Step { edge: 0, forward: false }] };
        let text = format_route(&r, 9);
        assert_eq!(text, "route 4 ; 3:+ 0:-\ncost 9\n");
        assert_eq!(parse_route(&text).unwrap(), (r, Some(9)));
        assert_eq!(parse_route("route 2 ;\n").unwrap(), (Route::empty(2), None));
    }

    #[test]
    fn decomposition_round_trip() {
        let td = TreeDecomposition { bags: vec![vec![0, 1], vec![1, 2]], links: vec![(0, 1)] };
        assert_eq!(parse_decomposition(&format_decomposition(&td)).unwrap(), td);
    }
}
