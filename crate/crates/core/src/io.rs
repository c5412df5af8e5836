//! DIMACS shortest-path format: `p sp <n> <m>`, `a <tail> <head> <cost>`
//! with 1-indexed nodes, `c` comment lines.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::{Arc, Cost, Graph, MAX_INPUT_COST, MAX_NODES};

#[derive(Clone, Debug)]
pub struct Ingested {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

pub fn parse_dimacs(text: &str) -> Result<Ingested> {
    let mut n = None;
    let mut declared = 0usize;
    let mut arcs: Vec<Arc> = Vec::new();
    let mut seen: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("p") => {
                if n.is_some() {
                    return Err(parse_err(line, "duplicate problem line"));
                }
                if toks.next() != Some("sp") {
                    return Err(parse_err(line, "expected 'p sp <n> <m>'"));
                }
                let nodes: usize = field(toks.next(), line, "node count")?;
                declared = field(toks.next(), line, "arc count")?;
                if nodes == 0 {
                    return Err(parse_err(line, "graph has no nodes"));
                }
                if nodes > MAX_NODES {
                    return Err(Error::NodeCeiling(nodes));
                }
                n = Some(nodes);
            }
            Some("a") => {
                let nodes = n.ok_or_else(|| parse_err(line, "arc before problem line"))?;
                let u: usize = field(toks.next(), line, "tail")?;
                let v: usize = field(toks.next(), line, "head")?;
                let c: Cost = field(toks.next(), line, "cost")?;
                for x in [u, v] {
                    if x == 0 || x > nodes {
                        return Err(parse_err(
                            line,
                            format!("node {x} out of range 1..={nodes}"),
                        ));
                    }
                }
                if c < 0 {
                    return Err(parse_err(line, format!("negative cost {c}")));
                }
                if c > MAX_INPUT_COST {
                    return Err(parse_err(
                        line,
                        format!("cost {c} exceeds ceiling {MAX_INPUT_COST}"),
                    ));
                }
                if u == v {
                    warnings.push(format!("line {line}: self-loop at {u} dropped"));
                    continue;
                }
                let key = (u - 1, v - 1);
                if let Some(&(first, slot)) = seen.get(&key) {
                    warnings.push(format!("line {line}: parallel arc {u}->{v} (first on line {first}); keeping the cheaper"));
                    arcs[slot].cost = arcs[slot].cost.min(c);
                } else {
                    seen.insert(key, (line, arcs.len()));
                    arcs.push(Arc::new(key.0, key.1, c));
                }
            }
            Some(other) => return Err(parse_err(line, format!("unknown line type '{other}'"))),
        }
    }
    let nodes = n.ok_or_else(|| parse_err(0, "missing problem line"))?;
    let read = arcs.len() + warnings.len();
    if read != declared {
        warnings.push(format!(
            "problem line declares {declared} arcs, found {read}"
        ));
    }
    Ok(Ingested {
        graph: Graph::new(nodes, arcs)?,
        warnings,
    })
}

pub fn write_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "p sp {} {}", g.node_count(), g.arc_count()).unwrap();
    for a in g.arcs() {
        writeln!(out, "a {} {} {}", a.tail + 1, a.head + 1, a.cost).unwrap();
    }
    out
}
