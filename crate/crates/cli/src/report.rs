use std::io::Write;

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::json;

use balsp::oracles::{balance_check, dijkstra, floyd_warshall, Witness, FLOYD_WARSHALL_LIMIT};
use balsp::pipeline::Preprocessed;
use balsp::{Cost, Graph};

use crate::{Format, Level};

const SCHEMA: u32 = 1;
const DENSE_CAP: usize = 100_000_000;

#[derive(Serialize)]
struct Fraction {
    num: Cost,
    den: Cost,
}

#[derive(Serialize)]
struct ReducedArc {
    tail: usize,
    head: usize,
    cost: Cost,
    reduced: Fraction,
}

fn fmt_dist(d: Option<Cost>) -> String {
    d.map_or_else(|| "inf".to_string(), |x| x.to_string())
}

fn write_json(out: &mut impl Write, v: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

pub fn balance(
    out: &mut impl Write,
    g: &Graph,
    pre: &Preprocessed,
    format: Format,
    level: Level,
) -> Result<bool> {
    let k = pre.scale;
    let potential: Vec<Fraction> = (0..g.node_count())
        .map(|v| Fraction {
            num: pre.potential(v),
            den: k,
        })
        .collect();
    let arcs: Vec<ReducedArc> = g
        .arcs()
        .iter()
        .map(|a| ReducedArc {
            tail: a.tail + 1,
            head: a.head + 1,
            cost: a.cost,
            reduced: Fraction {
                num: k * a.cost + pre.potential(a.tail) - pre.potential(a.head),
                den: k,
            },
        })
        .collect();
    let mb = &pre.stats.min_balance;
    let levels: Vec<Cost> = mb.levels.iter().map(|l| l.lower).collect();
    let run_check = match level {
        Level::Off => false,
        Level::Sampled => pre.augmented.arc_count() <= 5000,
        Level::Full => true,
    };
    let check = if run_check {
        let costs = pre.augmented_costs()?;
        let r = balance_check(&pre.augmented, &costs, pre.xi());
        let witness = match r.witness {
            Some(Witness::Arc(e)) => {
                let a = pre.augmented.arc(e);
                Some(format!("arc {}->{}", a.tail + 1, a.head + 1))
            }
            Some(w) => Some(format!("{w:?}")),
            None => None,
        };
        Some((r.passed, witness))
    } else {
        None
    };
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "schema": SCHEMA,
                "command": "balance",
                "nodes": g.node_count(),
                "arcs": g.arc_count(),
                "rho": pre.rho,
                "xi": pre.xi().to_string(),
                "potential": potential,
                "reduced_costs": arcs,
                "stats": {
                    "augmented_arcs": pre.stats.augmented_arcs,
                    "classes": pre.stats.classes,
                    "iterations": mb.iterations,
                    "active_arc_total": mb.active_arc_total,
                    "contractions": pre.stats.contractions,
                    "levels": levels,
                },
                "check": check.as_ref().map(|(ok, w)| json!({ "balanced": ok, "witness": w })),
            }),
        )?,
        Format::Text => {
            writeln!(
                out,
                "nodes {} arcs {} rho {} xi {} scale {}",
                g.node_count(),
                g.arc_count(),
                pre.rho,
                pre.xi(),
                k
            )?;
            writeln!(out, "potential")?;
            for (v, p) in potential.iter().enumerate() {
                writeln!(out, "{} {}", v + 1, p.num)?;
            }
            writeln!(out, "reduced costs")?;
            for a in &arcs {
                writeln!(out, "{} {} {}", a.tail, a.head, a.reduced.num)?;
            }
            writeln!(
                out,
                "iterations {} active arcs {} contractions {}",
                mb.iterations, mb.active_arc_total, pre.stats.contractions
            )?;
            let ls: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
            writeln!(out, "levels {}", ls.join(" "))?;
            if let Some((ok, w)) = &check {
                match w {
                    Some(w) => writeln!(out, "balanced: {ok}, xi: {}, witness: {w}", pre.xi())?,
                    None => writeln!(out, "balanced: {ok}, xi: {}", pre.xi())?,
                }
            }
        }
    }
    Ok(check.map_or(true, |(ok, _)| ok))
}

#[derive(Default)]
struct Comparison {
    mismatches: usize,
    max_deviation: Cost,
}

impl Comparison {
    fn add(&mut self, got: &[Option<Cost>], want: &[Option<Cost>]) {
        for (a, b) in got.iter().zip(want) {
            if a != b {
                self.mismatches += 1;
                if let (Some(x), Some(y)) = (a, b) {
                    self.max_deviation = self.max_deviation.max((x - y).abs());
                }
            }
        }
    }

    fn write(&self, out: &mut impl Write, format: Format) -> Result<()> {
        match format {
            Format::Json => write_json(
                out,
                &json!({ "mismatches": self.mismatches, "max_deviation": self.max_deviation }),
            ),
            Format::Text => Ok(writeln!(
                out,
                "mismatches: {} max deviation: {}",
                self.mismatches, self.max_deviation
            )?),
        }
    }
}

pub fn sssp(
    out: &mut impl Write,
    g: &Graph,
    pre: &Preprocessed,
    s: usize,
    check: bool,
    format: Format,
) -> Result<bool> {
    let d = pre.distances_from(s)?;
    match format {
        Format::Json => write_json(
            out,
            &json!({ "schema": SCHEMA, "command": "sssp", "source": s + 1, "distances": d }),
        )?,
        Format::Text => {
            let row: Vec<String> = d.iter().map(|&x| fmt_dist(x)).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    if !check {
        return Ok(true);
    }
    let mut cmp = Comparison::default();
    cmp.add(&d, &dijkstra(g, &g.costs(), s));
    cmp.write(out, format)?;
    Ok(cmp.mismatches == 0)
}

pub fn apsp(
    out: &mut impl Write,
    g: &Graph,
    pre: &Preprocessed,
    check: bool,
    stream: bool,
    format: Format,
) -> Result<bool> {
    let n = g.node_count();
    if !stream && n.saturating_mul(n) > DENSE_CAP {
        bail!("{n} x {n} matrix exceeds the dense output cap; use --stream");
    }
    let reference = if check && n <= FLOYD_WARSHALL_LIMIT {
        Some(floyd_warshall(g, &g.costs())?)
    } else {
        None
    };
    let mut cmp = Comparison::default();
    let mut rows = Vec::new();
    pre.apsp_with(|s, row| {
        if check {
            match &reference {
                Some(fw) => cmp.add(&row, &fw[s]),
                None => cmp.add(&row, &dijkstra(g, &g.costs(), s)),
            }
        }
        if stream {
            match format {
                Format::Json => write_json(out, &json!({ "source": s + 1, "distances": row }))?,
                Format::Text => {
                    let r: Vec<String> = row.iter().map(|&x| fmt_dist(x)).collect();
                    writeln!(out, "{}", r.join(" "))?;
                }
            }
        } else {
            rows.push(row);
        }
        Ok::<_, anyhow::Error>(())
    })?;
    if !stream {
        match format {
            Format::Json => write_json(
                out,
                &json!({ "schema": SCHEMA, "command": "apsp", "matrix": rows }),
            )?,
            Format::Text => {
                for row in &rows {
                    let r: Vec<String> = row.iter().map(|&x| fmt_dist(x)).collect();
                    writeln!(out, "{}", r.join(" "))?;
                }
            }
        }
    }
    if check {
        cmp.write(out, format)?;
    }
    Ok(cmp.mismatches == 0)
}
