use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;

use balsp::generate;
use balsp::min_balance::MinBalanceConfig;
use balsp::pipeline::preprocess;
use balsp::Graph;

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BenchFormat::Csv)]
    format: BenchFormat,
    /// Smaller sizes for a fast run.
    #[arg(long)]
    quick: bool,
    /// Queries per graph in the shortest-path family.
    #[arg(long, default_value_t = 4)]
    queries: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFormat {
    Csv,
    Json,
}

#[derive(Serialize, Default, Clone)]
struct Row {
    family: &'static str,
    n: usize,
    m: usize,
    preprocess_ms: f64,
    query_ms: f64,
    active_arcs: usize,
    /// active_arcs / (m log2 n)
    k_fit: f64,
    main_calls: f64,
    /// main_calls / n
    c_fit: f64,
    relaxations: f64,
    sfm_ops: f64,
    eta_sum: usize,
}

const TOLERANCE: f64 = 0.3;

fn measure(family: &'static str, g: &Graph, queries: usize) -> Result<Row> {
    let (n, m) = (g.node_count(), g.arc_count());
    let t = Instant::now();
    let pre = preprocess(g, &MinBalanceConfig::default())?;
    let preprocess_ms = t.elapsed().as_secs_f64() * 1e3;
    let active = pre.stats.min_balance.active_arc_total;
    let log_n = (n as f64).log2().max(1.0);
    let mut row = Row {
        family,
        n,
        m,
        preprocess_ms,
        active_arcs: active,
        k_fit: active as f64 / (m as f64 * log_n),
        ..Default::default()
    };
    let h = pre.hierarchy.as_ref().expect("rho 0 builds a hierarchy");
    row.eta_sum = (h.leaf_count()..h.node_count())
        .map(|v| h.bucket_count(v))
        .sum();
    let engine = pre.engine()?;
    let t = Instant::now();
    let q = queries.clamp(1, pre.reduced.node_count());
    for k in 0..q {
        let s = k * pre.reduced.node_count() / q;
        let sp = engine.run(s)?;
        row.main_calls += sp.stats.main_calls as f64;
        row.relaxations += sp.stats.relaxations as f64;
        row.sfm_ops +=
            (sp.stats.sfm.splits + sp.stats.sfm.findmins + sp.stats.sfm.decreasekeys) as f64;
    }
    row.query_ms = t.elapsed().as_secs_f64() * 1e3 / q as f64;
    row.main_calls /= q as f64;
    row.relaxations /= q as f64;
    row.sfm_ops /= q as f64;
    row.c_fit = row.main_calls / n as f64;
    Ok(row)
}

/// Upper-bound constants: no size may need more than 30% above the fit at
/// the smallest size.
fn no_upward_drift(values: &[f64]) -> bool {
    values.iter().all(|&x| x <= (1.0 + TOLERANCE) * values[0])
}

fn within_band(values: &[f64]) -> bool {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v[v.len() / 2];
    v.iter().all(|&x| (x - mid).abs() <= TOLERANCE * mid)
}

pub fn run(out: &mut impl Write, args: &BenchArgs) -> Result<bool> {
    let (m_exps, n_exps) = if args.quick {
        (10..=12, 8..=10)
    } else {
        (10..=15, 8..=13)
    };
    let mut dense = Vec::new();
    for e in m_exps {
        let mut rng = generate::rng(args.seed + e as u64);
        let g = generate::strongly_connected(&mut rng, 256, 1 << e, 1, 1_000_000_000);
        dense.push(measure("fixed-n", &g, args.queries)?);
    }
    let mut sparse = Vec::new();
    for e in n_exps {
        let mut rng = generate::rng(args.seed + 100 + e as u64);
        let g = generate::bounded_degree(&mut rng, 1 << e, 4, 1, 1_000_000);
        sparse.push(measure("bounded-degree", &g, args.queries)?);
    }
    let rows: Vec<Row> = dense.iter().chain(&sparse).cloned().collect();

    let ks: Vec<f64> = dense.iter().map(|r| r.k_fit).collect();
    let cs: Vec<f64> = sparse.iter().map(|r| r.c_fit).collect();
    let growth = dense
        .windows(2)
        .all(|w| w[1].active_arcs as f64 <= 2.5 * w[0].active_arcs as f64);
    let verdicts = [
        (
            "active arcs per m log n without upward drift",
            no_upward_drift(&ks),
        ),
        ("active arcs grow at most 2.5x per doubling of m", growth),
        ("main calls per n stable", within_band(&cs)),
        (
            "relaxations at most m + n",
            rows.iter().all(|r| r.relaxations <= (r.m + r.n) as f64),
        ),
        (
            "bucket total below 6n",
            rows.iter().all(|r| r.eta_sum < 6 * r.n),
        ),
    ];
    match args.format {
        BenchFormat::Json => {
            let v: Vec<_> = verdicts
                .iter()
                .map(|(k, ok)| serde_json::json!({ "check": k, "passed": ok }))
                .collect();
            serde_json::to_writer(
                &mut *out,
                &serde_json::json!({ "schema": 1, "command": "bench", "rows": rows, "verdicts": v }),
            )?;
            writeln!(out)?;
        }
        BenchFormat::Csv => {
            writeln!(out, "family,n,m,preprocess_ms,query_ms,active_arcs,k_fit,main_calls,c_fit,relaxations,sfm_ops,eta_sum")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{:.3},{:.3},{},{:.4},{:.1},{:.4},{:.1},{:.1},{}",
                    r.family,
                    r.n,
                    r.m,
                    r.preprocess_ms,
                    r.query_ms,
                    r.active_arcs,
                    r.k_fit,
                    r.main_calls,
                    r.c_fit,
                    r.relaxations,
                    r.sfm_ops,
                    r.eta_sum
                )?;
            }
            for (k, ok) in &verdicts {
                eprintln!("{} {k}", if *ok { "PASS" } else { "FAIL" });
            }
        }
    }
    Ok(verdicts.iter().all(|(_, ok)| *ok))
}
