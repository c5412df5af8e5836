use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rand::Rng;
use serde::Serialize;

use balsp::generate;
use balsp::hierarchy::validate_hierarchy;
use balsp::oracles::{balance_check, cut_check, dijkstra, pairwise_check, Witness, Xi};
use balsp::pipeline::{preprocess, Preprocessed};
use balsp::sssp::{SplitFindMin, INF};
use balsp::ufi::UnionFindIncrease;
use balsp::{Arc, Graph};

use crate::{config, load, Format, Level};

#[derive(Args)]
pub struct VerifyArgs {
    /// DIMACS graph to check; a seeded corpus is used when omitted.
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    rho: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Level::Sampled)]
    level: Level,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Perturb the potential of one node before checking balance.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Serialize)]
struct Check {
    suite: &'static str,
    subject: String,
    passed: bool,
    detail: String,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, suite: &'static str, subject: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            suite,
            subject: subject.to_string(),
            passed,
            detail,
        });
    }
}

fn describe(g: &Graph, w: &Option<Witness>) -> String {
    match w {
        None => String::new(),
        Some(Witness::Arc(e)) => {
            let a = g.arc(*e);
            format!("witness arc {}->{}", a.tail + 1, a.head + 1)
        }
        Some(Witness::Pair(i, j)) => format!("witness pair ({}, {})", i + 1, j + 1),
        Some(Witness::Subset(s)) => format!(
            "witness subset {:?}",
            s.iter().map(|v| v + 1).collect::<Vec<_>>()
        ),
    }
}

fn check_pipeline(
    suite: &mut Suite,
    name: &str,
    g: &Graph,
    pre: &Preprocessed,
    args: &VerifyArgs,
) -> Result<()> {
    let mut costs = pre.augmented_costs()?;
    if args.inject_fault {
        // Raise one potential until an incoming arc drops to zero.
        let g1 = &pre.augmented;
        let n = g1.node_count();
        let min_in = |v: usize| {
            g1.arcs()
                .iter()
                .zip(&costs)
                .filter(|(a, _)| a.head == v)
                .map(|(_, &c)| c)
                .min()
        };
        let pick = (0..n)
            .map(|k| (args.seed as usize + k) % n)
            .find_map(|v| min_in(v).filter(|&c| c > 0).map(|c| (v, c)));
        if let Some((v, bump)) = pick {
            for (a, c) in g1.arcs().iter().zip(costs.iter_mut()) {
                if a.tail == v {
                    *c += bump;
                }
                if a.head == v {
                    *c -= bump;
                }
            }
        }
    }
    let r = balance_check(&pre.augmented, &costs, pre.xi());
    suite.push(
        "balance",
        name,
        r.passed,
        describe(&pre.augmented, &r.witness),
    );
    if g.node_count() <= 32 {
        let r = pairwise_check(&pre.augmented, &costs, pre.xi());
        suite.push(
            "pairwise",
            name,
            r.passed,
            describe(&pre.augmented, &r.witness),
        );
    }
    let Some(h) = &pre.hierarchy else {
        return Ok(());
    };
    let sources = match args.level {
        Level::Full if g.node_count() <= 64 => None,
        _ => Some(4),
    };
    let hr = validate_hierarchy(h, &pre.reduced, sources);
    let detail = hr
        .violations
        .first()
        .cloned()
        .unwrap_or_else(|| format!("{} pairs, eta sum {}", hr.pairs_checked, hr.eta_sum));
    suite.push("hierarchy", name, hr.passed(), detail);
    let n = g.node_count();
    let sources: Vec<usize> = match args.level {
        Level::Full => (0..n).collect(),
        _ => vec![0, n / 2, n - 1],
    };
    let engine = pre.engine()?;
    let mut mismatches = 0;
    for &s in &sources {
        let got = pre.query(&engine, s)?;
        let want = dijkstra(g, &g.costs(), s);
        mismatches += got.iter().zip(&want).filter(|(a, b)| a != b).count();
    }
    suite.push(
        "sssp",
        name,
        mismatches == 0,
        format!("{} sources, {mismatches} mismatches", sources.len()),
    );
    Ok(())
}

fn corpus(args: &VerifyArgs) -> Vec<(String, Graph)> {
    let count = match args.level {
        Level::Off => 4,
        Level::Sampled => 16,
        Level::Full => 64,
    };
    (0..count)
        .map(|i| {
            let seed = args.seed.wrapping_mul(1000).wrapping_add(i);
            let mut rng = generate::rng(seed);
            let n = 2 + (i as usize * 7) % 60;
            let g = match i % 4 {
                0 => generate::strongly_connected(&mut rng, n, 3 * n, 1, 1_000_000_000),
                1 => generate::multiscale(&mut rng, n, 4 * n, 30),
                2 => generate::arbitrary(&mut rng, n, 2 * n, 0, 1000),
                _ => generate::clustered(&mut rng, 2 + i as usize % 5, 1 + i as usize % 8, 24),
            };
            (format!("seed {seed}"), g)
        })
        .collect()
}

/// Equivalence of the three balance characterizations on every
/// strongly connected digraph over `n` nodes with costs from `palette`.
fn characterizations(suite: &mut Suite, n: usize, palette: &[i128]) -> Result<()> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let xis: Vec<Xi> = (1..=4)
        .map(Xi::integer)
        .chain((0..3).map(Xi::from_rho))
        .collect();
    let base = palette.len() + 1;
    let total = base.pow(pairs.len() as u32);
    let (mut graphs, mut failure) = (0usize, None);
    for mut code in 0..total {
        let mut arcs = Vec::new();
        for &(u, v) in &pairs {
            let k = code % base;
            code /= base;
            if k > 0 {
                arcs.push(Arc::new(u, v, palette[k - 1]));
            }
        }
        let g = Graph::new(n, arcs)?;
        if !g.is_strongly_connected() {
            continue;
        }
        graphs += 1;
        let costs = g.costs();
        for &xi in &xis {
            let a = balance_check(&g, &costs, xi).passed;
            let b = pairwise_check(&g, &costs, xi).passed;
            let c = cut_check(&g, &costs, xi)?.passed;
            if !(a == b && b == c) && failure.is_none() {
                failure = Some(format!("{:?} at xi {xi}", g.arcs()));
            }
        }
    }
    let subject = format!("n = {n}, palette {palette:?}");
    suite.push(
        "characterizations",
        &subject,
        failure.is_none(),
        failure.unwrap_or_else(|| format!("{graphs} graphs")),
    );
    Ok(())
}

fn union_find(suite: &mut Suite, seeds: u64, ops: usize) {
    let mut bad = None;
    for seed in 0..seeds {
        let mut rng = generate::rng(seed);
        let n = 1 + seed as usize % 50;
        let mut u = UnionFindIncrease::new(n);
        let mut label: Vec<usize> = (0..n).collect();
        let mut value = vec![0i128; n];
        for step in 0..ops {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            match rng.gen_range(0..3) {
                0 => {
                    u.union(i, j);
                    let (a, b) = (label[i], label[j]);
                    label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
                }
                1 => {
                    let d = rng.gen_range(-100..=100);
                    u.increase(i, d);
                    let a = label[i];
                    (0..n)
                        .filter(|&x| label[x] == a)
                        .for_each(|x| value[x] += d);
                }
                _ => {
                    if u.value(i) != value[i] || (u.find(i) == u.find(j)) != (label[i] == label[j])
                    {
                        bad.get_or_insert(format!("seed {seed} step {step}"));
                    }
                }
            }
        }
    }
    suite.push(
        "union-find-increase",
        &format!("{seeds} seeds x {ops} ops"),
        bad.is_none(),
        bad.unwrap_or_default(),
    );
}

fn split_findmin(suite: &mut Suite, seeds: u64, ops: usize) {
    let mut bad = None;
    for seed in 0..seeds {
        let mut rng = generate::rng(seed);
        let n = 1 + seed as usize % 64;
        let mut s = SplitFindMin::new(n);
        let mut keys = vec![INF; n];
        let mut starts = vec![false; n];
        starts[0] = true;
        for step in 0..ops {
            let e = rng.gen_range(0..n);
            match rng.gen_range(0..3) {
                0 => {
                    s.split(e);
                    starts[e] = true;
                }
                1 => {
                    let w = rng.gen_range(0..10_000);
                    s.decreasekey(e, w);
                    keys[e] = keys[e].min(w);
                }
                _ => {
                    let lo = (0..=e).rev().find(|&x| starts[x]).unwrap();
                    let hi = (e + 1..n).find(|&x| starts[x]).unwrap_or(n);
                    let want = keys[lo..hi].iter().copied().min().unwrap();
                    if s.findmin(e) != want {
                        bad.get_or_insert(format!("seed {seed} step {step}"));
                    }
                }
            }
        }
    }
    suite.push(
        "split-findmin",
        &format!("{seeds} seeds x {ops} ops"),
        bad.is_none(),
        bad.unwrap_or_default(),
    );
}

pub fn run(out: &mut impl Write, args: &VerifyArgs) -> Result<bool> {
    let mut suite = Suite { checks: Vec::new() };
    let cfg = config(args.rho, args.level, args.seed);
    let graphs = match &args.input {
        Some(p) => vec![(p.display().to_string(), load(p)?)],
        None => corpus(args),
    };
    for (name, g) in &graphs {
        match preprocess(g, &cfg) {
            Ok(pre) => check_pipeline(&mut suite, name, g, &pre, args)?,
            Err(e) => suite.push("pipeline", name, false, e.to_string()),
        }
    }
    if args.input.is_none() && args.level != Level::Off {
        characterizations(&mut suite, 3, &[1, 2, 3, 5, 9])?;
        let (seeds, ops) = if args.level == Level::Full {
            (100, 10_000)
        } else {
            (10, 2_000)
        };
        if args.level == Level::Full {
            characterizations(&mut suite, 4, &[1, 3])?;
        }
        union_find(&mut suite, seeds, ops);
        split_findmin(&mut suite, seeds, ops);
    }
    let passed = suite.checks.iter().all(|c| c.passed);
    match args.format {
        Format::Json => {
            serde_json::to_writer(
                &mut *out,
                &serde_json::json!({ "schema": 1, "command": "verify", "passed": passed, "checks": suite.checks }),
            )?;
            writeln!(out)?;
        }
        Format::Text => {
            for c in &suite.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {} [{}] {}", c.suite, c.subject, c.detail)?;
            }
            let failed = suite.checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {failed} failed", suite.checks.len())?;
        }
    }
    Ok(passed)
}
