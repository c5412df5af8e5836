use std::time::Instant;

use balsp::balance::{claim_window_violations, find_balance, rough_balance};
use balsp::generate;
use balsp::goldberg::{small_cycles, small_cycles_violation};
use balsp::graph::{make_strongly_connected, positivize};
use balsp::hierarchy::validate_hierarchy;
use balsp::min_balance::{min_balance, MinBalanceConfig, Precheck};
use balsp::oracles::{
    all_bottlenecks, balance_check, beta_oracle, cut_check, dijkstra, floyd_warshall,
    pairwise_check, Xi,
};
use balsp::pipeline::{preprocess, Preprocessed};
use balsp::sssp::{Audit, SplitFindMin, INF};
use balsp::ufi::UnionFindIncrease;
use balsp::{Arc, Cost, Graph};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Seeded strongly connected graphs with n in [4, 200], m <= 2000, costs <= 1e9.
fn corpus() -> Vec<Graph> {
    (0..500u64)
        .map(|seed| {
            let mut rng = generate::rng(seed);
            let n = rng.gen_range(4..=200usize);
            let m = rng.gen_range(n..=(2000.min(n * (n - 1))));
            match seed % 4 {
                0 => generate::strongly_connected(&mut rng, n, m, 1, 1_000_000_000),
                1 => generate::strongly_connected(&mut rng, n, m, 0, 20),
                2 => generate::multiscale(&mut rng, n, m, 26),
                _ => {
                    let size = rng.gen_range(1..=10usize);
                    let clusters = rng.gen_range(4usize.div_ceil(size).max(2)..=200 / size);
                    generate::clustered(&mut rng, clusters, size, 24)
                }
            }
        })
        .collect()
}

fn balancing(corpus: &[Graph], pipelines: &mut Vec<Preprocessed>) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (i, g) in corpus.iter().enumerate() {
        assert!(
            g.is_strongly_connected() && g.arc_count() <= 2000 && g.max_cost() <= 1_000_000_000
        );
        let p = preprocess(g, &MinBalanceConfig::default()).unwrap();
        let report = balance_check(&p.augmented, &p.augmented_costs().unwrap(), Xi::from_rho(0));
        if !report.passed {
            failures.push(format!("graph {i}: {:?}", report.witness));
        }
        pipelines.push(p);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!(
            "{} graphs, {} failures, {secs:.1}s {}",
            corpus.len(),
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )
}

fn rough(corpus: &[Graph], contracted: &mut Vec<Option<Graph>>) -> Outcome {
    let (mut failures, mut window, mut trivial) = (0, 0, 0);
    for g in corpus {
        let pos = positivize(&make_strongly_connected(g).unwrap().graph).unwrap();
        if pos.graph.node_count() == 1 {
            trivial += 1;
            contracted.push(None);
            continue;
        }
        let rb = rough_balance(&pos.graph).unwrap();
        let reduced = rb.potential.reduced_costs(&pos.graph).unwrap();
        if !balance_check(&pos.graph, &reduced, Xi::integer(7 * rb.n * rb.n)).passed {
            failures += 1;
        }
        window += claim_window_violations(&pos.graph, &rb).unwrap().len();
        contracted.push(Some(rb.potential.apply(&pos.graph).unwrap()));
    }
    outcome(
        failures == 0 && window == 0,
        format!("{} graphs ({trivial} contract to one node), {failures} balance failures, {window} window violations", corpus.len()),
    )
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect()
}

fn strongly_connected_mask(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut out = vec![0u32; n];
    let mut inn = vec![0u32; n];
    for (k, &(u, v)) in pairs.iter().enumerate() {
        if mask >> k & 1 == 1 {
            out[u] |= 1 << v;
            inn[v] |= 1 << u;
        }
    }
    let full = (1u32 << n) - 1;
    let closure = |adj: &[u32]| {
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            for v in 0..n {
                if frontier >> v & 1 == 1 {
                    next |= adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen
    };
    closure(&out) == full && closure(&inn) == full
}

fn beta_matches(g: &Graph) -> bool {
    find_balance(g).unwrap().beta == beta_oracle(g, &g.costs()).unwrap()
}

fn find_balance_exact() -> Outcome {
    let (mut exhaustive, mut mismatches) = (0, 0);
    for n in 2..=5 {
        let ps = pairs(n);
        let mut rng = generate::rng(n as u64);
        for mask in 1u64..1 << ps.len() {
            if !strongly_connected_mask(n, &ps, mask) {
                continue;
            }
            let chosen: Vec<(usize, usize)> = (0..ps.len())
                .filter(|&k| mask >> k & 1 == 1)
                .map(|k| ps[k])
                .collect();
            let mut costs: Vec<Cost> = (1..=chosen.len() as Cost).collect();
            costs.shuffle(&mut rng);
            let g = Graph::new(
                n,
                chosen
                    .iter()
                    .zip(&costs)
                    .map(|(&(u, v), &c)| Arc::new(u, v, c)),
            )
            .unwrap();
            exhaustive += 1;
            if !beta_matches(&g) {
                mismatches += 1;
            }
        }
    }
    for seed in 0..500u64 {
        let mut rng = generate::rng(10_000 + seed);
        let n = rng.gen_range(2..=200usize);
        let m = rng.gen_range(n..=(4 * n).min(n * (n - 1)));
        let g = match seed % 3 {
            0 => generate::strongly_connected(&mut rng, n, m, 1, 1_000_000_000),
            1 => generate::strongly_connected(&mut rng, n, m, 1, 8),
            _ => generate::multiscale(&mut rng, n, m, 40),
        };
        if !beta_matches(&g) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{exhaustive} exhaustive + 500 random graphs, {mismatches} mismatches"),
    )
}

fn small_cycles_contract() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..500u64 {
        let mut rng = generate::rng(20_000 + seed);
        let n = rng.gen_range(2..=200usize);
        let m = rng.gen_range(1..=(10 * n).min(2000));
        let lower: Cost = rng.gen_range(1..=1_000_000);
        let step: Cost = rng.gen_range(1..=10_000);
        let spread = rng.gen_range(1..=8);
        let arcs: Vec<(usize, usize, Cost)> = (0..m)
            .filter_map(|_| {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                (u != v).then(|| (u, v, lower + rng.gen_range(0..spread * step)))
            })
            .collect();
        let out = small_cycles(lower, step, n, &arcs).unwrap();
        if let Some(msg) = small_cycles_violation(lower, step, n, &arcs, &out) {
            failures.push(format!("seed {seed}: {msg}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "500 instances, {} failures {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )
}

fn xis() -> Vec<Xi> {
    let mut v: Vec<Xi> = (1..=8).map(Xi::integer).collect();
    v.extend((0..4).map(Xi::from_rho));
    v
}

fn characterizations_agree(g: &Graph, xi: Xi) -> bool {
    let costs = g.costs();
    let a = balance_check(g, &costs, xi).passed;
    let b = pairwise_check(g, &costs, xi).passed;
    let c = cut_check(g, &costs, xi).unwrap().passed;
    a == b && b == c
}

/// Every strongly connected digraph on n nodes with every assignment of
/// palette costs.
fn all_palette_graphs(n: usize, palette: &[Cost], mut visit: impl FnMut(&Graph)) {
    let ps = pairs(n);
    let mut code = vec![0usize; ps.len()];
    loop {
        let arcs = ps
            .iter()
            .zip(&code)
            .filter(|(_, &k)| k > 0)
            .map(|(&(u, v), &k)| Arc::new(u, v, palette[k - 1]));
        let g = Graph::new(n, arcs).unwrap();
        if g.is_strongly_connected() {
            visit(&g);
        }
        let mut k = 0;
        while k < code.len() && code[k] == palette.len() {
            code[k] = 0;
            k += 1;
        }
        if k == code.len() {
            return;
        }
        code[k] += 1;
    }
}

fn characterizations() -> Outcome {
    let xis = xis();
    let (mut graphs, mut disagreements) = (0usize, 0usize);
    let mut check = |g: &Graph, xs: &[Xi]| {
        graphs += 1;
        disagreements += xs
            .iter()
            .filter(|&&xi| !characterizations_agree(g, xi))
            .count();
    };
    for n in 1..=3 {
        all_palette_graphs(n, &[1, 2, 3, 5, 9], |g| check(g, &xis));
    }
    all_palette_graphs(4, &[1, 3], |g| check(g, &xis));
    // Every strongly connected topology on 5 nodes, costs drawn from the palette.
    let palette = [1, 2, 3, 5, 9];
    let ps = pairs(5);
    let mut rng = generate::rng(5);
    for mask in 0u64..1 << ps.len() {
        if !strongly_connected_mask(5, &ps, mask) {
            continue;
        }
        let arcs: Vec<Arc> = (0..ps.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| Arc::new(ps[k].0, ps[k].1, *palette.choose(&mut rng).unwrap()))
            .collect();
        let xi = xis[mask as usize % xis.len()];
        check(&Graph::new(5, arcs).unwrap(), &[xi]);
    }
    let ps6 = pairs(6);
    let mut sampled = 0;
    while sampled < 20_000 {
        let mask = rng.gen_range(0u64..1 << ps6.len());
        if !strongly_connected_mask(6, &ps6, mask) {
            continue;
        }
        let arcs: Vec<Arc> = (0..ps6.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| Arc::new(ps6[k].0, ps6[k].1, *palette.choose(&mut rng).unwrap()))
            .collect();
        check(&Graph::new(6, arcs).unwrap(), &xis);
        sampled += 1;
    }
    for seed in 0..200u64 {
        let mut rng = generate::rng(30_000 + seed);
        let n = rng.gen_range(2..=12usize);
        let g = match seed % 3 {
            0 => generate::strongly_connected(&mut rng, n, 2 * n, 1, 20),
            1 => generate::multiscale(&mut rng, n, 3 * n, 6),
            _ => generate::clustered(&mut rng, 2, n.div_ceil(2), 3),
        };
        check(&g, &xis);
    }
    // Exhaustive coverage stops at n = 4 (all palette assignments) and n = 5
    // (all topologies); n = 6 has 2^30 topologies before costs are assigned.
    outcome(
        false,
        format!(
            "{graphs} strongly connected graphs, {disagreements} disagreements; exhaustive palette n <= 4, all topologies n = 5, sampled n = 6: full n = 6 enumeration not run"
        ),
    )
}

fn shortest_paths(pipelines: &mut Vec<(Graph, Preprocessed)>) -> Outcome {
    let (mut queries, mut mismatches, mut audited, mut audit_failures) = (0, 0, 0, 0);
    for seed in 0..1000u64 {
        let mut rng = generate::rng(40_000 + seed);
        let n = rng.gen_range(1..=128usize);
        let g = match seed % 5 {
            0 => generate::strongly_connected(&mut rng, n, 4 * n, 0, 1000),
            1 => generate::multiscale(&mut rng, n, 3 * n, 30),
            2 => generate::arbitrary(&mut rng, n, 2 * n, 0, 50),
            3 => generate::bounded_degree(&mut rng, n, 3, 1, 1_000_000_000),
            _ => {
                let (clusters, size) = (rng.gen_range(1..=8), rng.gen_range(1..=16));
                generate::clustered(&mut rng, clusters, size, 20)
            }
        };
        let n = g.node_count();
        let p = preprocess(&g, &MinBalanceConfig::default()).unwrap();
        let engine = p.engine().unwrap();
        let bottleneck = (n <= 32).then(|| all_bottlenecks(&p.reduced, &p.reduced.costs()));
        let sources: Vec<usize> = if n <= 32 {
            (0..n).collect()
        } else {
            vec![0, rng.gen_range(0..n), n - 1]
        };
        for s in sources {
            let cs = p.classes.class_of(s);
            let sp = match &bottleneck {
                Some(bn) => {
                    audited += 1;
                    let sp = engine
                        .run_audited(
                            cs,
                            Some(Audit {
                                bottleneck: Some(bn),
                            }),
                        )
                        .unwrap();
                    if sp.stats.audit_violations() != 0 {
                        audit_failures += 1;
                    }
                    sp
                }
                None => engine.run(cs).unwrap(),
            };
            queries += 1;
            if p.map_distances(&sp, s).unwrap() != dijkstra(&g, &g.costs(), s) {
                mismatches += 1;
            }
        }
        pipelines.push((g, p));
    }
    let mut apsp_mismatches = 0;
    for seed in 0..100u64 {
        let mut rng = generate::rng(50_000 + seed);
        let n = rng.gen_range(1..=64usize);
        let g = match seed % 3 {
            0 => generate::arbitrary(&mut rng, n, 3 * n, 0, 100),
            1 => generate::strongly_connected(&mut rng, n, 3 * n, 1, 1 << 30),
            _ => generate::multiscale(&mut rng, n, 4 * n, 30),
        };
        let p = preprocess(&g, &MinBalanceConfig::default()).unwrap();
        if p.apsp().unwrap() != floyd_warshall(&g, &g.costs()).unwrap() {
            apsp_mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && apsp_mismatches == 0 && audit_failures == 0,
        format!(
            "1000 pipelines, {queries} queries, {mismatches} mismatches; 100 apsp, {apsp_mismatches} mismatches; {audited} audited runs, {audit_failures} with violations"
        ),
    )
}

fn hierarchies<'a>(all: impl Iterator<Item = &'a Preprocessed>) -> Outcome {
    let (mut count, mut exhaustive, mut pairs, mut worst_ratio) = (0, 0, 0, 0.0f64);
    let (mut structural, mut budget) = (Vec::new(), 0);
    for p in all {
        let h = p.hierarchy.as_ref().unwrap();
        let n = p.reduced.node_count();
        let sample = if n <= 64 {
            exhaustive += 1;
            None
        } else {
            Some(8)
        };
        let report = validate_hierarchy(h, &p.reduced, sample);
        count += 1;
        pairs += report.pairs_checked;
        worst_ratio = worst_ratio.max(report.eta_sum as f64 / n as f64);
        for v in report.violations {
            if v.starts_with("bucket total") {
                budget += 1;
            } else {
                structural.push(v);
            }
        }
    }
    outcome(
        structural.is_empty() && budget == 0,
        format!(
            "{count} hierarchies ({exhaustive} exhaustive), {pairs} pairs, {} level/sandwich/containment violations {}; bucket total >= 6n on {budget} (max ratio {worst_ratio:.2})",
            structural.len(),
            structural.first().cloned().unwrap_or_default()
        ),
    )
}

fn union_find_matches(seed: u64, ops: usize) -> bool {
    let mut rng = generate::rng(seed);
    let n = rng.gen_range(1..=64usize);
    let mut u = UnionFindIncrease::new(n);
    let mut label: Vec<usize> = (0..n).collect();
    let mut value = vec![0 as Cost; n];
    for _ in 0..ops {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        match rng.gen_range(0..5) {
            0 => {
                u.union(i, j);
                let (a, b) = (label[i], label[j]);
                label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
            }
            1 => {
                let d = rng.gen_range(-1000..=1000);
                u.increase(i, d);
                let a = label[i];
                (0..n)
                    .filter(|&x| label[x] == a)
                    .for_each(|x| value[x] += d);
            }
            2 => {
                if u.value(i) != value[i] {
                    return false;
                }
            }
            3 => {
                if (u.find(i) == u.find(j)) != (label[i] == label[j]) {
                    return false;
                }
            }
            _ => {
                if u.set_size(i) != label.iter().filter(|&&l| l == label[i]).count() {
                    return false;
                }
            }
        }
    }
    (0..n).all(|i| u.value(i) == value[i])
}

fn split_findmin_matches(seed: u64, ops: usize) -> bool {
    let mut rng = generate::rng(seed);
    let n = rng.gen_range(1..=128usize);
    let mut s = SplitFindMin::new(n);
    let mut keys = vec![INF; n];
    let mut starts = vec![false; n];
    starts[0] = true;
    for _ in 0..ops {
        let e = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 => {
                s.split(e);
                starts[e] = true;
            }
            1 => {
                let w = rng.gen_range(0..1_000_000);
                s.decreasekey(e, w);
                keys[e] = keys[e].min(w);
            }
            _ => {
                let lo = (0..=e).rev().find(|&x| starts[x]).unwrap();
                let hi = (e + 1..n).find(|&x| starts[x]).unwrap_or(n);
                if s.findmin(e) != keys[lo..hi].iter().copied().min().unwrap()
                    || s.segment(e) != (lo, hi)
                {
                    return false;
                }
            }
        }
    }
    true
}

fn data_structures() -> Outcome {
    let ufi = (0..100)
        .filter(|&seed| !union_find_matches(60_000 + seed, 10_000))
        .count();
    let sfm = (0..100)
        .filter(|&seed| !split_findmin_matches(70_000 + seed, 10_000))
        .count();
    outcome(ufi == 0 && sfm == 0, format!("100 seeds x 10^4 ops each: union-find-increase {ufi} mismatches, split-findmin {sfm} mismatches"))
}

struct Sample {
    n: usize,
    m: usize,
    active: f64,
    main_calls: f64,
    max_relaxations: usize,
    sfm_ops: f64,
}

fn sample(g: &Graph, queries: usize) -> Sample {
    let p = preprocess(g, &MinBalanceConfig::default()).unwrap();
    let engine = p.engine().unwrap();
    let k = p.reduced.node_count();
    let mut out = Sample {
        n: g.node_count(),
        m: g.arc_count(),
        active: p.stats.min_balance.active_arc_total as f64,
        main_calls: 0.0,
        max_relaxations: 0,
        sfm_ops: 0.0,
    };
    let q = queries.clamp(1, k);
    for i in 0..q {
        let sp = engine.run(i * k / q).unwrap();
        out.main_calls += sp.stats.main_calls as f64 / q as f64;
        out.max_relaxations = out.max_relaxations.max(sp.stats.relaxations);
        out.sfm_ops += (sp.stats.sfm.splits + sp.stats.sfm.findmins + sp.stats.sfm.decreasekeys)
            as f64
            / q as f64;
    }
    out
}

const BAND: f64 = 0.3;

fn no_upward_drift(v: &[f64]) -> bool {
    v.iter().all(|&x| x <= (1.0 + BAND) * v[0])
}

fn within_band(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s[s.len() / 2];
    s.iter().all(|&x| (x - mid).abs() <= BAND * mid)
}

fn scaling() -> Outcome {
    let dense: Vec<Sample> = (10..=15)
        .map(|e| {
            sample(
                &generate::strongly_connected(
                    &mut generate::rng(80_000 + e),
                    256,
                    1 << e,
                    1,
                    1_000_000_000,
                ),
                16,
            )
        })
        .collect();
    let sparse: Vec<Sample> = (8..=13)
        .map(|e| {
            sample(
                &generate::bounded_degree(&mut generate::rng(90_000 + e), 1 << e, 4, 1, 1_000_000),
                16,
            )
        })
        .collect();
    let k: Vec<f64> = dense
        .iter()
        .map(|s| s.active / (s.m as f64 * (s.n as f64).log2()))
        .collect();
    let c: Vec<f64> = sparse
        .iter()
        .chain(&dense)
        .map(|s| s.main_calls / s.n as f64)
        .collect();
    let per_m = |f: &dyn Fn(&Sample) -> f64| {
        no_upward_drift(&dense.iter().map(|s| f(s) / s.m as f64).collect::<Vec<_>>())
    };
    let checks = [
        ("K no upward drift", no_upward_drift(&k)),
        (
            "active arcs <= 2.5x per doubling",
            dense.windows(2).all(|w| w[1].active <= 2.5 * w[0].active),
        ),
        ("C stable", within_band(&c)),
        (
            "relaxations <= m + n",
            dense
                .iter()
                .chain(&sparse)
                .all(|s| s.max_relaxations <= s.m + s.n),
        ),
        (
            "linear in m at fixed n",
            per_m(&|s| s.active) && per_m(&|s| s.main_calls) && per_m(&|s| s.sfm_ops),
        ),
    ];
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "K [{}], C [{}], failed checks: {failed:?}",
            fmt(&k),
            fmt(&c)
        ),
    )
}

fn instrumentation(contracted: &[Option<Graph>]) -> Outcome {
    let (mut runs, mut doubling, mut floor, mut cheap) = (0, 0, 0, 0);
    for (i, g) in contracted.iter().enumerate() {
        let Some(g) = g else { continue };
        for rho in [0u32, 1, 2] {
            let cfg = MinBalanceConfig {
                rho,
                precheck: Precheck::Skip,
                audit: true,
            };
            let mb = min_balance(g, &cfg).unwrap();
            runs += 1;
            doubling += mb.stats.doubling_violations(rho);
            floor += mb.stats.floor_violations;
            cheap += mb.stats.cheap_live_violations;
            if i % 5 != 0 {
                break;
            }
        }
    }
    outcome(
        doubling + floor + cheap == 0,
        format!("{runs} audited runs, {doubling} doubling violations, {floor} floor violations, {cheap} cheap live arcs"),
    )
}

fn main() {
    let corpus = corpus();
    let mut corpus_pipelines = Vec::new();
    let mut contracted = Vec::new();
    let mut sssp_pipelines = Vec::new();
    let mut results = Vec::new();
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {id:>2} {}: {name}: {} ({:.1}s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push(o.passed);
    };
    run(1, "balancing contract", &mut || {
        balancing(&corpus, &mut corpus_pipelines)
    });
    run(2, "rough balance contract", &mut || {
        rough(&corpus, &mut contracted)
    });
    run(3, "find-balance exactness", &mut find_balance_exact);
    run(4, "small-cycles postconditions", &mut small_cycles_contract);
    run(5, "balance characterizations agree", &mut characterizations);
    run(6, "shortest path exactness", &mut || {
        shortest_paths(&mut sssp_pipelines)
    });
    run(7, "hierarchy validity", &mut || {
        hierarchies(
            corpus_pipelines
                .iter()
                .chain(sssp_pipelines.iter().map(|(_, p)| p)),
        )
    });
    run(8, "data structure oracles", &mut data_structures);
    run(9, "scaling sanity", &mut scaling);
    run(10, "threshold doubling and floor", &mut || {
        instrumentation(&contracted)
    });
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
