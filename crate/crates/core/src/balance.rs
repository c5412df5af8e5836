//! Balance values by divide and conquer, and the rough balancing potential.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{round_up_pow2, scc_labels, Cost, Graph, Potential};
use crate::ufi::UnionFindIncrease;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FindBalanceStats {
    /// Total arcs handled by all calls at each recursion depth.
    pub arcs_per_depth: Vec<usize>,
    pub calls: usize,
}

impl FindBalanceStats {
    pub fn depth(&self) -> usize {
        self.arcs_per_depth.len()
    }
}

#[derive(Clone, Debug)]
pub struct BalanceValues {
    pub beta: Vec<Cost>,
    pub stats: FindBalanceStats,
}

type LocalArc = (usize, usize, Cost, usize);

/// beta(e): the least r such that e lies on a cycle of G[<= r].
pub fn find_balance(g: &Graph) -> Result<BalanceValues> {
    find_balance_arcs(
        g.node_count(),
        &g.arcs()
            .iter()
            .map(|a| (a.tail, a.head, a.cost))
            .collect::<Vec<_>>(),
    )
}

/// Same as [`find_balance`] on a multigraph given as an arc list.
pub fn find_balance_arcs(n: usize, arcs: &[(usize, usize, Cost)]) -> Result<BalanceValues> {
    if n == 0 {
        return Err(Error::Empty);
    }
    for (e, &(_, _, c)) in arcs.iter().enumerate() {
        if c <= 0 {
            return Err(Error::BelowThreshold {
                arc: e,
                cost: c,
                lower: 1,
            });
        }
    }
    if scc_labels(n, arcs.iter().map(|a| (a.0, a.1))).count != 1 {
        return Err(Error::NotStronglyConnected);
    }
    let local: Vec<LocalArc> = arcs
        .iter()
        .enumerate()
        .map(|(e, &(u, v, c))| (u, v, c, e))
        .collect();
    let mut beta = vec![0; arcs.len()];
    let mut stats = FindBalanceStats::default();
    solve(n, local, 0, &mut beta, &mut stats);
    Ok(BalanceValues { beta, stats })
}

fn inside_count(n: usize, arcs: &[LocalArc], r: Cost) -> usize {
    let comps = scc_labels(n, arcs.iter().filter(|a| a.2 <= r).map(|a| (a.0, a.1)));
    arcs.iter()
        .filter(|a| a.2 <= r && comps.label[a.0] == comps.label[a.1])
        .count()
}

fn solve(
    n: usize,
    mut arcs: Vec<LocalArc>,
    depth: usize,
    beta: &mut [Cost],
    stats: &mut FindBalanceStats,
) {
    let m = arcs.len();
    if m == 0 {
        return;
    }
    stats.calls += 1;
    if stats.arcs_per_depth.len() <= depth {
        stats.arcs_per_depth.push(0);
    }
    stats.arcs_per_depth[depth] += m;

    arcs.sort_by_key(|a| a.2);
    // Smallest position h whose threshold keeps at least half of the arcs
    // inside strongly connected components; h = m always qualifies.
    let (mut lo, mut hi) = (0, m);
    while hi - lo > 1 {
        let t = (lo + hi).div_ceil(2);
        if 2 * inside_count(n, &arcs, arcs[t - 1].2) >= m {
            hi = t;
        } else {
            lo = t;
        }
    }
    let r = arcs[hi - 1].2;
    let below = scc_labels(n, arcs.iter().filter(|a| a.2 < r).map(|a| (a.0, a.1)));
    let upto = scc_labels(n, arcs.iter().filter(|a| a.2 <= r).map(|a| (a.0, a.1)));

    let mut parts: Vec<Vec<LocalArc>> = vec![Vec::new(); below.count];
    let mut outer = Vec::new();
    for &(u, v, c, id) in &arcs {
        if c < r && below.label[u] == below.label[v] {
            parts[below.label[u]].push((u, v, c, id));
        } else if upto.label[u] == upto.label[v] {
            beta[id] = r.max(c);
        } else {
            outer.push((upto.label[u], upto.label[v], c, id));
        }
    }

    let mut local = vec![usize::MAX; n];
    for part in parts.into_iter().filter(|p| !p.is_empty()) {
        let mut k = 0;
        let mut relabel = |x: usize, local: &mut Vec<usize>| {
            if local[x] == usize::MAX {
                local[x] = k;
                k += 1;
            }
            local[x]
        };
        let mapped: Vec<LocalArc> = part
            .iter()
            .map(|&(u, v, c, id)| (relabel(u, &mut local), relabel(v, &mut local), c, id))
            .collect();
        for &(u, v, _, _) in &part {
            local[u] = usize::MAX;
            local[v] = usize::MAX;
        }
        solve(k, mapped, depth + 1, beta, stats);
    }
    if upto.count > 1 {
        solve(upto.count, outer, depth + 1, beta, stats);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Initial,
    Regular,
    Special,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Threshold {
    pub r: Cost,
    pub kind: StepKind,
}

/// r_1 = min beta; then r_{t+1} = 2n r_t if some beta lies in (r_t, 2n r_t],
/// else the next beta value; stops once r_t >= max beta.
pub fn threshold_sequence(beta: &[Cost], n: Cost) -> Vec<Threshold> {
    let mut values = beta.to_vec();
    values.sort_unstable();
    values.dedup();
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let last = *values.last().unwrap();
    let mut seq = vec![Threshold {
        r: first,
        kind: StepKind::Initial,
    }];
    let mut r = first;
    while r < last {
        let next = values[values.partition_point(|&b| b <= r)];
        if next <= 2 * n * r {
            r *= 2 * n;
            seq.push(Threshold {
                r,
                kind: StepKind::Regular,
            });
        } else {
            r = next;
            seq.push(Threshold {
                r,
                kind: StepKind::Special,
            });
        }
    }
    seq
}

/// Topological order of an acyclic arc set over `count` nodes, returned as
/// increments `j * r` for the j-th node (1-based); errors on a cycle.
pub fn iteration_increments(count: usize, arcs: &[(usize, usize)], r: Cost) -> Result<Vec<Cost>> {
    let comps = scc_labels(count, arcs.iter().copied());
    if comps.count != count {
        return Err(Error::CyclicActiveArcs);
    }
    Ok(comps.label.iter().map(|&j| (j as Cost + 1) * r).collect())
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RoughStats {
    pub thresholds: Vec<Threshold>,
    pub active_arcs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RoughBalance {
    /// Numerators over 3n^2; reduced costs are 3n^2 c + pi(u) - pi(v).
    pub potential: Potential,
    pub beta: Vec<Cost>,
    pub n: Cost,
    pub stats: RoughStats,
}

/// A potential under which the graph becomes 7n^2-min-balanced.
pub fn rough_balance(g: &Graph) -> Result<RoughBalance> {
    let nodes = g.node_count();
    let n = round_up_pow2(nodes).max(2);
    let scale = 3 * n * n;
    let bv = find_balance(g)?;
    let beta = bv.beta;
    let thresholds = threshold_sequence(&beta, n);
    let mut by_beta: Vec<usize> = (0..g.arc_count()).collect();
    by_beta.sort_by_key(|&e| beta[e]);

    let mut ufi = UnionFindIncrease::new(nodes);
    let mut merged = 0;
    let mut bracket = 0;
    let mut local = vec![usize::MAX; nodes];
    let mut stats = RoughStats {
        thresholds: thresholds.clone(),
        active_arcs: Vec::new(),
    };
    for (t, th) in thresholds.iter().enumerate() {
        let prev = if t == 0 { 0 } else { thresholds[t - 1].r };
        while merged < by_beta.len() && beta[by_beta[merged]] <= prev {
            let a = g.arc(by_beta[merged]);
            ufi.union(a.tail, a.head);
            merged += 1;
        }
        let start = bracket.max(merged);
        bracket = start;
        while bracket < by_beta.len() && beta[by_beta[bracket]] <= th.r {
            bracket += 1;
        }
        let mut roots = Vec::new();
        let mut f = Vec::new();
        for &e in &by_beta[start..bracket] {
            let a = g.arc(e);
            let active = match th.kind {
                StepKind::Regular => a.cost <= prev,
                StepKind::Initial | StepKind::Special => a.cost < beta[e],
            };
            if !active {
                continue;
            }
            let (ru, rv) = (ufi.find(a.tail), ufi.find(a.head));
            if ru == rv {
                continue;
            }
            for x in [ru, rv] {
                if local[x] == usize::MAX {
                    local[x] = roots.len();
                    roots.push(x);
                }
            }
            f.push((local[ru], local[rv]));
        }
        stats.active_arcs.push(f.len());
        let inc = iteration_increments(roots.len(), &f, th.r)?;
        for (i, &x) in roots.iter().enumerate() {
            ufi.increase(x, -inc[i]);
            local[x] = usize::MAX;
        }
    }
    let values = (0..nodes).map(|v| ufi.value(v)).collect();
    Ok(RoughBalance {
        potential: Potential { values, scale },
        beta,
        n,
        stats,
    })
}

/// Arcs whose final reduced cost leaves the window [r/(6n^2), 7r/6], where r
/// is the first threshold at or above the arc's balance value.
pub fn claim_window_violations(g: &Graph, rb: &RoughBalance) -> Result<Vec<usize>> {
    let n = rb.n;
    let rs: Vec<Cost> = rb.stats.thresholds.iter().map(|t| t.r).collect();
    let mut bad = Vec::new();
    for (e, a) in g.arcs().iter().enumerate() {
        let r = rs[rs.partition_point(|&x| x < rb.beta[e])];
        let scaled = rb.potential.reduce(a)?;
        if 2 * scaled < r || 2 * scaled > 7 * n * n * r {
            bad.push(e);
        }
    }
    Ok(bad)
}
