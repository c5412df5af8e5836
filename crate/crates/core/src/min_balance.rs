//! Threshold-driven min-balancing: repeated Small-Cycles calls on a shrinking
//! contracted graph, with potentials tracked through union-find-increase.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate;
use crate::goldberg::small_cycles;
use crate::graph::{
    floor_pow2, round_up_pow2, uncontract, ContractionTrace, Cost, Graph, Potential,
};
use crate::oracles::{balance_check, bottleneck_from, Witness, Xi};
use crate::ufi::UnionFindIncrease;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precheck {
    Skip,
    /// Every arc when m <= 2000, otherwise a 1% sample drawn from the seed.
    Sampled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinBalanceConfig {
    pub rho: u32,
    pub precheck: Precheck,
    /// Run the per-iteration invariant checks (costly: O(m) per iteration).
    pub audit: bool,
}

impl Default for MinBalanceConfig {
    fn default() -> Self {
        MinBalanceConfig {
            rho: 0,
            precheck: Precheck::Sampled(0),
            audit: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub iteration: usize,
    pub lower: Cost,
    pub step: Cost,
    pub active: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MinBalanceStats {
    pub iterations: usize,
    pub small_cycles_calls: usize,
    /// Sum over iterations of the number of active arcs.
    pub active_arc_total: usize,
    /// Largest number of iterations any single arc stayed active.
    pub max_active_span: usize,
    pub levels: Vec<Level>,
    /// Live arcs whose current reduced cost fell below L_t (audit only).
    pub floor_violations: usize,
    /// Arcs cheaper than L_t/(7n^3) still live (audit only).
    pub cheap_live_violations: usize,
    /// Newly active arcs whose cost drifted more than n*lambda*L (audit only).
    pub drift_violations: usize,
    /// Arcs whose final reduced cost differs from the cost at contraction (audit only).
    pub freeze_violations: usize,
    /// Union-find values disagreeing with trace replay (audit only).
    pub replay_mismatches: usize,
}

impl MinBalanceStats {
    /// Iterations t with L_{t+2^rho} < 2 L_t.
    pub fn doubling_violations(&self, rho: u32) -> usize {
        let s = 1usize << rho;
        let ls = &self.levels;
        (0..ls.len().saturating_sub(s))
            .filter(|&t| ls[t + s].lower < 2 * ls[t].lower)
            .count()
    }
}

#[derive(Clone, Debug)]
pub struct MinBalance {
    /// Numerators over 2^rho relative to the input costs.
    pub potential: Potential,
    pub trace: ContractionTrace,
    pub stats: MinBalanceStats,
}

fn prescale(g: &Graph, rho: u32) -> Result<Vec<Cost>> {
    let s: Cost = 1 << rho;
    g.arcs()
        .iter()
        .map(|a| {
            if a.cost <= 0 {
                return Err(Error::NonPositive(a.cost));
            }
            a.cost.checked_mul(s).ok_or(Error::Overflow("prescaling"))
        })
        .collect()
}

fn precheck(g: &Graph, n: Cost, mode: Precheck) -> Result<()> {
    let Precheck::Sampled(seed) = mode else {
        return Ok(());
    };
    let factor = 7 * n * n;
    let costs = g.costs();
    if g.arc_count() <= 2000 {
        let report = balance_check(g, &costs, Xi::integer(factor));
        if let Some(Witness::Arc(arc)) = report.witness {
            return Err(Error::NotRoughlyBalanced { factor, arc });
        }
        return Ok(());
    }
    let mut rng = generate::rng(seed);
    let samples = g.arc_count().div_ceil(100);
    for _ in 0..samples {
        let e = rng.gen_range(0..g.arc_count());
        let a = g.arc(e);
        let back = bottleneck_from(g, &costs, a.head)[a.tail];
        if back.map_or(true, |b| b > factor * a.cost) {
            return Err(Error::NotRoughlyBalanced { factor, arc: e });
        }
    }
    Ok(())
}

/// Live classes with their trace ids and accumulated potentials.
struct Classes {
    ufi: UnionFindIncrease,
    trace: ContractionTrace,
    node_of_root: Vec<usize>,
    acc: Vec<Cost>,
    live: usize,
}

impl Classes {
    fn new(k: usize) -> Self {
        Classes {
            ufi: UnionFindIncrease::new(k),
            trace: ContractionTrace::new(k),
            node_of_root: (0..k).collect(),
            acc: vec![0; k],
            live: k,
        }
    }

    fn contracted(&mut self, u: usize, v: usize) -> bool {
        self.ufi.find(u) == self.ufi.find(v)
    }

    fn get_cost(&mut self, c: Cost, u: usize, v: usize) -> Cost {
        c + self.ufi.value(u) - self.ufi.value(v)
    }

    /// Runs Small-Cycles on the given live arcs, applies its potential and
    /// contracts its classes. Returns per-arc potential change and the ids of
    /// arcs that became internal.
    fn round(
        &mut self,
        iteration: usize,
        lower: Cost,
        step: Cost,
        arcs: &[(usize, usize, usize)],
        cost: &mut [Cost],
    ) -> Result<Vec<usize>> {
        let mut local = std::collections::HashMap::new();
        let mut roots = Vec::new();
        let mut sub = Vec::with_capacity(arcs.len());
        for &(u, v, e) in arcs {
            let (ru, rv) = (self.ufi.find(u), self.ufi.find(v));
            let mut id = |r: usize| {
                *local.entry(r).or_insert_with(|| {
                    roots.push(r);
                    roots.len() - 1
                })
            };
            let (lu, lv) = (id(ru), id(rv));
            sub.push((lu, lv, cost[e]));
        }
        let sc = small_cycles(lower, step, roots.len(), &sub)?;
        for (i, &(lu, lv, _)) in sub.iter().enumerate() {
            cost[arcs[i].2] += sc.potential[lu] - sc.potential[lv];
        }
        for (i, &r) in roots.iter().enumerate() {
            let p = sc.potential[i];
            if p != 0 {
                self.ufi.increase(r, p);
                self.acc[self.node_of_root[r]] += p;
            }
        }
        for class in sc.partition.members() {
            if class.len() < 2 {
                continue;
            }
            let mut members: Vec<(usize, usize)> = class
                .iter()
                .map(|&i| (self.node_of_root[roots[i]], roots[i]))
                .collect();
            members.sort_unstable();
            let ids: Vec<usize> = members.iter().map(|m| m.0).collect();
            let pots = ids.iter().map(|&x| self.acc[x]).collect();
            let node = self.trace.record(iteration, lower, ids, pots)?;
            self.acc.push(0);
            for w in members.windows(2) {
                self.ufi.union(w[0].1, w[1].1);
            }
            let root = self.ufi.find(members[0].1);
            self.node_of_root[root] = node;
            self.live -= members.len() - 1;
        }
        Ok(sub
            .iter()
            .enumerate()
            .filter(|(_, a)| sc.partition.class_of(a.0) == sc.partition.class_of(a.1))
            .map(|(i, _)| arcs[i].2)
            .collect())
    }

    fn potential(
        &mut self,
        k: usize,
        scale: Cost,
        stats: &mut Option<&mut MinBalanceStats>,
    ) -> Potential {
        let values: Vec<Cost> = (0..k).map(|v| self.ufi.value(v)).collect();
        if let Some(stats) = stats {
            let acc = &self.acc;
            let replay = self.trace.compose(|r| acc[r]);
            stats.replay_mismatches += values.iter().zip(&replay).filter(|(a, b)| a != b).count();
        }
        Potential { values, scale }
    }
}

/// Min-balances a 7n^2-min-balanced graph: the result is
/// (1 + 1/2^(rho-1))-min-balanced, and the trace records every contraction
/// with its threshold L_t.
pub fn min_balance(g: &Graph, cfg: &MinBalanceConfig) -> Result<MinBalance> {
    let k = g.node_count();
    let rho = cfg.rho;
    let s: Cost = 1 << rho;
    let cost = prescale(g, rho)?;
    let m = g.arc_count();
    let n = round_up_pow2(k).max(2);
    let mut stats = MinBalanceStats::default();
    let mut classes = Classes::new(k);
    if k == 1 || m == 0 {
        if k > 1 {
            return Err(Error::NotStronglyConnected);
        }
        let potential = Potential::zero(k, s);
        return Ok(MinBalance {
            potential,
            trace: classes.trace,
            stats,
        });
    }
    precheck(g, n, cfg.precheck)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&e| cost[e]);
    let arc = |e: usize| g.arc(e);
    // Arc e is active once s * c(e) <= (n+1)(s+1) L, i.e. c <= (n+1) lambda L.
    let within = |c: Cost, lower: Cost| s * c <= (n + 1) * (s + 1) * lower;

    let mut chat = vec![0; m];
    let mut frozen: Vec<Option<Cost>> = vec![None; m];
    let mut active: Vec<usize> = Vec::new();
    let mut since = vec![0usize; m];
    let mut next = 0;
    let mut min_ptr = 0;
    let mut lower = floor_pow2(cost[order[0]])?;
    let mut step = lower >> rho;
    let mut prev_lower = lower;

    let mut t = 1;
    loop {
        while next < m && within(cost[order[next]], lower) {
            let e = order[next];
            next += 1;
            let a = arc(e);
            if classes.contracted(a.tail, a.head) {
                continue;
            }
            chat[e] = classes.get_cost(cost[e], a.tail, a.head);
            if cfg.audit && t > 1 && s * (chat[e] - cost[e]).abs() > n * (s + 1) * prev_lower {
                stats.drift_violations += 1;
            }
            since[e] = t;
            active.push(e);
        }
        if classes.live == 1 {
            break;
        }
        active.retain(|&e| !classes.contracted(arc(e).tail, arc(e).head));
        stats.active_arc_total += active.len();
        stats.levels.push(Level {
            iteration: t,
            lower,
            step,
            active: active.len(),
        });
        if cfg.audit {
            audit_live(g, &cost, &chat, &active, &mut classes, lower, n, &mut stats);
        }

        if !active.is_empty() {
            let arcs: Vec<(usize, usize, usize)> = active
                .iter()
                .map(|&e| (arc(e).tail, arc(e).head, e))
                .collect();
            let inside = classes.round(t, lower, step, &arcs, &mut chat)?;
            stats.small_cycles_calls += 1;
            for e in inside {
                frozen[e] = Some(chat[e]);
                stats.max_active_span = stats.max_active_span.max(t + 1 - since[e]);
            }
        }

        prev_lower = lower;
        if t as Cost % s == 0 {
            while min_ptr < m
                && classes.contracted(arc(order[min_ptr]).tail, arc(order[min_ptr]).head)
            {
                min_ptr += 1;
            }
            let mut candidate = lower + step;
            if min_ptr < m {
                let excess = s * cost[order[min_ptr]] - n * (s + 1) * lower;
                if excess >= s {
                    candidate = candidate.max(floor_pow2(excess / s)?);
                }
            }
            lower = candidate;
            step = lower >> rho;
        } else {
            lower += step;
        }
        t += 1;
    }
    stats.iterations = t - 1;

    let potential = {
        let mut audit_stats = if cfg.audit { Some(&mut stats) } else { None };
        classes.potential(k, s, &mut audit_stats)
    };
    if cfg.audit {
        for e in 0..m {
            if let Some(f) = frozen[e] {
                if potential.reduce(&g.arc(e))? != f {
                    stats.freeze_violations += 1;
                }
            }
        }
    }
    Ok(MinBalance {
        potential,
        trace: classes.trace,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn audit_live(
    g: &Graph,
    cost: &[Cost],
    chat: &[Cost],
    active: &[usize],
    classes: &mut Classes,
    lower: Cost,
    n: Cost,
    stats: &mut MinBalanceStats,
) {
    let mut is_active = vec![false; g.arc_count()];
    for &e in active {
        is_active[e] = true;
        if chat[e] < lower {
            stats.floor_violations += 1;
        }
    }
    for (e, a) in g.arcs().iter().enumerate() {
        if is_active[e] || classes.contracted(a.tail, a.head) {
            continue;
        }
        if classes.get_cost(cost[e], a.tail, a.head) < lower {
            stats.floor_violations += 1;
        }
        if 7 * n * n * n * cost[e] < lower {
            stats.cheap_live_violations += 1;
        }
    }
}

/// The plain variant: every iteration runs Small-Cycles on the whole live
/// graph with D = floor(L/2^rho), then sets L to L + D.
pub fn simple_min_balance(g: &Graph, rho: u32) -> Result<Potential> {
    let k = g.node_count();
    let s: Cost = 1 << rho;
    let cost = prescale(g, rho)?;
    let m = g.arc_count();
    if k == 1 {
        return Ok(Potential::zero(1, s));
    }
    if m == 0 {
        return Err(Error::NotStronglyConnected);
    }
    let mut classes = Classes::new(k);
    let mut chat = cost.clone();
    let mut lower = *cost.iter().min().unwrap();
    let mut t = 1;
    while classes.live > 1 {
        let step = lower >> rho;
        let arcs: Vec<(usize, usize, usize)> = (0..m)
            .map(|e| (g.arc(e).tail, g.arc(e).head, e))
            .filter(|&(u, v, _)| !classes.contracted(u, v))
            .collect();
        if arcs.is_empty() {
            return Err(Error::NotStronglyConnected);
        }
        classes.round(t, lower, step, &arcs, &mut chat)?;
        lower += step;
        t += 1;
    }
    uncontract(&classes.trace, s).map(|p| Potential {
        values: p.values,
        scale: s,
    })
}
