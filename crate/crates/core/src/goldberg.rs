//! Goldberg-style refinement on costs >= -1 that contracts cycles of
//! nonpositive reduced cost instead of reporting them, and the Small-Cycles
//! wrapper built on top of it.

use crate::error::{Error, Result};
use crate::graph::{csr, scc_labels, ContractionTrace, Cost, Partition};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineStats {
    pub phases: usize,
    pub antichain_relabels: usize,
    pub chain_eliminations: usize,
    pub fallback_relabels: usize,
    /// Phases that removed fewer than ceil(sqrt(k)) improvable nodes.
    pub shortfalls: usize,
    pub contractions: usize,
    /// Improvable arcs found closing a cycle during chain elimination.
    pub cycle_witnesses: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub partition: Partition,
    pub potential: Vec<i64>,
    pub stats: RefineStats,
}

pub fn ceil_sqrt(k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    // Newton iteration for floor(sqrt(k)), then round up.
    let mut x = k;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + k / x) / 2;
    }
    if x * x == k {
        x
    } else {
        x + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Antichain,
    Chain,
    Fallback,
}

struct Refine {
    tail: Vec<usize>,
    head: Vec<usize>,
    rc: Vec<i64>,
    alive: Vec<usize>,
    lp: Vec<i64>,
    live: Vec<usize>,
    trace: ContractionTrace,
    stats: RefineStats,
}

/// Per-phase view of the live graph with local node indices.
struct View {
    local: Vec<usize>,
    out: (Vec<usize>, Vec<usize>),
    admissible: (Vec<usize>, Vec<usize>),
}

impl Refine {
    fn view(&self) -> View {
        let mut local = vec![usize::MAX; self.trace.node_count()];
        for (i, &v) in self.live.iter().enumerate() {
            local[v] = i;
        }
        let count = self.live.len();
        let out = csr(count, self.alive.iter().map(|&e| (local[self.tail[e]], e)));
        let admissible = csr(
            count,
            self.alive
                .iter()
                .filter(|&&e| self.rc[e] <= 0)
                .map(|&e| (local[self.tail[e]], e)),
        );
        View {
            local,
            out,
            admissible,
        }
    }

    /// Contracts every strongly connected component of the admissible graph.
    fn decycle(&mut self, phase: usize) -> Result<()> {
        let count = self.live.len();
        let mut local = vec![usize::MAX; self.trace.node_count()];
        for (i, &v) in self.live.iter().enumerate() {
            local[v] = i;
        }
        let comps = scc_labels(
            count,
            self.alive
                .iter()
                .filter(|&&e| self.rc[e] <= 0)
                .map(|&e| (local[self.tail[e]], local[self.head[e]])),
        );
        if comps.count == count {
            return Ok(());
        }
        let mut rename: Vec<usize> = (0..self.trace.node_count()).collect();
        for set in comps.sets() {
            if set.len() < 2 {
                continue;
            }
            let members: Vec<usize> = set.iter().map(|&i| self.live[i]).collect();
            let pots = members.iter().map(|&v| self.lp[v] as Cost).collect();
            let node = self.trace.record(phase, 0, members.clone(), pots)?;
            self.lp.push(0);
            rename.push(node);
            for &v in &members {
                rename[v] = node;
            }
            self.stats.contractions += 1;
        }
        for &e in &self.alive {
            self.tail[e] = rename[self.tail[e]];
            self.head[e] = rename[self.head[e]];
        }
        let (tail, head) = (&self.tail, &self.head);
        self.alive.retain(|&e| tail[e] != head[e]);
        let mut live: Vec<usize> = self.live.iter().map(|&v| rename[v]).collect();
        live.sort_unstable();
        live.dedup();
        self.live = live;
        Ok(())
    }

    /// Decrements potentials on the nodes reached from `sources`, where a
    /// source with key k is first relabelled in round k of `rounds`; arcs of
    /// positive reduced cost r join the reached set r rounds after their tail.
    fn relabel(&mut self, view: &View, sources: &[(usize, usize)], rounds: usize) -> Vec<usize> {
        let count = self.live.len();
        let unreached = rounds + 1;
        let mut key = vec![unreached; count];
        let mut buckets = vec![Vec::new(); rounds + 1];
        for &(v, k) in sources {
            if k < key[v] {
                key[v] = k;
                buckets[k].push(v);
            }
        }
        let mut done = vec![false; count];
        for b in 1..=rounds {
            while let Some(u) = buckets[b].pop() {
                if done[u] || key[u] != b {
                    continue;
                }
                done[u] = true;
                let (off, arcs) = &view.out;
                for &e in &arcs[off[u]..off[u + 1]] {
                    let v = view.local[self.head[e]];
                    let cand = b + self.rc[e].max(0) as usize;
                    if cand <= rounds && cand < key[v] {
                        key[v] = cand;
                        buckets[cand].push(v);
                    }
                }
            }
        }
        let dec: Vec<i64> = key.iter().map(|&k| (unreached - k) as i64).collect();
        for (i, &v) in self.live.iter().enumerate() {
            self.lp[v] -= dec[i];
        }
        for &e in &self.alive {
            let (u, v) = (view.local[self.tail[e]], view.local[self.head[e]]);
            self.rc[e] += dec[v] - dec[u];
            debug_assert!(self.rc[e] >= -1);
        }
        key
    }

    fn improvable(&self, view: &View) -> Vec<bool> {
        let mut imp = vec![false; self.live.len()];
        for &e in &self.alive {
            if self.rc[e] == -1 {
                imp[view.local[self.head[e]]] = true;
            }
        }
        imp
    }

    fn run(&mut self) -> Result<()> {
        let mut previous: Option<(usize, Step)> = None;
        let mut force_fallback = false;
        for phase in 1.. {
            self.decycle(phase)?;
            let view = self.view();
            let imp = self.improvable(&view);
            let k = imp.iter().filter(|&&x| x).count();
            if let Some((k_prev, step)) = previous {
                let removed = k_prev.saturating_sub(k);
                if step != Step::Fallback && removed < ceil_sqrt(k_prev) {
                    self.stats.shortfalls += 1;
                }
                force_fallback = removed == 0;
            }
            if k == 0 {
                break;
            }
            self.stats.phases += 1;
            let count = self.live.len();

            if force_fallback {
                let i = imp.iter().position(|&x| x).unwrap();
                self.relabel(&view, &[(i, 1)], 1);
                self.stats.fallback_relabels += 1;
                previous = Some((k, Step::Fallback));
                continue;
            }

            // Distances from a virtual source over the acyclic admissible graph.
            let order = scc_labels(
                count,
                self.alive
                    .iter()
                    .filter(|&&e| self.rc[e] <= 0)
                    .map(|&e| (view.local[self.tail[e]], view.local[self.head[e]])),
            );
            debug_assert_eq!(order.count, count);
            let mut topo = vec![0; count];
            for (v, &l) in order.label.iter().enumerate() {
                topo[l] = v;
            }
            let mut d = vec![0i64; count];
            let mut pred = vec![usize::MAX; count];
            let (off, arcs) = &view.admissible;
            for &u in &topo {
                for &e in &arcs[off[u]..off[u + 1]] {
                    let v = view.local[self.head[e]];
                    if d[u] + self.rc[e] < d[v] {
                        d[v] = d[u] + self.rc[e];
                        pred[v] = e;
                    }
                }
            }
            let c = ceil_sqrt(k) as i64;
            let deepest = (0..count).min_by_key(|&v| (d[v], v)).unwrap();
            if d[deepest] <= -c {
                let mut path = Vec::new();
                let mut v = deepest;
                while pred[v] != usize::MAX {
                    path.push(pred[v]);
                    v = view.local[self.tail[pred[v]]];
                }
                path.reverse();
                let chain: Vec<usize> = path
                    .iter()
                    .filter(|&&e| self.rc[e] == -1)
                    .map(|&e| view.local[self.head[e]])
                    .collect();
                let t = chain.len();
                let sources: Vec<(usize, usize)> =
                    chain.iter().enumerate().map(|(i, &w)| (w, t - i)).collect();
                let before: Vec<i64> = self.rc.clone();
                let key = self.relabel(&view, &sources, t);
                let mut on_chain = vec![false; count];
                for &w in &chain {
                    on_chain[w] = true;
                }
                for &e in &self.alive {
                    let (u, w) = (view.local[self.tail[e]], view.local[self.head[e]]);
                    if before[e] == -1 && on_chain[w] && key[u] <= key[w] {
                        self.stats.cycle_witnesses.push(e);
                    }
                }
                self.stats.chain_eliminations += 1;
                previous = Some((k, Step::Chain));
            } else {
                let mut levels = vec![Vec::new(); c as usize];
                for v in 0..count {
                    if imp[v] {
                        levels[(-d[v]) as usize].push((v, 1));
                    }
                }
                let best = (1..c as usize).max_by_key(|&q| (levels[q].len(), std::cmp::Reverse(q)));
                let x = best
                    .map(|q| std::mem::take(&mut levels[q]))
                    .unwrap_or_default();
                self.relabel(&view, &x, 1);
                self.stats.antichain_relabels += 1;
                previous = Some((k, Step::Antichain));
            }
        }
        Ok(())
    }
}

/// Partition into cycle-contracted classes plus an integral potential with
/// nonnegative reduced costs between classes. Costs must be at least -1.
pub fn goldberg_refine(n: usize, arcs: &[(usize, usize, i64)]) -> Result<Refinement> {
    for (e, &(u, v, c)) in arcs.iter().enumerate() {
        if u >= n || v >= n {
            return Err(Error::NodeOutOfRange { node: u.max(v), n });
        }
        if c < -1 {
            return Err(Error::BelowThreshold {
                arc: e,
                cost: c as Cost,
                lower: -1,
            });
        }
    }
    let mut state = Refine {
        tail: arcs.iter().map(|a| a.0).collect(),
        head: arcs.iter().map(|a| a.1).collect(),
        rc: arcs.iter().map(|a| a.2).collect(),
        alive: (0..arcs.len())
            .filter(|&e| arcs[e].0 != arcs[e].1)
            .collect(),
        lp: vec![0; n],
        live: (0..n).collect(),
        trace: ContractionTrace::new(n),
        stats: RefineStats::default(),
    };
    state.run()?;
    let lp = &state.lp;
    let potential = state
        .trace
        .compose(|r| lp[r] as Cost)
        .into_iter()
        .map(|x| x as i64)
        .collect();
    let mut root = vec![0; n];
    for (v, r) in root.iter_mut().enumerate() {
        let mut x = v;
        while let Some(p) = state.trace.parent(x) {
            x = p;
        }
        *r = x;
    }
    Ok(Refinement {
        partition: Partition::from_labels(&root),
        potential,
        stats: state.stats,
    })
}

/// First violated refinement postcondition, if any.
pub fn refine_violation(n: usize, arcs: &[(usize, usize, i64)], r: &Refinement) -> Option<String> {
    let p = &r.partition;
    let pi = &r.potential;
    for (v, &x) in pi.iter().enumerate() {
        if x > 0 || x < -(n as i64) {
            return Some(format!("potential {x} of node {v} outside [-n, 0]"));
        }
    }
    let rc = |&(u, v, c): &(usize, usize, i64)| c + pi[u] - pi[v];
    for (e, a) in arcs.iter().enumerate() {
        let inside = p.class_of(a.0) == p.class_of(a.1);
        if inside && rc(a) < -1 {
            return Some(format!("arc {e} inside a class has reduced cost {}", rc(a)));
        }
        if !inside && rc(a) < 0 {
            return Some(format!(
                "arc {e} between classes has reduced cost {}",
                rc(a)
            ));
        }
    }
    let comps = scc_labels(
        n,
        arcs.iter()
            .filter(|a| p.class_of(a.0) == p.class_of(a.1) && rc(a) <= 0)
            .map(|a| (a.0, a.1)),
    );
    class_split(p, &comps.label)
}

fn class_split(p: &Partition, label: &[usize]) -> Option<String> {
    let mut first = vec![usize::MAX; p.count()];
    for (v, &l) in label.iter().enumerate() {
        let c = p.class_of(v);
        if first[c] == usize::MAX {
            first[c] = l;
        } else if first[c] != l {
            return Some(format!("class {c} is not strongly connected (node {v})"));
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct SmallCycles {
    pub partition: Partition,
    /// Nonpositive multiples of the step D.
    pub potential: Vec<Cost>,
    pub stats: RefineStats,
}

/// Partition and potential such that classes are strongly connected through
/// arcs with reduced cost in [L, L+2D], reduced costs inside classes are at
/// least L and reduced costs between classes are at least L+D.
pub fn small_cycles(
    lower: Cost,
    step: Cost,
    n: usize,
    arcs: &[(usize, usize, Cost)],
) -> Result<SmallCycles> {
    if step <= 0 {
        return Err(Error::NonPositive(step));
    }
    let cap = n as i64 + 1;
    let mut scaled = Vec::with_capacity(arcs.len());
    for (e, &(u, v, c)) in arcs.iter().enumerate() {
        if c < lower {
            return Err(Error::BelowThreshold {
                arc: e,
                cost: c,
                lower,
            });
        }
        // Only the class of the current reduced cost matters; beyond n+1 no
        // sequence of relabels can bring an arc down to zero.
        let bar = ((c - lower) / step - 1).min(cap as Cost) as i64;
        scaled.push((u, v, bar));
    }
    let r = goldberg_refine(n, &scaled)?;
    let potential = r.potential.iter().map(|&x| x as Cost * step).collect();
    Ok(SmallCycles {
        partition: r.partition,
        potential,
        stats: r.stats,
    })
}

/// First violated Small-Cycles postcondition, if any.
pub fn small_cycles_violation(
    lower: Cost,
    step: Cost,
    n: usize,
    arcs: &[(usize, usize, Cost)],
    out: &SmallCycles,
) -> Option<String> {
    let p = &out.partition;
    let pi = &out.potential;
    if p.len() != n || pi.len() != n {
        return Some("output size mismatch".into());
    }
    for (v, &x) in pi.iter().enumerate() {
        if x > 0 || x < -(n as Cost) * step || x % step != 0 {
            return Some(format!(
                "potential {x} of node {v} is not a multiple of D in [-nD, 0]"
            ));
        }
    }
    let rc = |&(u, v, c): &(usize, usize, Cost)| c + pi[u] - pi[v];
    for (e, a) in arcs.iter().enumerate() {
        let inside = p.class_of(a.0) == p.class_of(a.1);
        if inside && rc(a) < lower {
            return Some(format!(
                "arc {e} inside a class has reduced cost {} < L",
                rc(a)
            ));
        }
        if !inside && rc(a) < lower + step {
            return Some(format!(
                "arc {e} between classes has reduced cost {} < L+D",
                rc(a)
            ));
        }
    }
    let comps = scc_labels(
        n,
        arcs.iter()
            .filter(|a| p.class_of(a.0) == p.class_of(a.1) && rc(a) <= lower + 2 * step)
            .map(|a| (a.0, a.1)),
    );
    class_split(p, &comps.label)
}
