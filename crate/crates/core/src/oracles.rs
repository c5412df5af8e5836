//! Brute-force reference implementations used by tests and `verify`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{scc_labels, Cost, Graph};

/// A balance factor xi = num / den.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Xi {
    pub num: Cost,
    pub den: Cost,
}

impl Xi {
    pub fn integer(k: Cost) -> Xi {
        Xi { num: k, den: 1 }
    }

    /// xi = 1 + 1/2^(rho-1).
    pub fn from_rho(rho: u32) -> Xi {
        let d: Cost = 1 << rho;
        Xi { num: d + 2, den: d }
    }

    /// Whether `x <= xi * y`.
    pub fn admits(&self, x: Cost, y: Cost) -> bool {
        x * self.den <= self.num * y
    }
}

impl std::fmt::Display for Xi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (mut a, mut b) = (self.num, self.den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let g = a.max(1);
        if self.den == g {
            write!(f, "{}", self.num / g)
        } else {
            write!(f, "{}/{}", self.num / g, self.den / g)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Witness {
    Arc(usize),
    Pair(usize, usize),
    Subset(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub property: String,
    pub fingerprint: u64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

impl OracleReport {
    pub fn new(property: &str, g: &Graph, costs: &[Cost], witness: Option<Witness>) -> Self {
        OracleReport {
            property: property.to_string(),
            fingerprint: fingerprint(g, costs),
            passed: witness.is_none(),
            witness,
        }
    }
}

pub fn fingerprint(g: &Graph, costs: &[Cost]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    g.node_count().hash(&mut h);
    for (a, c) in g.arcs().iter().zip(costs) {
        (a.tail, a.head, c).hash(&mut h);
    }
    h.finish()
}

/// Minimax labels from `s`: `b[j]` is the least possible maximum arc cost on
/// an s-j path, with `b[s] = 0`.
pub fn bottleneck_from(g: &Graph, costs: &[Cost], s: usize) -> Vec<Option<Cost>> {
    let mut best: Vec<Option<Cost>> = vec![None; g.node_count()];
    let mut done = vec![false; g.node_count()];
    let mut heap = BinaryHeap::new();
    best[s] = Some(0);
    heap.push(Reverse((0, s)));
    while let Some(Reverse((b, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for e in g.out_range(u) {
            let v = g.arc(e).head;
            let cand = b.max(costs[e]);
            if best[v].map_or(true, |old| cand < old) {
                best[v] = Some(cand);
                heap.push(Reverse((cand, v)));
            }
        }
    }
    best
}

pub fn bottleneck_oracle(g: &Graph, i: usize, j: usize) -> Option<Cost> {
    bottleneck_from(g, &g.costs(), i)[j]
}

pub fn all_bottlenecks(g: &Graph, costs: &[Cost]) -> Vec<Vec<Option<Cost>>> {
    (0..g.node_count())
        .map(|s| bottleneck_from(g, costs, s))
        .collect()
}

/// Balance values by increasing thresholds: beta(e) is the first distinct cost
/// r at which e lies inside a strongly connected component of G[<= r].
pub fn beta_oracle(g: &Graph, costs: &[Cost]) -> Result<Vec<Cost>> {
    let m = g.arc_count();
    let mut thresholds: Vec<Cost> = costs.to_vec();
    thresholds.sort_unstable();
    thresholds.dedup();
    let mut beta: Vec<Option<Cost>> = vec![None; m];
    let mut pending = m;
    for &r in &thresholds {
        if pending == 0 {
            break;
        }
        let comps = scc_labels(
            g.node_count(),
            g.arcs()
                .iter()
                .zip(costs)
                .filter(|(_, &c)| c <= r)
                .map(|(a, _)| (a.tail, a.head)),
        );
        for (e, a) in g.arcs().iter().enumerate() {
            if beta[e].is_none() && costs[e] <= r && comps.label[a.tail] == comps.label[a.head] {
                beta[e] = Some(r);
                pending -= 1;
            }
        }
    }
    beta.into_iter()
        .map(|b| b.ok_or(Error::NotStronglyConnected))
        .collect()
}

/// Balance values via bottlenecks: beta(u, v) = max(c(u, v), b(v, u)).
pub fn beta_by_bottleneck(g: &Graph, costs: &[Cost]) -> Result<Vec<Cost>> {
    let n = g.node_count();
    let mut back: Vec<Option<Vec<Option<Cost>>>> = vec![None; n];
    let mut beta = Vec::with_capacity(g.arc_count());
    for (e, a) in g.arcs().iter().enumerate() {
        let from_head = back[a.head].get_or_insert_with(|| bottleneck_from(g, costs, a.head));
        let b = from_head[a.tail].ok_or(Error::NotStronglyConnected)?;
        beta.push(b.max(costs[e]));
    }
    Ok(beta)
}

/// Passes iff every arc lies on a cycle whose costs are all at most xi * c(e).
pub fn balance_check(g: &Graph, costs: &[Cost], xi: Xi) -> OracleReport {
    let witness = match beta_by_bottleneck(g, costs) {
        Ok(beta) => (0..g.arc_count())
            .find(|&e| !xi.admits(beta[e], costs[e]))
            .map(Witness::Arc),
        Err(_) => {
            let comps = scc_labels(g.node_count(), g.arcs().iter().map(|a| (a.tail, a.head)));
            let e = g
                .arcs()
                .iter()
                .position(|a| comps.label[a.tail] != comps.label[a.head]);
            Some(Witness::Arc(e.unwrap_or(0)))
        }
    };
    OracleReport::new("balance", g, costs, witness)
}

/// Pairwise form: b(j, i) <= xi * b(i, j) for all ordered pairs.
pub fn pairwise_check(g: &Graph, costs: &[Cost], xi: Xi) -> OracleReport {
    let b = all_bottlenecks(g, costs);
    let n = g.node_count();
    let mut witness = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ok = match (b[j][i], b[i][j]) {
                (Some(x), Some(y)) => xi.admits(x, y),
                _ => false,
            };
            if !ok {
                witness = Some(Witness::Pair(i, j));
                break 'outer;
            }
        }
    }
    OracleReport::new("pairwise-bottleneck", g, costs, witness)
}

/// Cut form: for every proper subset S, the cheapest arc entering S is at
/// most xi times the cheapest arc leaving S. Enumerates subsets, so n <= 12.
pub fn cut_check(g: &Graph, costs: &[Cost], xi: Xi) -> Result<OracleReport> {
    let n = g.node_count();
    if n > 12 {
        return Err(Error::TooLarge(format!("cut check needs n <= 12, got {n}")));
    }
    let mut witness = None;
    for mask in 1u32..(1u32 << n) - 1 {
        let inside = |v: usize| mask >> v & 1 == 1;
        let (mut leave, mut enter) = (None::<Cost>, None::<Cost>);
        for (a, &c) in g.arcs().iter().zip(costs) {
            match (inside(a.tail), inside(a.head)) {
                (true, false) => leave = Some(leave.map_or(c, |x| x.min(c))),
                (false, true) => enter = Some(enter.map_or(c, |x| x.min(c))),
                _ => {}
            }
        }
        let ok = match (enter, leave) {
            (Some(x), Some(y)) => xi.admits(x, y),
            _ => false,
        };
        if !ok {
            witness = Some(Witness::Subset((0..n).filter(|&v| inside(v)).collect()));
            break;
        }
    }
    Ok(OracleReport::new("cut", g, costs, witness))
}

pub fn dijkstra(g: &Graph, costs: &[Cost], s: usize) -> Vec<Option<Cost>> {
    let mut dist: Vec<Option<Cost>> = vec![None; g.node_count()];
    let mut done = vec![false; g.node_count()];
    let mut heap = BinaryHeap::new();
    dist[s] = Some(0);
    heap.push(Reverse((0, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for e in g.out_range(u) {
            let v = g.arc(e).head;
            let cand = d + costs[e];
            if dist[v].map_or(true, |old| cand < old) {
                dist[v] = Some(cand);
                heap.push(Reverse((cand, v)));
            }
        }
    }
    dist
}

pub const FLOYD_WARSHALL_LIMIT: usize = 512;

pub fn floyd_warshall(g: &Graph, costs: &[Cost]) -> Result<Vec<Vec<Option<Cost>>>> {
    let n = g.node_count();
    if n > FLOYD_WARSHALL_LIMIT {
        return Err(Error::TooLarge(format!(
            "floyd-warshall needs n <= {FLOYD_WARSHALL_LIMIT}"
        )));
    }
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for (a, &c) in g.arcs().iter().zip(costs) {
        let cur: &mut Option<Cost> = &mut d[a.tail][a.head];
        if cur.map_or(true, |x| c < x) {
            *cur = Some(c);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].map_or(true, |x| ik + kj < x) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    Ok(d)
}
