//! Component hierarchy extracted from a min-balance contraction trace.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ContractionTrace, Cost, Graph};

/// Rooted tree whose leaves `0..n` are graph nodes and whose internal
/// vertices `n..` carry a power-of-two level a(v).
#[derive(Clone, Debug)]
pub struct ComponentHierarchy {
    leaves: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<Cost>,
    bound: Vec<Cost>,
    buckets: Vec<usize>,
    bucket_offset: Vec<usize>,
    leaf_order: Vec<usize>,
    position: Vec<usize>,
    range: Vec<(usize, usize)>,
    root: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexInfo {
    pub id: usize,
    pub level: Cost,
    pub bound: Cost,
    pub buckets: usize,
    pub children: Vec<usize>,
}

impl ComponentHierarchy {
    /// Vertex i gets id `leaves + i`; children must refer to smaller ids and
    /// each id may have at most one parent. The last vertex is the root.
    pub fn new(leaves: usize, vertices: Vec<(Cost, Vec<usize>)>) -> Result<Self> {
        let total = leaves + vertices.len();
        let mut parent = vec![None; total];
        let mut children = vec![Vec::new(); total];
        let mut level = Vec::with_capacity(vertices.len());
        for (i, (a, ch)) in vertices.into_iter().enumerate() {
            let id = leaves + i;
            if a < 1 || a.count_ones() != 1 {
                return Err(Error::HierarchyMismatch(format!(
                    "level {a} of vertex {id} is not a power of two"
                )));
            }
            if ch.len() < 2 {
                return Err(Error::HierarchyMismatch(format!(
                    "vertex {id} has fewer than two children"
                )));
            }
            for &c in &ch {
                if c >= id || parent[c].is_some() {
                    return Err(Error::HierarchyMismatch(format!(
                        "bad child {c} of vertex {id}"
                    )));
                }
                parent[c] = Some(id);
            }
            children[id] = ch;
            level.push(a);
        }
        let roots: Vec<usize> = (0..total).filter(|&x| parent[x].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::IncompleteTrace(roots.len()));
        }
        let root = roots[0];

        let mut bound = vec![0; level.len()];
        let mut buckets = vec![0; level.len()];
        for i in 0..level.len() {
            let id = leaves + i;
            let a = level[i];
            let mut u = 3 * a * (children[id].len() as Cost - 1);
            for &c in &children[id] {
                if c >= leaves {
                    u += bound[c - leaves];
                }
            }
            bound[i] = u;
            buckets[i] = 1 + ((u + a - 1) / a) as usize;
        }
        let mut bucket_offset = vec![0; level.len() + 1];
        for i in 0..level.len() {
            bucket_offset[i + 1] = bucket_offset[i] + buckets[i];
        }

        let mut leaf_order = Vec::with_capacity(leaves);
        let mut range = vec![(0, 0); total];
        let mut stack = vec![(root, false)];
        while let Some((x, closing)) = stack.pop() {
            if x < leaves {
                range[x] = (leaf_order.len(), leaf_order.len() + 1);
                leaf_order.push(x);
            } else if closing {
                range[x].1 = leaf_order.len();
            } else {
                range[x].0 = leaf_order.len();
                stack.push((x, true));
                for &c in children[x].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        let mut position = vec![0; leaves];
        for (p, &leaf) in leaf_order.iter().enumerate() {
            position[leaf] = p;
        }
        Ok(ComponentHierarchy {
            leaves,
            parent,
            children,
            level,
            bound,
            buckets,
            bucket_offset,
            leaf_order,
            position,
            range,
            root,
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn vertex_count(&self) -> usize {
        self.level.len()
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_vertex(&self, x: usize) -> bool {
        x >= self.leaves
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// a(v).
    pub fn level(&self, v: usize) -> Cost {
        self.level[v - self.leaves]
    }

    /// U(v): bound on path lengths inside desc(v).
    pub fn bound(&self, v: usize) -> Cost {
        self.bound[v - self.leaves]
    }

    /// eta(v) = 1 + ceil(U(v) / a(v)).
    pub fn bucket_count(&self, v: usize) -> usize {
        self.buckets[v - self.leaves]
    }

    /// Start of v's buckets in a flat array of all buckets.
    pub fn bucket_offset(&self, v: usize) -> usize {
        self.bucket_offset[v - self.leaves]
    }

    pub fn total_buckets(&self) -> usize {
        *self.bucket_offset.last().unwrap()
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    pub fn position(&self, leaf: usize) -> usize {
        self.position[leaf]
    }

    /// Positions of desc(x) in the leaf order, half open.
    pub fn range(&self, x: usize) -> (usize, usize) {
        self.range[x]
    }

    pub fn contains(&self, v: usize, leaf: usize) -> bool {
        let (lo, hi) = self.range[v];
        (lo..hi).contains(&self.position[leaf])
    }

    pub fn lca(&self, i: usize, j: usize) -> usize {
        let mut v = i;
        while !self.contains(v, j) {
            v = self.parent[v].expect("root contains every leaf");
        }
        v
    }

    pub fn describe(&self) -> Vec<VertexInfo> {
        (0..self.level.len())
            .map(|i| {
                let id = self.leaves + i;
                VertexInfo {
                    id,
                    level: self.level[i],
                    bound: self.bound[i],
                    buckets: self.buckets[i],
                    children: self.children[id].clone(),
                }
            })
            .collect()
    }
}

/// One vertex per contraction event, with a(v) = L_t.
pub fn build_hierarchy(trace: &ContractionTrace, rho: u32) -> Result<ComponentHierarchy> {
    if rho != 0 {
        return Err(Error::UnsupportedRho(rho));
    }
    let vertices = trace
        .events()
        .iter()
        .map(|ev| (ev.threshold, ev.members.clone()))
        .collect();
    ComponentHierarchy::new(trace.base_count(), vertices)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HierarchyReport {
    pub pairs_checked: usize,
    pub eta_sum: usize,
    pub violations: Vec<String>,
}

impl HierarchyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn restricted_search(
    g: &Graph,
    s: usize,
    allowed: impl Fn(usize) -> bool,
    bottleneck: bool,
) -> Vec<Option<Cost>> {
    let mut best: Vec<Option<Cost>> = vec![None; g.node_count()];
    let mut heap = BinaryHeap::new();
    best[s] = Some(0);
    heap.push(Reverse((0, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if best[u] != Some(d) {
            continue;
        }
        for a in g.out_arcs(u) {
            if !allowed(a.head) {
                continue;
            }
            let cand = if bottleneck {
                d.max(a.cost)
            } else {
                d + a.cost
            };
            if best[a.head].map_or(true, |x| cand < x) {
                best[a.head] = Some(cand);
                heap.push(Reverse((cand, a.head)));
            }
        }
    }
    best
}

/// Checks levels, the bucket budget, and for leaf pairs with lca v:
/// a(v) <= b(i, j) <= 3 a(v), a bottleneck path and a path of length at most
/// U(v) inside desc(v). `sources_per_vertex` limits the pairs examined
/// (None checks all pairs).
pub fn validate_hierarchy(
    h: &ComponentHierarchy,
    g: &Graph,
    sources_per_vertex: Option<usize>,
) -> HierarchyReport {
    let mut report = HierarchyReport::default();
    let n = h.leaf_count();
    if g.node_count() != n {
        report.violations.push(format!(
            "graph has {} nodes, hierarchy {n} leaves",
            g.node_count()
        ));
        return report;
    }
    report.eta_sum = (n..h.node_count()).map(|v| h.bucket_count(v)).sum();
    if report.eta_sum >= 6 * n.max(1) {
        report
            .violations
            .push(format!("bucket total {} is not below 6n", report.eta_sum));
    }
    for v in n..h.node_count() {
        for &c in h.children(v) {
            if h.is_vertex(c) && h.level(v) < 2 * h.level(c) {
                report
                    .violations
                    .push(format!("level of {v} is below twice that of child {c}"));
            }
        }
    }
    let mut full: Vec<Option<Vec<Option<Cost>>>> = vec![None; n];
    for v in n..h.node_count() {
        let (lo, hi) = h.range(v);
        let members = &h.leaf_order()[lo..hi];
        let stride = match sources_per_vertex {
            Some(k) if k > 0 && members.len() > k => members.len().div_ceil(k),
            _ => 1,
        };
        let a = h.level(v);
        let inside = |x: usize| h.contains(v, x);
        for &i in members.iter().step_by(stride) {
            let b_all = full[i]
                .get_or_insert_with(|| restricted_search(g, i, |_| true, true))
                .clone();
            let b_in = restricted_search(g, i, inside, true);
            let d_in = restricted_search(g, i, inside, false);
            let child_of_i = h
                .children(v)
                .iter()
                .position(|&c| h.range(c).0 <= h.position(i) && h.position(i) < h.range(c).1);
            for &j in members {
                if j == i {
                    continue;
                }
                let Some(bj) = b_in[j] else {
                    report.violations.push(format!(
                        "desc({v}) not strongly connected: {i} cannot reach {j}"
                    ));
                    continue;
                };
                let same_child =
                    h.children(v).iter().position(|&c| {
                        h.range(c).0 <= h.position(j) && h.position(j) < h.range(c).1
                    }) == child_of_i;
                if same_child {
                    continue;
                }
                report.pairs_checked += 1;
                let b = b_all[j].unwrap_or(Cost::MAX);
                if b < a || b > 3 * a {
                    report.violations.push(format!(
                        "pair ({i}, {j}) under {v}: bottleneck {b} outside [{a}, {}]",
                        3 * a
                    ));
                }
                if bj != b {
                    report.violations.push(format!(
                        "pair ({i}, {j}) under {v}: no bottleneck path inside desc"
                    ));
                }
                if d_in[j].map_or(true, |d| d > h.bound(v)) {
                    report.violations.push(format!(
                        "pair ({i}, {j}) under {v}: no path of length <= U inside desc"
                    ));
                }
            }
        }
    }
    report
}
