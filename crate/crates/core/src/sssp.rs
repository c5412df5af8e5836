//! Bucketed label-setting shortest paths over a component hierarchy.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Cost, Graph};
use crate::hierarchy::ComponentHierarchy;

/// Label of unreached nodes.
pub const INF: Cost = Cost::MAX / 4;

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SfmCounters {
    pub splits: usize,
    pub findmins: usize,
    pub decreasekeys: usize,
}

/// Sequence of keyed elements partitioned into consecutive subsequences,
/// with range minima over a segment tree and subsequence starts in an
/// ordered set. Each subsequence carries an owner tag.
#[derive(Clone, Debug)]
pub struct SplitFindMin {
    len: usize,
    size: usize,
    tree: Vec<Cost>,
    starts: BTreeSet<usize>,
    owner: Vec<usize>,
    pub counters: SfmCounters,
}

impl SplitFindMin {
    /// One subsequence holding `len` elements, all keys infinite.
    pub fn new(len: usize) -> Self {
        let size = len.next_power_of_two().max(1);
        let mut starts = BTreeSet::new();
        if len > 0 {
            starts.insert(0);
        }
        SplitFindMin {
            len,
            size,
            tree: vec![INF; 2 * size],
            starts,
            owner: vec![0; len],
            counters: SfmCounters::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn key(&self, e: usize) -> Cost {
        self.tree[self.size + e]
    }

    /// Bounds of the subsequence containing `e`, half open.
    pub fn segment(&self, e: usize) -> (usize, usize) {
        let lo = *self
            .starts
            .range(..=e)
            .next_back()
            .expect("position 0 always starts a segment");
        let hi = self
            .starts
            .range(e + 1..)
            .next()
            .copied()
            .unwrap_or(self.len);
        (lo, hi)
    }

    /// Makes `e` the first element of a new subsequence.
    pub fn split(&mut self, e: usize) {
        self.counters.splits += 1;
        if e > 0 && e < self.len {
            let owner = self.owner(e);
            if self.starts.insert(e) {
                self.owner[e] = owner;
            }
        }
    }

    pub fn findmin(&mut self, e: usize) -> Cost {
        self.counters.findmins += 1;
        let (lo, hi) = self.segment(e);
        let (mut l, mut r) = (lo + self.size, hi + self.size);
        let mut best = INF;
        while l < r {
            if l & 1 == 1 {
                best = best.min(self.tree[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                best = best.min(self.tree[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        best
    }

    pub fn decreasekey(&mut self, e: usize, w: Cost) {
        self.counters.decreasekeys += 1;
        let mut x = self.size + e;
        if w >= self.tree[x] {
            return;
        }
        self.tree[x] = w;
        while x > 1 {
            x >>= 1;
            let m = self.tree[2 * x].min(self.tree[2 * x + 1]);
            if self.tree[x] == m {
                break;
            }
            self.tree[x] = m;
        }
    }

    pub fn owner(&self, e: usize) -> usize {
        self.owner[self.segment(e).0]
    }

    pub fn set_owner(&mut self, e: usize, owner: usize) {
        let lo = self.segment(e).0;
        self.owner[lo] = owner;
    }
}

const NONE: usize = usize::MAX;

/// Intrusive FIFO lists per bucket, nodes and vertices kept apart so that
/// nodes are selected first.
struct Buckets {
    slot: Vec<usize>,
    prev: Vec<usize>,
    next: Vec<usize>,
    head: Vec<[usize; 2]>,
    tail: Vec<[usize; 2]>,
}

impl Buckets {
    fn new(items: usize, buckets: usize) -> Self {
        Buckets {
            slot: vec![NONE; items],
            prev: vec![NONE; items],
            next: vec![NONE; items],
            head: vec![[NONE; 2]; buckets],
            tail: vec![[NONE; 2]; buckets],
        }
    }

    fn remove(&mut self, x: usize, kind: usize) {
        let b = self.slot[x];
        if b == NONE {
            return;
        }
        let (p, n) = (self.prev[x], self.next[x]);
        if p == NONE {
            self.head[b][kind] = n;
        } else {
            self.next[p] = n;
        }
        if n == NONE {
            self.tail[b][kind] = p;
        } else {
            self.prev[n] = p;
        }
        self.slot[x] = NONE;
        self.prev[x] = NONE;
        self.next[x] = NONE;
    }

    fn push(&mut self, x: usize, kind: usize, b: usize) {
        let t = self.tail[b][kind];
        self.prev[x] = t;
        self.next[x] = NONE;
        if t == NONE {
            self.head[b][kind] = x;
        } else {
            self.next[t] = x;
        }
        self.tail[b][kind] = x;
        self.slot[x] = b;
    }

    fn first(&self, b: usize, kind: usize) -> Option<usize> {
        let x = self.head[b][kind];
        (x != NONE).then_some(x)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SsspStats {
    pub main_calls: usize,
    pub node_selections: usize,
    pub descents: usize,
    pub advances: usize,
    pub activations: usize,
    pub relaxations: usize,
    pub label_decreases: usize,
    /// Finite tentative labels outside the parent's bucket range.
    pub out_of_range: usize,
    /// Vertices pushed past the last bucket of their parent.
    pub lost_vertices: usize,
    pub sfm: SfmCounters,
    pub audited_steps: usize,
    pub sandwich_violations: usize,
    pub selection_violations: usize,
    pub upper_violations: usize,
}

impl SsspStats {
    pub fn audit_violations(&self) -> usize {
        self.sandwich_violations
            + self.selection_violations
            + self.upper_violations
            + self.lost_vertices
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub source: usize,
    /// Distances under the graph's costs; `INF` never occurs on success.
    pub dist: Vec<Cost>,
    pub pred: Vec<Option<usize>>,
    pub stats: SsspStats,
}

/// Instrumentation for a query. `bottleneck[i][j]` enables the selection
/// check at every insertion into S.
#[derive(Clone, Copy, Debug, Default)]
pub struct Audit<'a> {
    pub bottleneck: Option<&'a [Vec<Option<Cost>>]>,
}

/// Query engine over an immutable graph and hierarchy; each query owns its
/// state, so one engine can serve many sources.
pub struct Engine<'a> {
    g: &'a Graph,
    h: &'a ComponentHierarchy,
}

struct State<'e, 'a> {
    e: &'e Engine<'a>,
    d: Vec<Cost>,
    pred: Vec<Option<usize>>,
    dv: Vec<Cost>,
    active: Vec<bool>,
    done: Vec<bool>,
    lambda: Vec<Cost>,
    cur: Vec<usize>,
    upper: Vec<Cost>,
    buckets: Buckets,
    sfm: SplitFindMin,
    cv: usize,
    stats: SsspStats,
}

impl<'a> Engine<'a> {
    pub fn new(g: &'a Graph, h: &'a ComponentHierarchy) -> Result<Self> {
        if g.node_count() != h.leaf_count() {
            return Err(Error::HierarchyMismatch(format!(
                "graph has {} nodes, hierarchy {} leaves",
                g.node_count(),
                h.leaf_count()
            )));
        }
        if g.node_count() == 0 {
            return Err(Error::Empty);
        }
        if let Some(a) = g.arcs().iter().find(|a| a.cost <= 0) {
            return Err(Error::NonPositive(a.cost));
        }
        Ok(Engine { g, h })
    }

    pub fn run(&self, s: usize) -> Result<ShortestPaths> {
        self.run_audited(s, None)
    }

    pub fn run_audited(&self, s: usize, audit: Option<Audit<'_>>) -> Result<ShortestPaths> {
        let (g, h) = (self.g, self.h);
        let n = g.node_count();
        if s >= n {
            return Err(Error::NodeOutOfRange { node: s, n });
        }
        if n == 1 {
            return Ok(ShortestPaths {
                source: s,
                dist: vec![0],
                pred: vec![None],
                stats: SsspStats::default(),
            });
        }
        let total = h.node_count();
        let mut st = State {
            e: self,
            d: vec![INF; n],
            pred: vec![None; n],
            dv: vec![INF; total],
            active: vec![false; total],
            done: vec![false; total],
            lambda: vec![0; total],
            cur: vec![0; total],
            upper: vec![0; total],
            buckets: Buckets::new(total, h.total_buckets()),
            sfm: SplitFindMin::new(n),
            cv: h.root(),
            stats: SsspStats::default(),
        };
        let r = h.root();
        st.d[s] = 0;
        st.sfm.decreasekey(h.position(s), 0);
        st.sfm.set_owner(0, r);
        st.dv[r] = 0;
        st.activate(r);
        st.cv = r;
        let cap = 4 * (n + h.total_buckets()) + 16;
        while st.dv[r] < st.upper[r] {
            if st.stats.main_calls > cap {
                return Err(Error::HierarchyMismatch(
                    "main loop exceeded its step bound".into(),
                ));
            }
            st.main(audit.as_ref());
            if audit.is_some() {
                st.check_sandwich();
            }
        }
        if let Some(j) = (0..n).find(|&j| !st.done[j]) {
            return Err(Error::HierarchyMismatch(format!(
                "node {j} never became permanent"
            )));
        }
        if audit.is_some() {
            for i in 0..n {
                let mut v = h.parent(i);
                while let Some(x) = v {
                    if st.d[i] >= st.upper[x] {
                        st.stats.upper_violations += 1;
                    }
                    v = h.parent(x);
                }
            }
        }
        st.stats.sfm = st.sfm.counters;
        Ok(ShortestPaths {
            source: s,
            dist: st.d,
            pred: st.pred,
            stats: st.stats,
        })
    }
}

impl State<'_, '_> {
    fn value(&self, x: usize) -> Cost {
        if self.e.h.is_vertex(x) {
            self.dv[x]
        } else {
            self.d[x]
        }
    }

    fn move_to_bucket(&mut self, x: usize) {
        let h = self.e.h;
        let v = h.parent(x).expect("non-root item");
        let key = self.value(x);
        let kind = h.is_vertex(x) as usize;
        if key < self.lambda[v] || key >= self.upper[v] {
            if key < INF {
                self.stats.out_of_range += 1;
            }
            return;
        }
        let k = ((key - self.lambda[v]) >> h.level(v).trailing_zeros()) as usize;
        let b = h.bucket_offset(v) + k;
        if self.buckets.slot[x] != b {
            self.buckets.remove(x, kind);
            self.buckets.push(x, kind, b);
        }
    }

    fn activate(&mut self, v: usize) {
        let h = self.e.h;
        self.stats.activations += 1;
        let a = h.level(v);
        let lambda = self.dv[v] / a * a;
        self.lambda[v] = lambda;
        self.cur[v] = 0;
        self.upper[v] = lambda + h.bucket_count(v) as Cost * a;
        self.dv[v] = lambda;
        self.active[v] = true;
        let children = h.children(v);
        for (k, &c) in children.iter().enumerate() {
            let start = h.range(c).0;
            if k > 0 {
                self.sfm.split(start);
            }
            self.sfm.set_owner(start, c);
        }
        for &w in children.iter().filter(|&&c| h.is_vertex(c)) {
            self.dv[w] = self.sfm.findmin(h.range(w).0);
            self.move_to_bucket(w);
        }
        for &j in children.iter().filter(|&&c| !h.is_vertex(c)) {
            self.move_to_bucket(j);
        }
    }

    fn update(&mut self, i: usize) {
        let (g, h) = (self.e.g, self.e.h);
        for e in g.out_range(i) {
            let arc = g.arc(e);
            let j = arc.head;
            self.stats.relaxations += 1;
            let nd = self.d[i] + arc.cost;
            if self.done[j] || nd >= self.d[j] {
                continue;
            }
            self.stats.label_decreases += 1;
            self.d[j] = nd;
            self.pred[j] = Some(i);
            let pos = h.position(j);
            self.sfm.decreasekey(pos, nd);
            let p = h.parent(j).expect("leaf below root");
            if self.active[p] {
                self.move_to_bucket(j);
            } else {
                let w = self.sfm.owner(pos);
                if nd < self.dv[w] {
                    self.dv[w] = nd;
                    self.move_to_bucket(w);
                }
            }
        }
    }

    fn main(&mut self, audit: Option<&Audit<'_>>) {
        let h = self.e.h;
        self.stats.main_calls += 1;
        let v = self.cv;
        let b = h.bucket_offset(v) + self.cur[v];
        if let Some(i) = self.buckets.first(b, 0) {
            self.stats.node_selections += 1;
            self.buckets.remove(i, 0);
            if let Some(Audit {
                bottleneck: Some(bn),
            }) = audit
            {
                self.check_selection(i, bn);
            }
            self.done[i] = true;
            self.update(i);
        } else if let Some(w) = self.buckets.first(b, 1) {
            self.stats.descents += 1;
            self.cv = w;
            if !self.active[w] {
                self.activate(w);
            }
        } else {
            self.stats.advances += 1;
            let a = h.level(v);
            self.dv[v] += a;
            let r = h.root();
            if self.dv[v] == self.upper[v] && v != r {
                self.done[v] = true;
                self.buckets.remove(v, 1);
                self.cv = h.parent(v).unwrap();
            }
            if self.dv[v] < self.upper[v] {
                self.cur[v] += 1;
                if v != r {
                    let p = h.parent(v).unwrap();
                    if self.dv[v] >= self.dv[p] + h.level(p) {
                        self.buckets.remove(v, 1);
                        let k = self.cur[p] + 1;
                        if k < h.bucket_count(p) {
                            self.buckets.push(v, 1, h.bucket_offset(p) + k);
                        } else {
                            self.stats.lost_vertices += 1;
                        }
                        self.cv = p;
                    }
                }
            }
        }
    }

    fn check_selection(&mut self, j: usize, bn: &[Vec<Option<Cost>>]) {
        for i in 0..self.d.len() {
            if i == j || self.done[i] || self.d[i] >= INF {
                continue;
            }
            if let Some(b) = bn[i][j] {
                if self.d[j] > self.d[i] + b {
                    self.stats.selection_violations += 1;
                }
            }
        }
    }

    fn check_sandwich(&mut self) {
        let h = self.e.h;
        self.stats.audited_steps += 1;
        for w in 0..h.node_count() {
            let live = if h.is_vertex(w) {
                self.active[w]
            } else {
                self.d[w] < INF
            };
            if self.done[w] || !live {
                continue;
            }
            let dw = self.value(w);
            let mut v = h.parent(w);
            while let Some(x) = v {
                if self.active[x] && !self.done[x] {
                    let dx = self.dv[x];
                    let bad = if h.is_vertex(w) {
                        dw < dx || dw > dx + h.level(x)
                    } else {
                        dw < dx
                    };
                    if bad {
                        self.stats.sandwich_violations += 1;
                    }
                }
                v = h.parent(x);
            }
        }
    }
}

/// Single-source query on a reduced graph with its hierarchy.
pub fn shortest_paths(g: &Graph, h: &ComponentHierarchy, s: usize) -> Result<ShortestPaths> {
    Engine::new(g, h)?.run(s)
}

/// Runs one query per source and hands each result to `sink`.
pub fn apsp_with(
    g: &Graph,
    h: &ComponentHierarchy,
    mut sink: impl FnMut(ShortestPaths) -> Result<()>,
) -> Result<()> {
    let engine = Engine::new(g, h)?;
    for s in 0..g.node_count() {
        sink(engine.run(s)?)?;
    }
    Ok(())
}
