//! Union-find with subset-wide additive increases.
//!
//! Each element i carries a value sigma(i), stored as the sum of offsets `tau`
//! along its path to the root.

use crate::graph::Cost;

#[derive(Clone, Debug)]
pub struct UnionFindIncrease {
    parent: Vec<usize>,
    tau: Vec<Cost>,
    size: Vec<usize>,
    path: Vec<usize>,
    links_followed: u64,
}

impl UnionFindIncrease {
    pub fn new(n: usize) -> Self {
        UnionFindIncrease {
            parent: (0..n).collect(),
            tau: vec![0; n],
            size: vec![1; n],
            path: Vec::new(),
            links_followed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Total parent links traversed so far.
    pub fn links_followed(&self) -> u64 {
        self.links_followed
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut path = std::mem::take(&mut self.path);
        path.clear();
        let mut v = i;
        while self.parent[v] != v {
            path.push(v);
            v = self.parent[v];
        }
        self.links_followed += path.len() as u64;
        // Suffix sums give sigma(j) - sigma(root) for each j on the path.
        let mut below_root = 0;
        for &j in path.iter().rev() {
            below_root += self.tau[j];
            self.tau[j] = below_root;
            self.parent[j] = v;
        }
        self.path = path;
        v
    }

    pub fn union(&mut self, i: usize, j: usize) {
        let (a, b) = (self.find(i), self.find(j));
        if a == b {
            return;
        }
        let (child, root) = match self.size[a].cmp(&self.size[b]) {
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
            std::cmp::Ordering::Equal => (a.max(b), a.min(b)),
        };
        self.parent[child] = root;
        self.tau[child] -= self.tau[root];
        self.size[root] += self.size[child];
        self.size[child] = 0;
    }

    pub fn increase(&mut self, i: usize, delta: Cost) {
        let r = self.find(i);
        self.tau[r] += delta;
    }

    pub fn value(&mut self, i: usize) -> Cost {
        let r = self.find(i);
        if r == i {
            self.tau[i]
        } else {
            self.tau[i] + self.tau[r]
        }
    }

    pub fn set_size(&mut self, i: usize) -> usize {
        let r = self.find(i);
        self.size[r]
    }
}
