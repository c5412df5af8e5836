//! Seeded graph families for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Arc, Cost, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fill_random<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    arcs: &mut Vec<Arc>,
    cost: &mut impl FnMut(&mut R) -> Cost,
) {
    let m = m.min(n * (n - 1));
    let mut seen: std::collections::HashSet<(usize, usize)> =
        arcs.iter().map(|a| (a.tail, a.head)).collect();
    while arcs.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert((u, v)) {
            let c = cost(rng);
            arcs.push(Arc::new(u, v, c));
        }
    }
}

/// Random strongly connected graph: a Hamiltonian cycle plus random arcs,
/// costs uniform in `[lo, hi]`.
pub fn strongly_connected<R: Rng>(rng: &mut R, n: usize, m: usize, lo: Cost, hi: Cost) -> Graph {
    let mut arcs = Vec::new();
    if n > 1 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for i in 0..n {
            let c = rng.gen_range(lo..=hi);
            arcs.push(Arc::new(perm[i], perm[(i + 1) % n], c));
        }
        fill_random(rng, n, m.max(n), &mut arcs, &mut |r| r.gen_range(lo..=hi));
    }
    Graph::new(n, arcs).unwrap()
}

/// Random digraph, not necessarily strongly connected.
pub fn arbitrary<R: Rng>(rng: &mut R, n: usize, m: usize, lo: Cost, hi: Cost) -> Graph {
    let mut arcs = Vec::new();
    if n > 1 {
        fill_random(rng, n, m, &mut arcs, &mut |r| r.gen_range(lo..=hi));
    }
    Graph::new(n, arcs).unwrap()
}

/// Strongly connected graph whose costs are spread over many magnitudes:
/// each arc cost is `mantissa * 2^k` with k uniform in `0..=max_exp`.
pub fn multiscale<R: Rng>(rng: &mut R, n: usize, m: usize, max_exp: u32) -> Graph {
    let mut cost = |r: &mut R| -> Cost { r.gen_range(1..=8) << r.gen_range(0..=max_exp) };
    let mut arcs = Vec::new();
    if n > 1 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for i in 0..n {
            let c = cost(rng);
            arcs.push(Arc::new(perm[i], perm[(i + 1) % n], c));
        }
        fill_random(rng, n, m.max(n), &mut arcs, &mut cost);
    }
    Graph::new(n, arcs).unwrap()
}

/// Clusters joined in a ring, with intra-cluster costs around `1` and
/// inter-cluster costs around `2^gap`; exercises threshold jumps.
pub fn clustered<R: Rng>(rng: &mut R, clusters: usize, size: usize, gap: u32) -> Graph {
    let n = clusters * size;
    let mut arcs = Vec::new();
    for c in 0..clusters {
        let base = c * size;
        for i in 0..size {
            if size > 1 {
                arcs.push(Arc::new(
                    base + i,
                    base + (i + 1) % size,
                    rng.gen_range(1..=4),
                ));
                let j = rng.gen_range(0..size);
                if j != i {
                    arcs.push(Arc::new(base + i, base + j, rng.gen_range(1..=4)));
                }
            }
        }
        if clusters > 1 {
            let next = (c + 1) % clusters * size;
            let scale: Cost = 1 << gap;
            arcs.push(Arc::new(
                base,
                next + rng.gen_range(0..size),
                scale * rng.gen_range(1..=4),
            ));
        }
    }
    Graph::new(n, arcs).unwrap()
}

/// Strongly connected graph with out-degree at most `degree`.
pub fn bounded_degree<R: Rng>(rng: &mut R, n: usize, degree: usize, lo: Cost, hi: Cost) -> Graph {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut arcs = Vec::new();
    for i in 0..n {
        let u = perm[i];
        if n > 1 {
            arcs.push(Arc::new(u, perm[(i + 1) % n], rng.gen_range(lo..=hi)));
        }
        for _ in 1..degree {
            let v = rng.gen_range(0..n);
            if v != u {
                arcs.push(Arc::new(u, v, rng.gen_range(lo..=hi)));
            }
        }
    }
    Graph::new(n, arcs).unwrap()
}
