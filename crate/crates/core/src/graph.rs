use crate::error::{Error, Result};

pub type Cost = i128;

/// Largest accepted input arc cost.
pub const MAX_INPUT_COST: Cost = 1 << 40;
/// Largest accepted input node count.
pub const MAX_NODES: usize = 1 << 20;
/// Ceiling for derived costs such as the augmentation cost M.
pub const MAX_DERIVED_COST: Cost = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub cost: Cost,
}

impl Arc {
    pub fn new(tail: usize, head: usize, cost: Cost) -> Self {
        Arc { tail, head, cost }
    }
}

/// Simple, loopless directed graph with nonnegative costs, stored by tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    arcs: Vec<Arc>,
    offsets: Vec<usize>,
}

impl Graph {
    /// Builds a graph; parallel arcs collapse to the cheapest one.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = Arc>) -> Result<Graph> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        for a in &arcs {
            for x in [a.tail, a.head] {
                if x >= n {
                    return Err(Error::NodeOutOfRange { node: x, n });
                }
            }
            if a.tail == a.head {
                return Err(Error::SelfLoop(a.tail));
            }
            if a.cost < 0 {
                return Err(Error::NegativeCost {
                    tail: a.tail,
                    head: a.head,
                    cost: a.cost,
                });
            }
        }
        arcs.sort_by_key(|a| (a.tail, a.head, a.cost));
        arcs.dedup_by(|next, kept| next.tail == kept.tail && next.head == kept.head);
        let mut offsets = vec![0; n + 1];
        for a in &arcs {
            offsets[a.tail + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Graph { n, arcs, offsets })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, e: usize) -> Arc {
        self.arcs[e]
    }

    pub fn costs(&self) -> Vec<Cost> {
        self.arcs.iter().map(|a| a.cost).collect()
    }

    /// Arc ids leaving `u`.
    pub fn out_range(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn out_arcs(&self, u: usize) -> &[Arc] {
        &self.arcs[self.out_range(u)]
    }

    pub fn find_arc(&self, tail: usize, head: usize) -> Option<usize> {
        let range = self.out_range(tail);
        let slice = &self.arcs[range.clone()];
        slice
            .binary_search_by_key(&head, |a| a.head)
            .ok()
            .map(|i| range.start + i)
    }

    /// Same topology with new per-arc costs.
    pub fn with_costs(&self, costs: &[Cost]) -> Result<Graph> {
        assert_eq!(costs.len(), self.arcs.len());
        let arcs = self
            .arcs
            .iter()
            .zip(costs)
            .map(|(a, &c)| Arc::new(a.tail, a.head, c));
        Graph::new(self.n, arcs)
    }

    pub fn max_cost(&self) -> Cost {
        self.arcs.iter().map(|a| a.cost).max().unwrap_or(0)
    }

    pub fn is_strongly_connected(&self) -> bool {
        scc_labels(self.n, self.arcs.iter().map(|a| (a.tail, a.head))).count == 1
    }
}

/// Component labels in topological order of the condensation: for every arc
/// (u, v), `label[u] <= label[v]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub label: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.count];
        for (v, &c) in self.label.iter().enumerate() {
            sets[c].push(v);
        }
        sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &c in &self.label {
            sizes[c] += 1;
        }
        sizes
    }
}

pub(crate) fn csr(
    n: usize,
    pairs: impl IntoIterator<Item = (usize, usize)>,
) -> (Vec<usize>, Vec<usize>) {
    let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
    let mut offsets = vec![0; n + 1];
    for &(u, _) in &pairs {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0; pairs.len()];
    for &(u, v) in &pairs {
        targets[fill[u]] = v;
        fill[u] += 1;
    }
    (offsets, targets)
}

/// Iterative Tarjan over an adjacency list given as (tail, head) pairs.
pub fn scc_labels(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Components {
    let (offsets, targets) = csr(n, pairs);
    tarjan(n, &offsets, &targets)
}

pub(crate) fn tarjan(n: usize, offsets: &[usize], targets: &[usize]) -> Components {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut label = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut found = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, offsets[root]));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < offsets[v + 1] {
                let w = targets[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        label[w] = found;
                        if w == v {
                            break;
                        }
                    }
                    found += 1;
                }
            }
        }
    }
    // Tarjan emits components in reverse topological order.
    for l in label.iter_mut() {
        *l = found - 1 - *l;
    }
    Components {
        label,
        count: found,
    }
}

/// Strongly connected components in topological order.
pub fn scc(g: &Graph) -> Vec<Vec<usize>> {
    scc_labels(g.n, g.arcs.iter().map(|a| (a.tail, a.head))).sets()
}

/// A partition of nodes into classes numbered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    class: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn singletons(n: usize) -> Partition {
        Partition {
            class: (0..n).collect(),
            count: n,
        }
    }

    /// Renumbers arbitrary labels so that class ids follow smallest members.
    pub fn from_labels(labels: &[usize]) -> Partition {
        let mut map = std::collections::HashMap::new();
        let mut class = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = map.len();
            class.push(*map.entry(l).or_insert(next));
        }
        Partition {
            count: map.len(),
            class,
        }
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.class[v]
    }

    pub fn classes(&self) -> &[usize] {
        &self.class
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.count];
        for (v, &c) in self.class.iter().enumerate() {
            sets[c].push(v);
        }
        sets
    }
}

/// Contracts each class to one node, dropping internal arcs and keeping the
/// cheapest arc between each ordered pair of classes.
pub fn contract(g: &Graph, p: &Partition) -> Graph {
    assert_eq!(p.len(), g.n, "partition size mismatch");
    let arcs = g
        .arcs
        .iter()
        .filter(|a| p.class[a.tail] != p.class[a.head])
        .map(|a| Arc::new(p.class[a.tail], p.class[a.head], a.cost));
    Graph::new(p.count.max(1), arcs).expect("contraction of a valid graph is valid")
}

/// Integer numerators over a common positive denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    pub values: Vec<Cost>,
    pub scale: Cost,
}

impl Potential {
    pub fn zero(n: usize, scale: Cost) -> Potential {
        Potential {
            values: vec![0; n],
            scale,
        }
    }

    /// `scale * cost + pi(tail) - pi(head)`.
    pub fn reduce(&self, a: &Arc) -> Result<Cost> {
        self.scale
            .checked_mul(a.cost)
            .and_then(|x| x.checked_add(self.values[a.tail]))
            .and_then(|x| x.checked_sub(self.values[a.head]))
            .ok_or(Error::Overflow("reduced cost"))
    }

    pub fn reduced_costs(&self, g: &Graph) -> Result<Vec<Cost>> {
        g.arcs().iter().map(|a| self.reduce(a)).collect()
    }

    /// The graph with costs replaced by reduced costs.
    pub fn apply(&self, g: &Graph) -> Result<Graph> {
        g.with_costs(&self.reduced_costs(g)?)
    }
}

pub fn reduced_cost(g: &Graph, pi: &Potential, e: usize) -> Result<Cost> {
    pi.reduce(&g.arcs[e])
}

/// Largest power of two not exceeding `r`.
pub fn floor_pow2(r: Cost) -> Result<Cost> {
    if r <= 0 {
        return Err(Error::NonPositive(r));
    }
    Ok(1 << (127 - r.leading_zeros()))
}

/// Smallest power of two that is at least `n` (and at least 1).
pub fn round_up_pow2(n: usize) -> Cost {
    (n.max(1) as u128).next_power_of_two() as Cost
}

#[derive(Clone, Debug)]
pub struct Augmented {
    pub graph: Graph,
    /// Added arcs cost M; any distance of at least M means unreachable.
    pub big_m: Cost,
    pub added: Vec<Arc>,
}

/// Adds arcs of cost M = (sum of costs) + 1 so the graph becomes strongly
/// connected.
pub fn make_strongly_connected(g: &Graph) -> Result<Augmented> {
    let mut total: Cost = 0;
    for a in &g.arcs {
        total = total
            .checked_add(a.cost)
            .ok_or(Error::Overflow("augmentation cost"))?;
    }
    let big_m = total + 1;
    if big_m > MAX_DERIVED_COST {
        return Err(Error::CostCeiling(big_m));
    }
    let comps = scc_labels(g.n, g.arcs.iter().map(|a| (a.tail, a.head)));
    if comps.count == 1 {
        return Ok(Augmented {
            graph: g.clone(),
            big_m,
            added: Vec::new(),
        });
    }
    let k = comps.count;
    let mut has_in = vec![false; k];
    let mut has_out = vec![false; k];
    let mut cond_adj = vec![Vec::new(); k];
    for a in &g.arcs {
        let (cu, cv) = (comps.label[a.tail], comps.label[a.head]);
        if cu != cv {
            has_out[cu] = true;
            has_in[cv] = true;
            cond_adj[cu].push(cv);
        }
    }
    let mut rep = vec![usize::MAX; k];
    for v in (0..g.n).rev() {
        rep[comps.label[v]] = v;
    }
    // s0 in the first source component, t0 in a sink component reachable from it.
    let source0 = (0..k).find(|&c| !has_in[c]).unwrap();
    let mut seen = vec![false; k];
    let mut todo = vec![source0];
    seen[source0] = true;
    while let Some(c) = todo.pop() {
        for &d in &cond_adj[c] {
            if !seen[d] {
                seen[d] = true;
                todo.push(d);
            }
        }
    }
    let sink0 = (0..k).find(|&c| seen[c] && !has_out[c]).unwrap();
    let (s0, t0) = (rep[source0], rep[sink0]);
    let mut added = Vec::new();
    for c in 0..k {
        if !has_in[c] && rep[c] != t0 {
            added.push(Arc::new(t0, rep[c], big_m));
        }
        if !has_out[c] && rep[c] != s0 {
            added.push(Arc::new(rep[c], s0, big_m));
        }
    }
    added.sort_by_key(|a| (a.tail, a.head));
    added.dedup();
    added.retain(|a| g.find_arc(a.tail, a.head).is_none());
    let graph = Graph::new(g.n, g.arcs.iter().copied().chain(added.iter().copied()))?;
    debug_assert!(graph.is_strongly_connected());
    Ok(Augmented {
        graph,
        big_m,
        added,
    })
}

#[derive(Clone, Debug)]
pub struct Positivized {
    /// Contracted graph with costs `n * c^pi`, all at least 1.
    pub graph: Graph,
    /// Zero-cost strongly connected classes of the input.
    pub classes: Partition,
    /// Potential on contracted nodes, numerators over `scale`.
    pub potential: Potential,
}

/// Contracts zero-cost cycles and shifts potentials so every cost becomes
/// positive; output costs are `n * (c + pi(u) - pi(v))` with n a power of two.
pub fn positivize(g: &Graph) -> Result<Positivized> {
    let zero = scc_labels(
        g.n,
        g.arcs
            .iter()
            .filter(|a| a.cost == 0)
            .map(|a| (a.tail, a.head)),
    );
    let classes = Partition::from_labels(&zero.label);
    let contracted = contract(g, &classes);
    let k = contracted.node_count();
    let n = round_up_pow2(g.n);
    let order = scc_labels(
        k,
        contracted
            .arcs
            .iter()
            .filter(|a| a.cost == 0)
            .map(|a| (a.tail, a.head)),
    );
    debug_assert_eq!(order.count, k);
    let values: Vec<Cost> = (0..k).map(|v| -(order.label[v] as Cost + 1)).collect();
    let potential = Potential { values, scale: n };
    let graph = potential.apply(&contracted)?;
    debug_assert!(graph.arcs.iter().all(|a| a.cost >= 1));
    Ok(Positivized {
        graph,
        classes,
        potential,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionEvent {
    pub iteration: usize,
    pub threshold: Cost,
    pub members: Vec<usize>,
    /// Potential of each member relative to the new node, same order.
    pub member_potentials: Vec<Cost>,
    pub node: usize,
}

/// Forest of contraction events over base nodes `0..base` and super nodes
/// numbered from `base` upward in creation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTrace {
    base: usize,
    events: Vec<ContractionEvent>,
    parent: Vec<Option<usize>>,
}

impl ContractionTrace {
    pub fn new(base: usize) -> ContractionTrace {
        ContractionTrace {
            base,
            events: Vec::new(),
            parent: vec![None; base],
        }
    }

    pub fn base_count(&self) -> usize {
        self.base
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn events(&self) -> &[ContractionEvent] {
        &self.events
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn event_of(&self, node: usize) -> Option<&ContractionEvent> {
        node.checked_sub(self.base).map(|i| &self.events[i])
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&x| self.parent[x].is_none())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.roots().len() == 1
    }

    /// Merges `members` (current roots) into a fresh node and returns its id.
    pub fn record(
        &mut self,
        iteration: usize,
        threshold: Cost,
        members: Vec<usize>,
        member_potentials: Vec<Cost>,
    ) -> Result<usize> {
        if members.len() < 2 || members.len() != member_potentials.len() {
            return Err(Error::InvalidContraction(
                "need at least two members".into(),
            ));
        }
        if let Some(last) = self.events.last() {
            if threshold < last.threshold || iteration < last.iteration {
                return Err(Error::InvalidContraction(
                    "thresholds must not decrease".into(),
                ));
            }
        }
        let node = self.parent.len();
        for &m in &members {
            if m >= node || self.parent[m].is_some() {
                return Err(Error::InvalidContraction(format!(
                    "node {m} is not a live root"
                )));
            }
        }
        for &m in &members {
            self.parent[m] = Some(node);
        }
        self.parent.push(None);
        self.events.push(ContractionEvent {
            iteration,
            threshold,
            members,
            member_potentials,
            node,
        });
        Ok(node)
    }

    /// Potential of every base node: the sum of member potentials along its
    /// chain of ancestors plus `root_value` of its root.
    pub fn compose(&self, root_value: impl Fn(usize) -> Cost) -> Vec<Cost> {
        let mut value = vec![0; self.parent.len()];
        for x in 0..self.parent.len() {
            if self.parent[x].is_none() {
                value[x] = root_value(x);
            }
        }
        for ev in self.events.iter().rev() {
            for (&m, &p) in ev.members.iter().zip(&ev.member_potentials) {
                value[m] = p + value[ev.node];
            }
        }
        value.truncate(self.base);
        value
    }
}

/// Overall potential of a complete trace, with the root at potential zero.
pub fn uncontract(trace: &ContractionTrace, scale: Cost) -> Result<Potential> {
    let roots = trace.roots().len();
    if roots != 1 {
        return Err(Error::IncompleteTrace(roots));
    }
    Ok(Potential {
        values: trace.compose(|_| 0),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, arcs: &[(usize, usize, Cost)]) -> Graph {
        Graph::new(n, arcs.iter().map(|&(u, v, c)| Arc::new(u, v, c))).unwrap()
    }

    #[test]
    fn scc_orders_topologically() {
        let t = g(4, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 3, 1)]);
        assert_eq!(scc(&t), vec![vec![0, 1, 2], vec![3]]);
        let p = g(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(scc(&p), vec![vec![0], vec![1], vec![2]]);
        let two = g(2, &[(0, 1, 1), (1, 0, 1)]);
        assert_eq!(scc(&two), vec![vec![0, 1]]);
    }

    #[test]
    fn parallel_arcs_keep_minimum() {
        let x = g(2, &[(0, 1, 7), (0, 1, 4)]);
        assert_eq!(x.arcs(), &[Arc::new(0, 1, 4)]);
    }

    #[test]
    fn contract_triangle() {
        let t = g(3, &[(0, 1, 4), (1, 2, 1), (2, 0, 2)]);
        let p = Partition::from_labels(&[0, 1, 1]);
        let c = contract(&t, &p);
        assert_eq!(c.arcs(), &[Arc::new(0, 1, 4), Arc::new(1, 0, 2)]);
        assert_eq!(contract(&t, &Partition::singletons(3)), t);
    }

    #[test]
    fn reduced_costs_of_four_cycle() {
        let c = g(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 8)]);
        let pi = Potential {
            values: vec![-2, -4, -6, -8],
            scale: 1,
        };
        assert_eq!(pi.reduced_costs(&c).unwrap(), vec![3, 3, 3, 2]);
    }

    #[test]
    fn floor_pow2_values() {
        assert_eq!(floor_pow2(5).unwrap(), 4);
        assert_eq!(floor_pow2(8).unwrap(), 8);
        assert_eq!(floor_pow2(1).unwrap(), 1);
        assert!(floor_pow2(0).is_err());
    }

    #[test]
    fn augmentation_of_single_arc() {
        let x = g(2, &[(0, 1, 5)]);
        let aug = make_strongly_connected(&x).unwrap();
        assert_eq!(aug.big_m, 6);
        assert_eq!(aug.added, vec![Arc::new(1, 0, 6)]);
        assert!(aug.graph.is_strongly_connected());
        let one = Graph::new(1, []).unwrap();
        assert!(make_strongly_connected(&one).unwrap().added.is_empty());
    }

    #[test]
    fn positivize_contracts_zero_cycle() {
        let x = g(2, &[(0, 1, 0), (1, 0, 0)]);
        let p = positivize(&x).unwrap();
        assert_eq!(p.graph.node_count(), 1);
        assert_eq!(p.classes.count(), 1);
    }

    #[test]
    fn uncontract_examples() {
        let mut t = ContractionTrace::new(2);
        t.record(1, 1, vec![0, 1], vec![0, -3]).unwrap();
        assert_eq!(uncontract(&t, 1).unwrap().values, vec![0, -3]);

        let mut t = ContractionTrace::new(3);
        let a = t.record(1, 1, vec![0, 1], vec![0, -2]).unwrap();
        t.record(2, 2, vec![a, 2], vec![-5, 0]).unwrap();
        assert_eq!(uncontract(&t, 1).unwrap().values, vec![-5, -7, 0]);

        assert_eq!(
            uncontract(&ContractionTrace::new(1), 1).unwrap().values,
            vec![0]
        );
        assert!(uncontract(&ContractionTrace::new(2), 1).is_err());
    }
}
