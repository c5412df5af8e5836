use crate::graph::Cost;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("graph has no nodes")]
    Empty,
    #[error("node {node} out of range (node count {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("negative cost {cost} on arc {tail}->{head}")]
    NegativeCost {
        tail: usize,
        head: usize,
        cost: Cost,
    },
    #[error("cost {0} exceeds the configured ceiling")]
    CostCeiling(Cost),
    #[error("node count {0} exceeds the configured ceiling")]
    NodeCeiling(usize),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("expected a positive value, got {0}")]
    NonPositive(Cost),
    #[error("contraction trace is incomplete ({0} roots)")]
    IncompleteTrace(usize),
    #[error("invalid contraction: {0}")]
    InvalidContraction(String),
    #[error("arc {arc} has cost {cost} below the lower threshold {lower}")]
    BelowThreshold { arc: usize, cost: Cost, lower: Cost },
    #[error("input is not {factor}-min-balanced (arc {arc})")]
    NotRoughlyBalanced { factor: Cost, arc: usize },
    #[error("component hierarchy requires rho = 0, got {0}")]
    UnsupportedRho(u32),
    #[error("active arc set contains a cycle")]
    CyclicActiveArcs,
    #[error("hierarchy does not match graph: {0}")]
    HierarchyMismatch(String),
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
