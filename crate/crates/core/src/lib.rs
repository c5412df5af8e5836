//! Shortest paths on directed graphs with nonnegative integer costs via
//! min-balanced reduced costs and a component hierarchy.

pub mod balance;
pub mod error;
pub mod generate;
pub mod goldberg;
pub mod graph;
pub mod hierarchy;
pub mod io;
pub mod min_balance;
pub mod oracles;
pub mod pipeline;
pub mod sssp;
pub mod ufi;

pub use error::{Error, Result};
pub use graph::{Arc, Cost, Graph, Partition, Potential};
