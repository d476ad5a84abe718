pub mod assembler;
pub mod audit;
pub mod digraph;
pub mod division;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod graph;
pub mod lcst;
pub mod metrics;
pub mod oracle;
pub mod pieces;
pub mod reductions;
pub mod report;
pub mod separator;
pub mod shortcuts;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, Instance, ProblemKind, INF};
