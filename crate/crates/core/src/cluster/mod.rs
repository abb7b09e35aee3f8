//! Partitioning the citation graph into research topics.
//!
//! The objective is the constant Potts model on the undirected, unweighted
//! citation relation:
//!
//! ```text
//! Q = (intra-cluster edges) - resolution * sum_c n_c (n_c - 1) / 2
//! ```
//!
//! [`cluster`] maximizes it with randomized local moving, a refinement pass
//! and multi-level aggregation. [`brute_force_partition`] enumerates every
//! set partition of small graphs and serves as a reference.

mod brute;
mod optimizer;
mod partition;

pub use brute::{brute_force_partition, BRUTE_FORCE_MAX_NODES};
pub use partition::{ClusterId, Partition, PartitionError};

use thiserror::Error;

use crate::citegraph::CitationGraph;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid cluster parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("brute-force enumeration supports at most {max} nodes, got {nodes}")]
    TooLarge { nodes: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub resolution: f64,
    pub seed: u64,
    /// Number of independent restarts; the best partition is kept.
    pub max_iterations: usize,
    /// A move or round must gain strictly more than this to count.
    pub min_improvement: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            resolution: 1e-3,
            seed: 42,
            max_iterations: 10,
            min_improvement: 0.0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(ClusterError::InvalidParams {
                field: "resolution",
                reason: format!("must be a positive finite number, got {}", self.resolution),
            });
        }
        if self.max_iterations < 1 {
            return Err(ClusterError::InvalidParams {
                field: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.min_improvement >= 0.0 && self.min_improvement.is_finite()) {
            return Err(ClusterError::InvalidParams {
                field: "min_improvement",
                reason: format!("must be nonnegative, got {}", self.min_improvement),
            });
        }
        Ok(())
    }
}

/// Constant Potts quality of `partition` over the symmetrized graph.
pub fn quality(graph: &CitationGraph, partition: &Partition, resolution: f64) -> f64 {
    assert_eq!(graph.node_count(), partition.len(), "partition does not cover the graph");
    let mut intra = 0u64;
    for (a, b) in graph.edges() {
        if partition.cluster_of(a) != partition.cluster_of(b) {
            continue;
        }
        // a reciprocal pair is one undirected edge: count it from the lower end
        if a > b && graph.cited_by(b).binary_search(&(a as u32)).is_ok() {
            continue;
        }
        intra += 1;
    }
    intra as f64 - resolution * pair_count(&partition.sizes()) as f64
}

fn pair_count(sizes: &[usize]) -> u64 {
    sizes
        .iter()
        .map(|&n| (n as u64) * (n as u64).saturating_sub(1) / 2)
        .sum()
}

/// Result of [`cluster_with_trace`].
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub partition: Partition,
    /// Quality of the singleton partition followed by the best quality
    /// after each restart.
    pub trace: Vec<f64>,
}

/// Clusters the graph, returning a canonical partition.
pub fn cluster(graph: &CitationGraph, params: &ClusterParams) -> Result<Partition, ClusterError> {
    Ok(cluster_with_trace(graph, params)?.partition)
}

pub fn cluster_with_trace(
    graph: &CitationGraph,
    params: &ClusterParams,
) -> Result<ClusterOutcome, ClusterError> {
    params.validate()?;
    let (partition, trace) = optimizer::optimize(graph, params);
    Ok(ClusterOutcome {
        partition: partition.canonical(),
        trace,
    })
}
