//! Emerging research topic detection on direct-citation graphs.
//!
//! The pipeline runs bottom-up through these modules:
//!
//! - [`corpus`]: publication records, document-type filtering, validation.
//! - [`citegraph`]: the deduplicated citing→cited graph and citation counts.
//! - [`cluster`]: constant Potts partitioning into topics.
//! - [`metrics`]: yearly counts, smoothing, growth, impact and coherence.
//! - [`detector`]: the joint growth/novelty/impact/coherence test.
//! - [`synth`]: synthetic corpora with planted topics, and recovery scoring.

pub mod citegraph;
pub mod cluster;
pub mod corpus;
pub mod detector;
pub mod metrics;
pub mod synth;

pub use citegraph::{CitationGraph, ImpactScope};
pub use cluster::{ClusterId, ClusterParams, Partition};
pub use corpus::{Corpus, DocType, Publication, Year};
