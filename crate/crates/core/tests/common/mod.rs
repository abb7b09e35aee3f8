#![allow(dead_code)]

use emergence_core::{CitationGraph, Corpus, DocType, Publication, Year};
use proptest::prelude::*;

pub const YEAR_MIN: Year = 2003;
pub const YEAR_MAX: Year = 2012;

pub fn publication(id: usize, year: Year, refs: &[usize]) -> Publication {
    Publication {
        id: format!("p{id}"),
        year,
        doc_type: DocType::Article,
        title_terms: vec![],
        references: refs.iter().map(|r| format!("p{r}")).collect(),
    }
}

/// A random citation network as plain data: node years and directed
/// (citing, cited) pairs, no self-loops, no duplicates.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub years: Vec<Year>,
    pub edges: Vec<(usize, usize)>,
}

impl RawGraph {
    pub fn corpus(&self) -> Corpus {
        let mut refs = vec![Vec::new(); self.years.len()];
        for &(a, b) in &self.edges {
            refs[a].push(b);
        }
        Corpus::from_publications(
            self.years.iter().enumerate().map(|(i, &y)| publication(i, y, &refs[i])),
            YEAR_MIN,
            YEAR_MAX,
        )
        .unwrap()
    }

    pub fn graph(&self) -> CitationGraph {
        CitationGraph::build(&self.corpus())
    }
}

pub fn raw_graph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = RawGraph> {
    (1..=max_nodes).prop_flat_map(move |n| {
        let years = prop::collection::vec(YEAR_MIN..=YEAR_MAX, n);
        let edges = prop::collection::btree_set((0..n, 0..n), 0..=max_edges)
            .prop_map(|s| s.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>());
        (years, edges).prop_map(|(years, edges)| RawGraph { years, edges })
    })
}

/// Number of distinct unordered node pairs joined by at least one edge
/// whose endpoints share a label.
pub fn intra_pairs(edges: &[(usize, usize)], labels: &[u32]) -> usize {
    let mut pairs: Vec<(usize, usize)> = edges
        .iter()
        .filter(|&&(a, b)| labels[a] == labels[b])
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.len()
}

/// Constant Potts quality recomputed from scratch.
pub fn cpm_oracle(edges: &[(usize, usize)], labels: &[u32], resolution: f64) -> f64 {
    let mut sizes = std::collections::HashMap::new();
    for &l in labels {
        *sizes.entry(l).or_insert(0u64) += 1;
    }
    let penalty: f64 = sizes.values().map(|&n| (n * n.saturating_sub(1) / 2) as f64).sum();
    intra_pairs(edges, labels) as f64 - resolution * penalty
}
