mod common;

use common::{raw_graph, RawGraph};
use emergence_core::{ImpactScope, Partition, Year};
use proptest::prelude::*;

fn graph_and_labels() -> impl Strategy<Value = (RawGraph, Vec<u32>)> {
    raw_graph(50, 300).prop_flat_map(|g| {
        let n = g.years.len();
        (Just(g), prop::collection::vec(0u32..4, n))
    })
}

fn windowed_oracle(g: &RawGraph, labels: &[u32], cluster: u32, start: Year, end: Year, scope: ImpactScope) -> u64 {
    let inside = |y: Year| (start..=end).contains(&y);
    g.edges
        .iter()
        .filter(|&&(a, b)| {
            labels[b] == cluster
                && inside(g.years[b])
                && inside(g.years[a])
                && (scope == ImpactScope::Corpus || labels[a] == cluster)
        })
        .count() as u64
}

proptest! {
    #[test]
    fn edge_count_matches_input((g, _) in graph_and_labels()) {
        prop_assert_eq!(g.graph().edge_count(), g.edges.len());
    }

    #[test]
    fn within_cluster_matches_edge_scan((g, labels) in graph_and_labels()) {
        let graph = g.graph();
        let partition = Partition::from_assignment(labels.iter().copied());
        let compact = partition.assignment().to_vec();
        let all = graph.within_cluster_citations_all(&partition).unwrap();
        for c in 0..partition.cluster_count() as u32 {
            let expected = g.edges.iter().filter(|&&(a, b)| compact[a] == c && compact[b] == c).count() as u64;
            prop_assert_eq!(graph.within_cluster_citations(&partition, c).unwrap(), expected);
            prop_assert_eq!(all[c as usize], expected);
        }
    }

    #[test]
    fn windowed_matches_edge_scan((g, labels) in graph_and_labels(), start in 2003..=2012i32, dt in 0u32..5) {
        prop_assume!(start + dt as Year <= 2012);
        let graph = g.graph();
        let partition = Partition::from_assignment(labels.iter().copied());
        let compact = partition.assignment().to_vec();
        for scope in [ImpactScope::Corpus, ImpactScope::Cluster] {
            let profiles = graph.citation_profiles(&partition, scope).unwrap();
            for c in 0..partition.cluster_count() as u32 {
                let expected = windowed_oracle(&g, &compact, c, start, start + dt as Year, scope);
                prop_assert_eq!(graph.windowed_citations(&partition, c, start, dt, scope).unwrap(), expected);
                prop_assert_eq!(profiles[c as usize].windowed(start, start + dt as Year), expected);
            }
        }
    }

    #[test]
    fn windowed_grows_with_dt((g, labels) in graph_and_labels(), start in 2003..=2008i32) {
        let graph = g.graph();
        let partition = Partition::from_assignment(labels.iter().copied());
        for c in 0..partition.cluster_count() as u32 {
            let mut last = 0;
            for dt in 0..=(2012 - start) as u32 {
                let v = graph.windowed_citations(&partition, c, start, dt, ImpactScope::Corpus).unwrap();
                prop_assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn cluster_scope_never_exceeds_corpus_scope((g, labels) in graph_and_labels(), start in 2003..=2010i32) {
        let graph = g.graph();
        let partition = Partition::from_assignment(labels.iter().copied());
        for c in 0..partition.cluster_count() as u32 {
            let narrow = graph.windowed_citations(&partition, c, start, 2, ImpactScope::Cluster).unwrap();
            let wide = graph.windowed_citations(&partition, c, start, 2, ImpactScope::Corpus).unwrap();
            prop_assert!(narrow <= wide);
        }
    }
}
