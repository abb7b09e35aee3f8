//! Topic labels: most frequent title terms and most cited members.

use std::collections::HashMap;
use std::io::Write;

use emergence_core::{CitationGraph, ClusterId, Corpus, Partition};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicLabel {
    pub cluster: ClusterId,
    /// (term, occurrences), most frequent first.
    pub terms: Vec<(String, usize)>,
    /// (publication id, corpus-internal citations), most cited first.
    pub top_publications: Vec<(String, usize)>,
}

impl TopicLabel {
    /// Short label built from the leading terms.
    pub fn short(&self, terms: usize) -> String {
        self.terms
            .iter()
            .take(terms)
            .map(|(t, _)| t.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Labels every cluster with its `k_terms` most frequent title terms (ties
/// broken alphabetically) and its `k_pubs` most cited members (ties broken
/// by earlier year, then id). The partition and graph are positional over
/// `corpus`.
pub fn label_topics(
    corpus: &Corpus,
    partition: &Partition,
    graph: &CitationGraph,
    k_terms: usize,
    k_pubs: usize,
) -> Vec<TopicLabel> {
    let pubs = corpus.publications();
    partition
        .members()
        .into_iter()
        .enumerate()
        .map(|(cluster, members)| {
            let mut freq: HashMap<&str, usize> = HashMap::new();
            for &n in &members {
                for term in &pubs[n].title_terms {
                    *freq.entry(term.as_str()).or_insert(0) += 1;
                }
            }
            let mut terms: Vec<(&str, usize)> = freq.into_iter().collect();
            terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            terms.truncate(k_terms);

            let mut cited: Vec<usize> = members;
            cited.sort_by(|&a, &b| {
                graph
                    .in_degree(b)
                    .cmp(&graph.in_degree(a))
                    .then(pubs[a].year.cmp(&pubs[b].year))
                    .then(pubs[a].id.cmp(&pubs[b].id))
            });
            cited.truncate(k_pubs);

            TopicLabel {
                cluster: cluster as ClusterId,
                terms: terms.into_iter().map(|(t, c)| (t.to_string(), c)).collect(),
                top_publications: cited
                    .into_iter()
                    .map(|n| (pubs[n].id.clone(), graph.in_degree(n)))
                    .collect(),
            }
        })
        .collect()
}

/// `cluster<TAB>terms<TAB>top_publications`, lists comma-separated.
pub fn write_labels<W: Write>(labels: &[TopicLabel], mut out: W) -> std::io::Result<()> {
    writeln!(out, "cluster\tterms\ttop_publications")?;
    for l in labels {
        let terms: Vec<&str> = l.terms.iter().map(|(t, _)| t.as_str()).collect();
        let pubs: Vec<&str> = l.top_publications.iter().map(|(p, _)| p.as_str()).collect();
        writeln!(out, "{}\t{}\t{}", l.cluster, terms.join(","), pubs.join(","))?;
    }
    Ok(())
}
