//! Direct-citation graph over corpus-internal publications.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::cluster::{ClusterId, Partition};
use crate::corpus::{Corpus, Year};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown cluster {0}")]
    UnknownCluster(ClusterId),
    #[error("window [{start}, {end}] outside corpus years [{year_min}, {year_max}]")]
    WindowOutOfRange {
        start: Year,
        end: Year,
        year_min: Year,
        year_max: Year,
    },
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
}

/// Which citing publications count toward a topic's windowed impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImpactScope {
    /// Citations from any corpus publication.
    #[default]
    Corpus,
    /// Only citations from publications in the same cluster.
    Cluster,
}

impl std::str::FromStr for ImpactScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corpus" => Ok(ImpactScope::Corpus),
            "cluster" => Ok(ImpactScope::Cluster),
            _ => Err(format!("unknown impact scope {s:?} (expected corpus or cluster)")),
        }
    }
}

/// Deduplicated citing→cited edges between corpus publications, indexed in
/// both directions. Node `i` is the `i`-th publication of the source corpus.
#[derive(Debug, Clone)]
pub struct CitationGraph {
    ids: Vec<String>,
    years: Vec<Year>,
    year_min: Year,
    year_max: Year,
    outgoing: Vec<Vec<u32>>,
    incoming: Vec<Vec<u32>>,
    edge_count: usize,
}

impl CitationGraph {
    /// One edge per distinct (citing, cited) pair where the cited id is in
    /// the corpus. Dangling references and self-citations are skipped.
    pub fn build(corpus: &Corpus) -> Self {
        let n = corpus.len();
        let mut outgoing: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (a, p) in corpus.publications().iter().enumerate() {
            let mut targets: Vec<u32> = p
                .references
                .iter()
                .filter_map(|r| corpus.position(r))
                .filter(|&b| b != a)
                .map(|b| b as u32)
                .collect();
            targets.sort_unstable();
            targets.dedup();
            for &b in &targets {
                incoming[b as usize].push(a as u32);
            }
            edge_count += targets.len();
            outgoing[a] = targets;
        }
        CitationGraph {
            ids: corpus.publications().iter().map(|p| p.id.clone()).collect(),
            years: corpus.publications().iter().map(|p| p.year).collect(),
            year_min: corpus.year_min(),
            year_max: corpus.year_max(),
            outgoing,
            incoming,
            edge_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn year(&self, node: usize) -> Year {
        self.years[node]
    }

    pub fn year_min(&self) -> Year {
        self.year_min
    }

    pub fn year_max(&self) -> Year {
        self.year_max
    }

    /// Nodes cited by `node`, ascending.
    pub fn cited_by(&self, node: usize) -> &[u32] {
        &self.outgoing[node]
    }

    /// Nodes citing `node`, ascending.
    pub fn citing(&self, node: usize) -> &[u32] {
        &self.incoming[node]
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.incoming[node].len()
    }

    /// All edges as (citing, cited), ordered by citing node then cited node.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.outgoing
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b as usize)))
    }

    /// Undirected adjacency with one entry per distinct unordered pair.
    pub fn undirected_adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj: Vec<Vec<u32>> = self
            .outgoing
            .iter()
            .zip(&self.incoming)
            .map(|(o, i)| {
                let mut v = Vec::with_capacity(o.len() + i.len());
                v.extend_from_slice(o);
                v.extend_from_slice(i);
                v
            })
            .collect();
        for v in &mut adj {
            v.sort_unstable();
            v.dedup();
        }
        adj
    }

    /// Writes `citing_id<TAB>cited_id` lines.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b) in self.edges() {
            writeln!(out, "{}\t{}", self.ids[a], self.ids[b])?;
        }
        Ok(())
    }

    fn check_partition(&self, partition: &Partition) -> Result<(), GraphError> {
        if partition.len() != self.node_count() {
            return Err(GraphError::PartitionMismatch {
                partition: partition.len(),
                graph: self.node_count(),
            });
        }
        Ok(())
    }

    fn check_cluster(&self, partition: &Partition, cluster: ClusterId) -> Result<(), GraphError> {
        self.check_partition(partition)?;
        if cluster as usize >= partition.cluster_count() {
            return Err(GraphError::UnknownCluster(cluster));
        }
        Ok(())
    }

    fn check_window(&self, start: Year, end: Year) -> Result<(), GraphError> {
        if start < self.year_min || end > self.year_max || start > end {
            return Err(GraphError::WindowOutOfRange {
                start,
                end,
                year_min: self.year_min,
                year_max: self.year_max,
            });
        }
        Ok(())
    }

    /// Edges with both endpoints in `cluster`, all years included.
    pub fn within_cluster_citations(
        &self,
        partition: &Partition,
        cluster: ClusterId,
    ) -> Result<u64, GraphError> {
        self.check_cluster(partition, cluster)?;
        let count = self
            .edges()
            .filter(|&(a, b)| partition.cluster_of(a) == cluster && partition.cluster_of(b) == cluster)
            .count();
        Ok(count as u64)
    }

    /// Within-cluster citation counts for every cluster in one pass.
    pub fn within_cluster_citations_all(&self, partition: &Partition) -> Result<Vec<u64>, GraphError> {
        self.check_partition(partition)?;
        let mut counts = vec![0u64; partition.cluster_count()];
        for (a, b) in self.edges() {
            let c = partition.cluster_of(a);
            if c == partition.cluster_of(b) {
                counts[c as usize] += 1;
            }
        }
        Ok(counts)
    }

    /// Citations received by members of `cluster` published in
    /// `[start, start + dt]` from publications in the same window. Both
    /// bounds are inclusive.
    pub fn windowed_citations(
        &self,
        partition: &Partition,
        cluster: ClusterId,
        start: Year,
        dt: u32,
        scope: ImpactScope,
    ) -> Result<u64, GraphError> {
        self.check_cluster(partition, cluster)?;
        let end = start + dt as Year;
        self.check_window(start, end)?;
        let in_window = |y: Year| y >= start && y <= end;
        let mut count = 0u64;
        for b in 0..self.node_count() {
            if partition.cluster_of(b) != cluster || !in_window(self.years[b]) {
                continue;
            }
            for &a in &self.incoming[b] {
                let a = a as usize;
                if !in_window(self.years[a]) {
                    continue;
                }
                if scope == ImpactScope::Cluster && partition.cluster_of(a) != cluster {
                    continue;
                }
                count += 1;
            }
        }
        Ok(count)
    }

    /// Per-cluster cited-year × citing-year citation matrices, from which
    /// any windowed count is answered without touching the graph again.
    pub fn citation_profiles(
        &self,
        partition: &Partition,
        scope: ImpactScope,
    ) -> Result<Vec<CitationProfile>, GraphError> {
        self.check_partition(partition)?;
        let span = (self.year_max - self.year_min + 1) as usize;
        let mut cells: HashMap<(ClusterId, usize, usize), u64> = HashMap::new();
        for (a, b) in self.edges() {
            let cb = partition.cluster_of(b);
            if scope == ImpactScope::Cluster && partition.cluster_of(a) != cb {
                continue;
            }
            let cited_year = (self.years[b] - self.year_min) as usize;
            let citing_year = (self.years[a] - self.year_min) as usize;
            *cells.entry((cb, cited_year, citing_year)).or_insert(0) += 1;
        }
        let mut profiles: Vec<CitationProfile> = (0..partition.cluster_count())
            .map(|_| CitationProfile {
                year_min: self.year_min,
                span,
                counts: vec![0; span * span],
            })
            .collect();
        for ((c, cited, citing), n) in cells {
            profiles[c as usize].counts[cited * span + citing] = n;
        }
        Ok(profiles)
    }
}

/// Citations received by one cluster, bucketed by (cited year, citing year).
#[derive(Debug, Clone, PartialEq)]
pub struct CitationProfile {
    year_min: Year,
    span: usize,
    counts: Vec<u64>,
}

impl CitationProfile {
    /// Citations where both the cited and the citing publication fall in
    /// `[start, end]`. Years outside the profile's range contribute nothing.
    pub fn windowed(&self, start: Year, end: Year) -> u64 {
        let lo = (start - self.year_min).max(0) as usize;
        let hi = (end - self.year_min).min(self.span as Year - 1);
        if hi < 0 || lo > hi as usize {
            return 0;
        }
        let hi = hi as usize;
        let mut total = 0;
        for cited in lo..=hi {
            let row = &self.counts[cited * self.span..(cited + 1) * self.span];
            total += row[lo..=hi].iter().sum::<u64>();
        }
        total
    }
}
