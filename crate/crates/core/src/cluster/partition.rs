use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use thiserror::Error;

/// Dense cluster identifier, numbered from 0.
pub type ClusterId = u32;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("publication {0:?} is not in the graph")]
    UnknownPublication(String),
    #[error("publication {0:?} assigned more than once")]
    DuplicateAssignment(String),
    #[error("publication {0:?} has no cluster assignment")]
    Unassigned(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Assignment of every node to exactly one nonempty cluster.
///
/// Nodes are positional: node `i` is the `i`-th publication of the corpus
/// the graph was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<ClusterId>,
    cluster_count: usize,
}

impl Partition {
    /// Builds a partition from arbitrary labels. Labels are compacted to
    /// `0..k` preserving their relative order, so a labelling that is
    /// already dense is kept as is.
    pub fn from_assignment<L: Ord + Copy>(labels: impl IntoIterator<Item = L>) -> Self {
        let labels: Vec<L> = labels.into_iter().collect();
        let mut distinct: Vec<L> = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment = labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap() as ClusterId)
            .collect();
        Partition {
            assignment,
            cluster_count: distinct.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n as ClusterId).collect(),
            cluster_count: n,
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn cluster_of(&self, node: usize) -> ClusterId {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[ClusterId] {
        &self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for &c in &self.assignment {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Member nodes of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.cluster_count];
        for (node, &c) in self.assignment.iter().enumerate() {
            members[c as usize].push(node);
        }
        members
    }

    /// Renumbers clusters in order of first appearance by node index.
    pub fn canonical(&self) -> Partition {
        let mut map: HashMap<ClusterId, ClusterId> = HashMap::new();
        let assignment = self
            .assignment
            .iter()
            .map(|&c| {
                let next = map.len() as ClusterId;
                *map.entry(c).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            cluster_count: self.cluster_count,
        }
    }

    /// Writes `publication_id<TAB>cluster_id` lines ordered by id.
    pub fn write_tsv<W: Write>(&self, ids: &[String], mut out: W) -> std::io::Result<()> {
        assert_eq!(ids.len(), self.len(), "id list does not match partition");
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        for node in order {
            writeln!(out, "{}\t{}", ids[node], self.assignment[node])?;
        }
        Ok(())
    }

    /// Reads a partition written by [`Partition::write_tsv`] for the given
    /// node ids. Every id must be assigned exactly once.
    pub fn read_tsv<R: BufRead>(input: R, ids: &[String]) -> Result<Partition, PartitionError> {
        let position: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut labels: Vec<Option<u64>> = vec![None; ids.len()];
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (id, cluster) = line.split_once('\t').ok_or_else(|| PartitionError::Parse {
                line: i + 1,
                message: "expected publication_id<TAB>cluster_id".into(),
            })?;
            let cluster: u64 = cluster.trim().parse().map_err(|e| PartitionError::Parse {
                line: i + 1,
                message: format!("bad cluster id: {e}"),
            })?;
            let &node = position
                .get(id)
                .ok_or_else(|| PartitionError::UnknownPublication(id.to_string()))?;
            if labels[node].replace(cluster).is_some() {
                return Err(PartitionError::DuplicateAssignment(id.to_string()));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(node, l)| l.ok_or_else(|| PartitionError::Unassigned(ids[node].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Partition::from_assignment(labels))
    }

    /// Number of clusters of each size.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for s in self.sizes() {
            *hist.entry(s).or_insert(0) += 1;
        }
        hist
    }
}
