use super::{ClusterError, Partition};
use crate::citegraph::CitationGraph;

pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Exhaustively finds a quality-maximizing partition by enumerating every
/// set partition as a restricted growth string, in lexicographic order.
/// The first maximum found wins, so ties resolve to the lexicographically
/// smallest canonical assignment.
pub fn brute_force_partition(
    graph: &CitationGraph,
    resolution: f64,
) -> Result<Partition, ClusterError> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(ClusterError::TooLarge {
            nodes: n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    if n == 0 {
        return Ok(Partition::singletons(0));
    }
    let edges: Vec<(usize, usize)> = graph
        .undirected_adjacency()
        .iter()
        .enumerate()
        .flat_map(|(a, ns)| ns.iter().map(move |&b| (a, b as usize)))
        .filter(|&(a, b)| a < b)
        .collect();

    let score = |rgs: &[usize], sizes: &mut [u64]| -> f64 {
        sizes.iter_mut().for_each(|s| *s = 0);
        for &c in rgs {
            sizes[c] += 1;
        }
        let intra = edges.iter().filter(|&&(a, b)| rgs[a] == rgs[b]).count();
        let pairs: u64 = sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
        intra as f64 - resolution * pairs as f64
    };

    let mut sizes = vec![0u64; n];
    let mut best = vec![0usize; n];
    let mut best_score = f64::NEG_INFINITY;
    for_each_set_partition(n, |rgs| {
        let s = score(rgs, &mut sizes);
        if s > best_score + 1e-12 {
            best_score = s;
            best.copy_from_slice(rgs);
        }
    });
    Ok(Partition::from_assignment(best))
}

/// Calls `f` with every restricted growth string of length `n >= 1`, in
/// lexicographic order.
fn for_each_set_partition(n: usize, mut f: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; n];
    // largest label among rgs[..=i]
    let mut prefix_max = vec![0usize; n];
    loop {
        f(&rgs);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if rgs[i] <= prefix_max[i - 1] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}
