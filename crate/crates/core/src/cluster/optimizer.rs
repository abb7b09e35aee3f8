//! Local moving, refinement and aggregation for the constant Potts model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{quality, ClusterParams, Partition};
use crate::citegraph::CitationGraph;

/// Gains below this are treated as zero so rounding cannot cause cycling.
const GAIN_EPSILON: f64 = 1e-10;

/// Weighted undirected graph whose nodes may stand for groups of
/// publications. `size` is the number of publications behind each node.
struct WorkGraph {
    size: Vec<f64>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl WorkGraph {
    fn from_citations(graph: &CitationGraph) -> Self {
        let adj = graph
            .undirected_adjacency()
            .into_iter()
            .map(|ns| ns.into_iter().map(|u| (u, 1.0)).collect())
            .collect();
        WorkGraph {
            size: vec![1.0; graph.node_count()],
            adj,
        }
    }

    fn len(&self) -> usize {
        self.size.len()
    }

    /// Collapses each group of `basis` into one node.
    fn aggregate(&self, basis: &[usize]) -> (WorkGraph, Vec<usize>) {
        let (dense, k) = densify(basis);
        let mut size = vec![0.0; k];
        for (v, &g) in dense.iter().enumerate() {
            size[g] += self.size[v];
        }
        let mut triples: Vec<(u32, u32, f64)> = Vec::new();
        for (v, ns) in self.adj.iter().enumerate() {
            let gv = dense[v] as u32;
            for &(u, w) in ns {
                let gu = dense[u as usize] as u32;
                if gu != gv {
                    triples.push((gv, gu, w));
                }
            }
        }
        triples.sort_unstable_by_key(|t| (t.0, t.1));
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); k];
        for (a, b, w) in triples {
            let row = &mut adj[a as usize];
            match row.last_mut() {
                Some(last) if last.0 == b => last.1 += w,
                _ => row.push((b, w)),
            }
        }
        (WorkGraph { size, adj }, dense)
    }
}

/// Renumbers labels `0..k` in order of first appearance.
fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.iter().max().map_or(0, |&m| m + 1)];
    let mut next = 0;
    let dense = labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (dense, next)
}

/// Scratch space for accumulating edge weight from one node to clusters.
struct NeighborWeights {
    weight: Vec<f64>,
    touched: Vec<usize>,
}

impl NeighborWeights {
    fn new(n: usize) -> Self {
        NeighborWeights {
            weight: vec![0.0; n],
            touched: Vec::new(),
        }
    }

    fn add(&mut self, cluster: usize, w: f64) {
        if self.weight[cluster] == 0.0 {
            self.touched.push(cluster);
        }
        self.weight[cluster] += w;
    }

    fn clear(&mut self) {
        for &c in &self.touched {
            self.weight[c] = 0.0;
        }
        self.touched.clear();
    }
}

/// Moves single nodes between clusters until a full sweep finds no move
/// gaining more than `threshold`. Returns whether anything moved.
fn move_nodes(
    g: &WorkGraph,
    membership: &mut [usize],
    resolution: f64,
    threshold: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = g.len();
    let mut cluster_size = vec![0.0; n];
    let mut cluster_nodes = vec![0usize; n];
    for (v, &c) in membership.iter().enumerate() {
        cluster_size[c] += g.size[v];
        cluster_nodes[c] += 1;
    }
    let mut empty: Vec<usize> = (0..n).filter(|&c| cluster_nodes[c] == 0).rev().collect();
    let mut scratch = NeighborWeights::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;

    loop {
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let current = membership[v];
            let v_size = g.size[v];
            for &(u, w) in &g.adj[v] {
                scratch.add(membership[u as usize], w);
            }
            let w_current = scratch.weight[current];
            let remaining = cluster_size[current] - v_size;

            let mut best = current;
            let mut best_gain = 0.0;
            for &c in &scratch.touched {
                if c == current {
                    continue;
                }
                let gain =
                    scratch.weight[c] - w_current - resolution * v_size * (cluster_size[c] - remaining);
                if gain > best_gain {
                    best = c;
                    best_gain = gain;
                }
            }
            if cluster_nodes[current] > 1 {
                let gain = -w_current + resolution * v_size * remaining;
                if gain > best_gain {
                    best = *empty.last().expect("a cluster slot is free while one holds two nodes");
                    best_gain = gain;
                }
            }
            scratch.clear();

            if best != current && best_gain > threshold {
                if cluster_nodes[best] == 0 {
                    empty.pop();
                }
                cluster_size[current] -= v_size;
                cluster_nodes[current] -= 1;
                if cluster_nodes[current] == 0 {
                    empty.push(current);
                }
                cluster_size[best] += v_size;
                cluster_nodes[best] += 1;
                membership[v] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    moved_any
}

/// Splits every cluster into well-joined subclusters: starting from
/// singletons, each still-alone node joins the neighboring subcluster of
/// the same cluster with the largest positive gain.
fn refine(g: &WorkGraph, membership: &[usize], resolution: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.len();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut sub_size = g.size.clone();
    let mut sub_nodes = vec![1usize; n];
    let mut scratch = NeighborWeights::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for v in order {
        let own = refined[v];
        if sub_nodes[own] != 1 {
            continue;
        }
        let cluster = membership[v];
        for &(u, w) in &g.adj[v] {
            if membership[u as usize] == cluster {
                scratch.add(refined[u as usize], w);
            }
        }
        let v_size = g.size[v];
        let mut best = own;
        let mut best_gain = GAIN_EPSILON;
        for &s in &scratch.touched {
            if s == own {
                continue;
            }
            let gain = scratch.weight[s] - resolution * v_size * sub_size[s];
            if gain > best_gain {
                best = s;
                best_gain = gain;
            }
        }
        scratch.clear();
        if best != own {
            sub_nodes[own] = 0;
            sub_size[own] = 0.0;
            sub_nodes[best] += 1;
            sub_size[best] += v_size;
            refined[v] = best;
        }
    }
    refined
}

/// One full round: local moving on successively aggregated graphs starting
/// from `membership` over the publication nodes.
fn optimize_round(
    base: &WorkGraph,
    membership: Vec<usize>,
    resolution: f64,
    threshold: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut level: Option<WorkGraph> = None;
    let mut membership = membership;
    let mut node_of: Vec<usize> = (0..base.len()).collect();
    loop {
        let g = level.as_ref().unwrap_or(base);
        move_nodes(g, &mut membership, resolution, threshold, rng);
        let (dense, clusters) = densify(&membership);
        membership = dense;
        if clusters == g.len() {
            break;
        }
        let refined = refine(g, &membership, resolution, rng);
        let (_, refined_count) = densify(&refined);
        let basis = if refined_count < g.len() { refined } else { membership.clone() };
        let (next, group_of) = g.aggregate(&basis);
        let mut next_membership = vec![0; next.len()];
        for (v, &grp) in group_of.iter().enumerate() {
            next_membership[grp] = membership[v];
        }
        for n in &mut node_of {
            *n = group_of[*n];
        }
        membership = next_membership;
        level = Some(next);
    }
    node_of.iter().map(|&a| membership[a]).collect()
}

/// Rounds within one restart stop after this many even if still improving.
const MAX_ROUNDS: usize = 20;

/// One restart: rounds from singletons, each continuing from the previous
/// result, until a round gains nothing.
fn restart(
    graph: &CitationGraph,
    base: &WorkGraph,
    params: &ClusterParams,
    threshold: f64,
    index: usize,
) -> (Vec<usize>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let mut best: Vec<usize> = (0..base.len()).collect();
    let mut best_quality = 0.0;
    for _ in 0..MAX_ROUNDS {
        let candidate = optimize_round(base, best.clone(), params.resolution, threshold, &mut rng);
        let q = quality(graph, &Partition::from_assignment(candidate.iter().copied()), params.resolution);
        let improved = q - best_quality > threshold;
        if q >= best_quality {
            best = candidate;
            best_quality = q;
        }
        if !improved {
            break;
        }
    }
    (best, best_quality)
}

/// Best of `max_iterations` independent restarts; ties go to the lowest
/// restart index. The trace holds the singleton quality followed by the
/// best quality after each restart.
pub(super) fn optimize(graph: &CitationGraph, params: &ClusterParams) -> (Partition, Vec<f64>) {
    let base = WorkGraph::from_citations(graph);
    let threshold = params.min_improvement.max(GAIN_EPSILON);

    let mut best: Vec<usize> = (0..base.len()).collect();
    let mut best_quality = 0.0;
    let mut trace = vec![best_quality];
    for index in 0..params.max_iterations {
        let (candidate, q) = restart(graph, &base, params, threshold, index);
        if q > best_quality + GAIN_EPSILON {
            best = candidate;
            best_quality = q;
        }
        trace.push(best_quality);
    }
    (Partition::from_assignment(best), trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::test_graphs::*;

    #[test]
    fn densify_orders_by_first_appearance() {
        assert_eq!(densify(&[5, 2, 5, 0]), (vec![0, 1, 0, 2], 3));
    }

    #[test]
    fn aggregation_sums_sizes_and_weights() {
        let g = WorkGraph::from_citations(&two_triangles());
        let (agg, group_of) = g.aggregate(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(group_of, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(agg.size, vec![3.0, 3.0]);
        assert!(agg.adj.iter().all(|ns| ns.is_empty()));

        let g = WorkGraph::from_citations(&two_cliques_bridged());
        let (agg, _) = g.aggregate(&[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(agg.adj, vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
    }

    #[test]
    fn local_moving_never_lowers_quality() {
        let cg = two_cliques_bridged();
        let g = WorkGraph::from_citations(&cg);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut membership: Vec<usize> = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let before = quality(&cg, &Partition::from_assignment(membership.clone()), 0.2);
        move_nodes(&g, &mut membership, 0.2, GAIN_EPSILON, &mut rng);
        let after = quality(&cg, &Partition::from_assignment(membership), 0.2);
        assert!(after >= before);
    }
}
