#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use linkdyn_core::{Graph, NodeId, Provenance};
use rand::Rng;

/// Random graph on `n` nodes with edge probability `p`, embeddings in
/// [-1, 1]², two groups and random provenances.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::new(2);
    for _ in 0..n {
        let emb = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        g.add_node(rng.random_range(0..2), emb, 0).unwrap();
    }
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random::<f64>() < p {
                let prov = Provenance::ALL[rng.random_range(0..Provenance::ALL.len())];
                g.add_edge(NodeId(u), NodeId(v), prov, 0).unwrap();
            }
        }
    }
    g
}

/// Adjacency sets of alive nodes whose edges pass `keep`.
pub fn adjacency_sets<F: Fn(Provenance) -> bool>(g: &Graph, keep: F) -> Vec<BTreeSet<u32>> {
    let mut adj = vec![BTreeSet::new(); g.nodes().len()];
    for e in g.edges() {
        if keep(e.provenance) {
            adj[e.u.index()].insert(e.v.0);
            adj[e.v.index()].insert(e.u.0);
        }
    }
    adj
}

/// Nodes at BFS distance exactly 2 under `keep`, minus every direct
/// neighbor in the full graph.
pub fn bfs_distance2<F: Fn(Provenance) -> bool>(g: &Graph, u: NodeId, keep: F) -> BTreeSet<u32> {
    let adj = adjacency_sets(g, keep);
    let full = adjacency_sets(g, |_| true);
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([u.0]);
    dist[u.index()] = 0;
    while let Some(x) = queue.pop_front() {
        if dist[x as usize] == 2 {
            continue;
        }
        for &y in &adj[x as usize] {
            if dist[y as usize] == usize::MAX {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    (0..adj.len() as u32)
        .filter(|&y| dist[y as usize] == 2 && !full[u.index()].contains(&y))
        .collect()
}

/// Clustering of `u` by checking every pair of neighbors.
pub fn brute_clustering(g: &Graph, u: NodeId) -> f64 {
    let nb: Vec<NodeId> = g.neighbors(u).iter().map(|l| l.to).collect();
    let d = nb.len();
    if d < 2 {
        return 0.0;
    }
    let mut tri = 0;
    for a in 0..d {
        for b in a + 1..d {
            if g.has_edge(nb[a], nb[b]) {
                tri += 1;
            }
        }
    }
    2.0 * tri as f64 / (d * (d - 1)) as f64
}

/// Gini as the mean absolute difference over twice the mean.
pub fn mad_gini(d: &[f64]) -> f64 {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let mut s = 0.0;
    for a in d {
        for b in d {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n * mean)
}
