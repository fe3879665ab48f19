//! Candidate generation for the recommendation phase.
//!
//! Each call proposes at most one candidate for a node: friend-of-friend
//! (uniform over the distance-2 frontier), latent (softmax over embedding
//! affinity among all non-neighbors) or Adamic-Adar (best-scoring
//! distance-2 node).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::dynamics::inner;
use crate::error::{Error, Result};
use crate::graph::{EdgeFilter, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommenderKind {
    Fof,
    Latent,
    AdamicAdar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecommenderSpec {
    pub kind: RecommenderKind,
    /// Softmax inverse temperature, used by `Latent` only.
    pub beta: f64,
}

fn default_beta() -> f64 {
    10.0
}

impl Default for RecommenderSpec {
    fn default() -> Self {
        RecommenderSpec {
            kind: RecommenderKind::Latent,
            beta: default_beta(),
        }
    }
}

/// Reusable buffers so per-node recommendation does not allocate.
#[derive(Debug, Default, Clone)]
pub struct RecScratch {
    words: Vec<u64>,
    cand: Vec<(NodeId, f64)>,
    score: Vec<f64>,
}

impl RecommenderSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::config(
                "recommender.beta",
                format!("must be finite and >= 0, got {}", self.beta),
            ));
        }
        Ok(())
    }

    pub fn recommend<R: Rng + ?Sized>(
        &self,
        g: &Graph,
        i: NodeId,
        rng: &mut R,
        scratch: &mut RecScratch,
    ) -> Result<Option<NodeId>> {
        match self.kind {
            RecommenderKind::Fof => recommend_fof_with(g, i, rng, scratch),
            RecommenderKind::Latent => recommend_latent_with(g, i, self.beta, rng, scratch),
            RecommenderKind::AdamicAdar => recommend_adamic_adar_with(g, i, rng, scratch),
        }
    }
}

/// Uniform draw from the distance-2 frontier of `i`.
pub fn recommend_fof<R: Rng + ?Sized>(g: &Graph, i: NodeId, rng: &mut R) -> Result<Option<NodeId>> {
    recommend_fof_with(g, i, rng, &mut RecScratch::default())
}

fn recommend_fof_with<R: Rng + ?Sized>(
    g: &Graph,
    i: NodeId,
    rng: &mut R,
    scratch: &mut RecScratch,
) -> Result<Option<NodeId>> {
    g.distance2_bits(i, EdgeFilter::All, &mut scratch.words)?;
    let n = bits::count_ones(&scratch.words);
    if n == 0 {
        return Ok(None);
    }
    let k = rng.random_range(0..n);
    Ok(bits::nth_one(&scratch.words, k).map(|x| NodeId(x as u32)))
}

/// Alive nodes other than `i` and its neighbors, written into `out`.
fn latent_pool(g: &Graph, i: NodeId, out: &mut Vec<u64>) {
    out.clear();
    out.extend(
        g.alive_bits()
            .iter()
            .zip(g.adjacency_bits(i))
            .map(|(a, n)| a & !n),
    );
    bits::clear_bit(out, i.index());
}

// Fills `scratch.cand` with (candidate, weight) where weights are
// exp(beta * (score - max score)); returns their sum.
fn latent_weights(g: &Graph, i: NodeId, beta: f64, scratch: &mut RecScratch) -> f64 {
    latent_pool(g, i, &mut scratch.words);
    let vi = &g.node(i).embedding;
    scratch.cand.clear();
    let mut max = f64::NEG_INFINITY;
    for j in bits::ones(&scratch.words) {
        let j = NodeId(j as u32);
        let s = inner(vi, &g.node(j).embedding);
        max = max.max(s);
        scratch.cand.push((j, s));
    }
    let mut total = 0.0;
    for (_, s) in scratch.cand.iter_mut() {
        *s = (beta * (*s - max)).exp();
        total += *s;
    }
    total
}

/// Softmax draw over all alive non-neighbors of `i` with probability
/// proportional to `exp(beta · ⟨v_i, v_j⟩)`.
pub fn recommend_latent<R: Rng + ?Sized>(
    g: &Graph,
    i: NodeId,
    beta: f64,
    rng: &mut R,
) -> Result<Option<NodeId>> {
    recommend_latent_with(g, i, beta, rng, &mut RecScratch::default())
}

fn recommend_latent_with<R: Rng + ?Sized>(
    g: &Graph,
    i: NodeId,
    beta: f64,
    rng: &mut R,
    scratch: &mut RecScratch,
) -> Result<Option<NodeId>> {
    if !g.is_alive(i) {
        return Err(Error::DeadNode(i));
    }
    let total = latent_weights(g, i, beta, scratch);
    if scratch.cand.is_empty() {
        return Ok(None);
    }
    let mut u = rng.random::<f64>() * total;
    for &(j, w) in &scratch.cand {
        if u < w {
            return Ok(Some(j));
        }
        u -= w;
    }
    Ok(scratch.cand.last().map(|&(j, _)| j))
}

/// Full latent recommendation distribution for `i`, ascending by node id.
pub fn latent_distribution(g: &Graph, i: NodeId, beta: f64) -> Result<Vec<(NodeId, f64)>> {
    if !g.is_alive(i) {
        return Err(Error::DeadNode(i));
    }
    let mut scratch = RecScratch::default();
    let total = latent_weights(g, i, beta, &mut scratch);
    Ok(scratch.cand.iter().map(|&(j, w)| (j, w / total)).collect())
}

/// Sum of `1 / ln(deg z)` over common neighbors `z` of `i` and `j`.
pub fn adamic_adar_score(g: &Graph, i: NodeId, j: NodeId) -> Result<f64> {
    for u in [i, j] {
        if !g.is_alive(u) {
            return Err(Error::DeadNode(u));
        }
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    let common = g
        .adjacency_bits(i)
        .iter()
        .zip(g.adjacency_bits(j))
        .map(|(a, b)| a & b)
        .collect::<Vec<_>>();
    Ok(bits::ones(&common)
        .map(|z| g.degree(NodeId(z as u32)))
        .filter(|&d| d > 1)
        .map(|d| 1.0 / (d as f64).ln())
        .sum())
}

/// Highest Adamic-Adar candidate in the distance-2 frontier of `i`, ties
/// broken uniformly.
pub fn recommend_adamic_adar<R: Rng + ?Sized>(
    g: &Graph,
    i: NodeId,
    rng: &mut R,
) -> Result<Option<NodeId>> {
    recommend_adamic_adar_with(g, i, rng, &mut RecScratch::default())
}

fn recommend_adamic_adar_with<R: Rng + ?Sized>(
    g: &Graph,
    i: NodeId,
    rng: &mut R,
    scratch: &mut RecScratch,
) -> Result<Option<NodeId>> {
    g.distance2_bits(i, EdgeFilter::All, &mut scratch.words)?;
    if bits::count_ones(&scratch.words) == 0 {
        return Ok(None);
    }
    scratch.score.clear();
    scratch.score.resize(g.nodes().len(), 0.0);
    for l in g.neighbors(i) {
        let d = g.degree(l.to);
        if d < 2 {
            continue;
        }
        let w = 1.0 / (d as f64).ln();
        for l2 in g.neighbors(l.to) {
            scratch.score[l2.to.index()] += w;
        }
    }
    let best = bits::ones(&scratch.words)
        .map(|z| scratch.score[z])
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    scratch.cand.clear();
    scratch.cand.extend(
        bits::ones(&scratch.words)
            .filter(|&z| scratch.score[z] >= best - tol)
            .map(|z| (NodeId(z as u32), scratch.score[z])),
    );
    let k = rng.random_range(0..scratch.cand.len());
    Ok(Some(scratch.cand[k].0))
}
