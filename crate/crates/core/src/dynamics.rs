//! Natural growth: node arrival, meeting strangers, meeting friends,
//! hazard-driven attrition and the initial network.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeFilter, Graph, NodeId, Provenance};

/// One community: its share of arrivals and its embedding distribution
/// (isotropic normal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunitySpec {
    pub prevalence: f64,
    pub mean: Vec<f64>,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthParams {
    pub n_strangers: usize,
    pub n_friends: usize,
    pub p_friend: f64,
    pub arrivals_per_step: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams {
            n_strangers: 100,
            n_friends: 100,
            p_friend: 0.05,
            arrivals_per_step: 5,
        }
    }
}

/// Age-dependent departure hazard `h(age) = c·d^age + k`, clipped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HazardParams {
    pub enabled: bool,
    pub c: f64,
    pub d: f64,
    pub k: f64,
}

impl Default for HazardParams {
    fn default() -> Self {
        HazardParams {
            enabled: false,
            c: 0.0,
            d: 1.0,
            k: 0.0,
        }
    }
}

impl HazardParams {
    pub fn removal_probability(&self, age: u32) -> f64 {
        (self.c * self.d.powi(age as i32) + self.k).clamp(0.0, 1.0)
    }
}

/// Candidate pool used by meeting friends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediationMode {
    /// Any 2-path counts.
    Full,
    /// Only 2-paths free of algorithmic edges count.
    OrganicOnly,
}

/// Scaled and shifted logistic link `1 / (1 + exp(-a·x + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    #[inline]
    pub fn prob(&self, x: f64) -> f64 {
        1.0 / (1.0 + (-self.a * x + self.b).exp())
    }

    pub fn link(&self, vi: &[f64], vj: &[f64]) -> f64 {
        self.prob(inner(vi, vj))
    }
}

#[inline]
pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn link_probability(vi: &[f64], vj: &[f64], a: f64, b: f64) -> f64 {
    Sigmoid { a, b }.link(vi, vj)
}

/// Mean link probability over `sample` for offset `b`.
fn mean_prob(a: f64, b: f64, sample: &[f64]) -> f64 {
    let s = Sigmoid { a, b };
    sample.iter().map(|&x| s.prob(x)).sum::<f64>() / sample.len() as f64
}

/// Solves for the offset `b` that makes the mean link probability over
/// `sample` equal `target_mean`, with the slope `a` held fixed.
///
/// The mean is strictly decreasing in `b`, so bisection on a bracket wide
/// enough to saturate the logistic at both ends always converges when a
/// root exists.
pub fn calibrate_sigmoid(target_mean: f64, sample: &[f64], a: f64) -> Result<Sigmoid> {
    if sample.is_empty() {
        return Err(Error::Calibration("empty inner-product sample".into()));
    }
    if !(target_mean > 0.0 && target_mean < 1.0) {
        return Err(Error::Calibration(format!(
            "target mean {target_mean} outside (0, 1)"
        )));
    }
    if !a.is_finite() || sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Calibration("non-finite slope or sample".into()));
    }
    let (lo_x, hi_x) = sample
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(a * x), hi.max(a * x))
        });
    let margin = 40.0 + (target_mean / (1.0 - target_mean)).ln().abs();
    let (mut lo, mut hi) = (lo_x - margin, hi_x + margin);
    let (f_lo, f_hi) = (mean_prob(a, lo, sample), mean_prob(a, hi, sample));
    if !(f_lo >= target_mean && f_hi <= target_mean) {
        return Err(Error::Calibration(format!(
            "no root in [{lo}, {hi}] (mean ranges {f_hi}..{f_lo})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_prob(a, mid, sample) > target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(Sigmoid {
        a,
        b: 0.5 * (lo + hi),
    })
}

/// Group label and embedding for a newly sampled node.
#[derive(Debug, Clone, PartialEq)]
pub struct Spawn {
    pub group: usize,
    pub embedding: Vec<f64>,
}

pub fn sample_embedding<R: Rng + ?Sized>(c: &CommunitySpec, rng: &mut R) -> Vec<f64> {
    c.mean
        .iter()
        .map(|&m| {
            let z: f64 = rng.sample(StandardNormal);
            m + c.std * z
        })
        .collect()
}

/// Draws a group by prevalence, then an embedding from that group.
pub fn spawn_node<R: Rng + ?Sized>(communities: &[CommunitySpec], rng: &mut R) -> Spawn {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut group = communities.len() - 1;
    for (g, c) in communities.iter().enumerate() {
        acc += c.prevalence;
        if u < acc {
            group = g;
            break;
        }
    }
    // Trailing zero-prevalence groups must never be picked by the fallback.
    while communities[group].prevalence <= 0.0 && group > 0 {
        group -= 1;
    }
    Spawn {
        group,
        embedding: sample_embedding(&communities[group], rng),
    }
}

/// Inner products of `n_pairs` independent node pairs drawn from the
/// arrival distribution.
pub fn calibration_sample<R: Rng + ?Sized>(
    communities: &[CommunitySpec],
    n_pairs: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..n_pairs)
        .map(|_| {
            let a = spawn_node(communities, rng);
            let b = spawn_node(communities, rng);
            inner(&a.embedding, &b.embedding)
        })
        .collect()
}

/// Meeting strangers: `i` meets up to `n_strangers` distinct alive nodes
/// chosen uniformly and links to each with the sigmoid probability.
pub fn meet_strangers<R: Rng + ?Sized>(
    g: &mut Graph,
    i: NodeId,
    params: &GrowthParams,
    sigmoid: Sigmoid,
    t: u32,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    if !g.is_alive(i) {
        return Err(Error::DeadNode(i));
    }
    let pos = g
        .alive_nodes()
        .binary_search(&i)
        .map_err(|_| Error::DeadNode(i))?;
    let pool = g.n_alive() - 1;
    let k = params.n_strangers.min(pool);
    let mut added = Vec::new();
    if k == 0 {
        return Ok(added);
    }
    let picks = index::sample(rng, pool, k);
    for idx in picks.iter() {
        let j = g.alive_nodes()[if idx < pos { idx } else { idx + 1 }];
        let p = sigmoid.link(&g.node(i).embedding, &g.node(j).embedding);
        if rng.random::<f64>() < p && g.add_edge(i, j, Provenance::Stranger, t)? {
            added.push(Edge::new(i, j, Provenance::Stranger, t));
        }
    }
    Ok(added)
}

/// Reusable buffers for distance-2 queries.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    pub pool: Vec<u64>,
    pub organic: Vec<u64>,
    pub ids: Vec<NodeId>,
}

/// Meeting friends: `i` meets up to `n_friends` distinct nodes from its
/// distance-2 frontier and links to each with probability `p_friend`.
///
/// In `Full` mode an edge is tagged `FriendMediated` when its target was not
/// in the algorithm-free frontier at the start of the phase.
pub fn meet_friends<R: Rng + ?Sized>(
    g: &mut Graph,
    i: NodeId,
    params: &GrowthParams,
    mode: MediationMode,
    t: u32,
    rng: &mut R,
    scratch: &mut Scratch,
) -> Result<Vec<Edge>> {
    let filter = match mode {
        MediationMode::Full => EdgeFilter::All,
        MediationMode::OrganicOnly => EdgeFilter::NonAlgorithmic,
    };
    g.distance2_bits(i, filter, &mut scratch.pool)?;
    if mode == MediationMode::Full {
        g.distance2_bits(i, EdgeFilter::NonAlgorithmic, &mut scratch.organic)?;
    }
    scratch.ids.clear();
    scratch
        .ids
        .extend(bits::ones(&scratch.pool).map(|x| NodeId(x as u32)));
    let k = params.n_friends.min(scratch.ids.len());
    let mut added = Vec::new();
    if k == 0 {
        return Ok(added);
    }
    let picks = index::sample(rng, scratch.ids.len(), k);
    for idx in picks.iter() {
        let j = scratch.ids[idx];
        if rng.random::<f64>() < params.p_friend {
            let mediated =
                mode == MediationMode::Full && !bits::test_bit(&scratch.organic, j.index());
            let prov = if mediated {
                Provenance::FriendMediated
            } else {
                Provenance::FriendUnmediated
            };
            if g.add_edge(i, j, prov, t)? {
                added.push(Edge::new(i, j, prov, t));
            }
        }
    }
    Ok(added)
}

/// Removes each alive node independently with its hazard probability.
pub fn apply_attrition<R: Rng + ?Sized>(
    g: &mut Graph,
    hz: &HazardParams,
    t: u32,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    if !hz.enabled {
        return Ok(Vec::new());
    }
    let doomed: Vec<NodeId> = g
        .alive_nodes()
        .to_vec()
        .into_iter()
        .filter(|&u| {
            let p = hz.removal_probability(g.node(u).age(t));
            rng.random::<f64>() < p
        })
        .collect();
    for &u in &doomed {
        g.remove_node(u, t)?;
    }
    Ok(doomed)
}

/// Initial network: `n_per_group` nodes per community, each pair linked
/// with the sigmoid probability, then one closure pass in which every node
/// links to each of its current distance-2 nodes with probability
/// `p_closure`. All edges are tagged `Initial` at t = 0.
pub fn initialize_graph<R: Rng + ?Sized>(
    communities: &[CommunitySpec],
    n_per_group: usize,
    p_closure: f64,
    sigmoid: Sigmoid,
    rng: &mut R,
) -> Result<Graph> {
    let dim = communities.first().map_or(0, |c| c.mean.len());
    let mut g = Graph::new(dim);
    for (group, c) in communities.iter().enumerate() {
        for _ in 0..n_per_group {
            let emb = sample_embedding(c, rng);
            g.add_node(group, emb, 0)?;
        }
    }
    let ids = g.alive_nodes().to_vec();
    for (a, &u) in ids.iter().enumerate() {
        for &v in &ids[a + 1..] {
            let p = sigmoid.link(&g.node(u).embedding, &g.node(v).embedding);
            if rng.random::<f64>() < p {
                g.add_edge(u, v, Provenance::Initial, 0)?;
            }
        }
    }
    let mut frontier = Vec::new();
    for &u in &ids {
        g.distance2_bits(u, EdgeFilter::All, &mut frontier)?;
        let targets: Vec<usize> = bits::ones(&frontier).collect();
        for w in targets {
            if rng.random::<f64>() < p_closure {
                g.add_edge(u, NodeId(w as u32), Provenance::Initial, 0)?;
            }
        }
    }
    Ok(g)
}
