//! How nodes respond to a recommendation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Sigmoid;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Node, NodeId, Provenance, RemovalReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceKind {
    /// Accept with a fixed probability `p`.
    Constant,
    /// Accept with the same sigmoid of the embedding inner product that
    /// drives meeting strangers.
    ChoiceHomophily,
}

/// Which edge a rewiring acceptance drops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewireScope {
    /// One of the accepting node's other edges.
    Node,
    /// Any edge of the graph other than the new one.
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BehaviorSpec {
    pub acceptance: AcceptanceKind,
    pub p: f64,
    pub rewire: bool,
    pub rewire_scope: RewireScope,
}

impl Default for BehaviorSpec {
    fn default() -> Self {
        BehaviorSpec {
            acceptance: AcceptanceKind::Constant,
            p: 0.5,
            rewire: false,
            rewire_scope: RewireScope::Node,
        }
    }
}

impl BehaviorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config(
                "behavior.p",
                format!("must lie in [0, 1], got {}", self.p),
            ));
        }
        Ok(())
    }
}

/// Whether `i` accepts the recommendation of `j`. Always consumes exactly
/// one uniform draw.
pub fn decide<R: Rng + ?Sized>(
    spec: &BehaviorSpec,
    i: &Node,
    j: &Node,
    sigmoid: Sigmoid,
    rng: &mut R,
) -> bool {
    let p = match spec.acceptance {
        AcceptanceKind::Constant => spec.p,
        AcceptanceKind::ChoiceHomophily => sigmoid.link(&i.embedding, &j.embedding),
    };
    rng.random::<f64>() < p
}

/// Net change to the graph from one accepted recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeDelta {
    pub added: Option<Edge>,
    pub removed: Option<Edge>,
}

/// Adds the algorithmic edge `i–j`; under rewiring also drops one other
/// edge (never the new one).
pub fn apply_acceptance<R: Rng + ?Sized>(
    g: &mut Graph,
    i: NodeId,
    j: NodeId,
    spec: &BehaviorSpec,
    t: u32,
    rng: &mut R,
) -> Result<EdgeDelta> {
    let mut delta = EdgeDelta::default();
    if !g.add_edge(i, j, Provenance::Algorithmic, t)? {
        return Ok(delta);
    }
    delta.added = Some(Edge::new(i, j, Provenance::Algorithmic, t));
    if !spec.rewire {
        return Ok(delta);
    }
    let victim = match spec.rewire_scope {
        RewireScope::Node => {
            let others: Vec<NodeId> = g
                .neighbors(i)
                .iter()
                .map(|l| l.to)
                .filter(|&w| w != j)
                .collect();
            if others.is_empty() {
                None
            } else {
                Some((i, others[rng.random_range(0..others.len())]))
            }
        }
        RewireScope::Graph => random_edge_except(g, (i, j), rng),
    };
    if let Some((a, b)) = victim {
        delta.removed = g.remove_edge(a, b, t, RemovalReason::Rewire)?;
    }
    Ok(delta)
}

// Uniform edge other than `keep`, by degree-weighted endpoint selection.
fn random_edge_except<R: Rng + ?Sized>(
    g: &Graph,
    keep: (NodeId, NodeId),
    rng: &mut R,
) -> Option<(NodeId, NodeId)> {
    if g.edge_count() < 2 {
        return None;
    }
    let is_keep = |a: NodeId, b: NodeId| (a, b) == keep || (b, a) == keep;
    loop {
        let mut r = rng.random_range(0..2 * g.edge_count());
        for &u in g.alive_nodes() {
            let d = g.degree(u);
            if r < d {
                let w = g.neighbors(u)[r].to;
                if !is_keep(u, w) {
                    return Some((u, w));
                }
                break;
            }
            r -= d;
        }
    }
}
