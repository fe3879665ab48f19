//! Per-arm metrics for A/B runs, naive and interference-adjusted.
//!
//! Adjustments:
//! - homophily, control arm: algorithmic edges are dropped from both tallies;
//! - homophily, treatment arm: algorithmic treatment–control edges count
//!   twice in both tallies;
//! - clustering, both arms: computed on the subgraph induced by the arm;
//! - Gini, control arm: degrees exclude algorithmic edges.

use crate::bits;
use crate::engine::simulate::Trajectory;
use crate::graph::{Graph, NodeId, Provenance};
use crate::metrics::{clustering_coefficient, gini};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Treatment,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbMetric {
    Homophily,
    Clustering,
    Gini,
}

impl AbMetric {
    pub const ALL: [AbMetric; 3] = [AbMetric::Homophily, AbMetric::Clustering, AbMetric::Gini];

    pub fn as_str(self) -> &'static str {
        match self {
            AbMetric::Homophily => "homophily",
            AbMetric::Clustering => "clustering",
            AbMetric::Gini => "gini",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adjustment {
    Naive,
    Adjusted,
}

impl Adjustment {
    pub const ALL: [Adjustment; 2] = [Adjustment::Naive, Adjustment::Adjusted];

    pub fn as_str(self) -> &'static str {
        match self {
            Adjustment::Naive => "naive",
            Adjustment::Adjusted => "adjusted",
        }
    }
}

/// Arm-level metric values at one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmRow {
    pub t: u32,
    values: [Option<f64>; 12],
}

fn slot(metric: AbMetric, adj: Adjustment, arm: Arm) -> usize {
    (metric as usize) * 4 + (adj as usize) * 2 + arm as usize
}

impl ArmRow {
    pub fn get(&self, metric: AbMetric, adj: Adjustment, arm: Arm) -> Option<f64> {
        self.values[slot(metric, adj, arm)]
    }

    fn set(&mut self, metric: AbMetric, adj: Adjustment, arm: Arm, v: Option<f64>) {
        self.values[slot(metric, adj, arm)] = v;
    }
}

fn in_arm(arms: &[Arm], u: NodeId, arm: Arm) -> bool {
    arms.get(u.index()) == Some(&arm)
}

/// Homophily of an arm with per-edge weights.
///
/// Numerator: weighted monochromatic edges touching the arm. Denominator:
/// weighted edges touching the arm. Baseline: mean over arm nodes of their
/// group's population share. With community assignment this is exactly the
/// treated (or control) group's homophily.
pub fn arm_homophily<W>(g: &Graph, arms: &[Arm], arm: Arm, weight: W) -> Option<f64>
where
    W: Fn(NodeId, NodeId, Provenance) -> f64,
{
    let (mut mono, mut touching) = (0.0, 0.0);
    for e in g.edges() {
        if !(in_arm(arms, e.u, arm) || in_arm(arms, e.v, arm)) {
            continue;
        }
        let w = weight(e.u, e.v, e.provenance);
        touching += w;
        if g.node(e.u).group == g.node(e.v).group {
            mono += w;
        }
    }
    let n = g.n_alive();
    let mut group_n = Vec::<usize>::new();
    for &u in g.alive_nodes() {
        let grp = g.node(u).group;
        if grp >= group_n.len() {
            group_n.resize(grp + 1, 0);
        }
        group_n[grp] += 1;
    }
    let members: Vec<NodeId> = g
        .alive_nodes()
        .iter()
        .copied()
        .filter(|&u| in_arm(arms, u, arm))
        .collect();
    if touching <= 0.0 || members.is_empty() {
        return None;
    }
    let baseline = members
        .iter()
        .map(|&u| group_n[g.node(u).group] as f64 / n as f64)
        .sum::<f64>()
        / members.len() as f64;
    Some(mono / touching - baseline)
}

/// Mean full-graph clustering over the arm's nodes.
pub fn arm_clustering_naive(g: &Graph, arms: &[Arm], arm: Arm) -> Option<f64> {
    let vals: Vec<f64> = g
        .alive_nodes()
        .iter()
        .filter(|&&u| in_arm(arms, u, arm))
        .map(|&u| clustering_coefficient(g, u))
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Mean clustering over the arm's nodes in the arm-induced subgraph.
pub fn arm_clustering_induced(g: &Graph, arms: &[Arm], arm: Arm) -> Option<f64> {
    let words = g.alive_bits().len();
    let mut mask = vec![0u64; words];
    let mut members = Vec::new();
    for &u in g.alive_nodes() {
        if in_arm(arms, u, arm) {
            mask[u.index() / 64] |= 1 << (u.index() % 64);
            members.push(u);
        }
    }
    if members.is_empty() {
        return None;
    }
    let mut local = vec![0u64; words];
    let mut sum = 0.0;
    for &u in &members {
        for (l, (a, m)) in local.iter_mut().zip(g.adjacency_bits(u).iter().zip(&mask)) {
            *l = a & m;
        }
        let d = bits::count_ones(&local);
        if d < 2 {
            continue;
        }
        let links: usize = bits::ones(&local)
            .map(|x| {
                g.adjacency_bits(NodeId(x as u32))
                    .iter()
                    .zip(&local)
                    .map(|(a, b)| (a & b).count_ones() as usize)
                    .sum::<usize>()
            })
            .sum();
        // each edge among the neighbors is seen from both ends
        sum += links as f64 / (d * (d - 1)) as f64;
    }
    Some(sum / members.len() as f64)
}

/// Gini over the arm's degrees, optionally ignoring algorithmic edges.
pub fn arm_gini(g: &Graph, arms: &[Arm], arm: Arm, drop_algorithmic: bool) -> Option<f64> {
    let mut d: Vec<usize> = g
        .alive_nodes()
        .iter()
        .filter(|&&u| in_arm(arms, u, arm))
        .map(|&u| {
            if drop_algorithmic {
                g.neighbors(u)
                    .iter()
                    .filter(|l| !l.provenance.is_algorithmic())
                    .count()
            } else {
                g.degree(u)
            }
        })
        .collect();
    d.sort_unstable();
    gini(&d)
}

/// Every arm metric, naive and adjusted, for both arms.
pub fn arm_metrics(g: &Graph, arms: &[Arm], t: u32) -> ArmRow {
    use AbMetric::*;
    use Adjustment::*;
    let mut row = ArmRow {
        t,
        ..Default::default()
    };
    let unit = |_: NodeId, _: NodeId, _: Provenance| 1.0;
    let organic = |_: NodeId, _: NodeId, p: Provenance| if p.is_algorithmic() { 0.0 } else { 1.0 };
    let cross_doubled = |u: NodeId, v: NodeId, p: Provenance| {
        let cross = arms.get(u.index()) != arms.get(v.index());
        if p.is_algorithmic() && cross {
            2.0
        } else {
            1.0
        }
    };
    for arm in [Arm::Treatment, Arm::Control] {
        row.set(Homophily, Naive, arm, arm_homophily(g, arms, arm, unit));
        row.set(Clustering, Naive, arm, arm_clustering_naive(g, arms, arm));
        row.set(
            Clustering,
            Adjusted,
            arm,
            arm_clustering_induced(g, arms, arm),
        );
        row.set(Gini, Naive, arm, arm_gini(g, arms, arm, false));
    }
    row.set(
        Homophily,
        Adjusted,
        Arm::Treatment,
        arm_homophily(g, arms, Arm::Treatment, cross_doubled),
    );
    row.set(
        Homophily,
        Adjusted,
        Arm::Control,
        arm_homophily(g, arms, Arm::Control, organic),
    );
    row.set(
        Gini,
        Adjusted,
        Arm::Treatment,
        arm_gini(g, arms, Arm::Treatment, false),
    );
    row.set(
        Gini,
        Adjusted,
        Arm::Control,
        arm_gini(g, arms, Arm::Control, true),
    );
    row
}

/// Arm values and their difference (treatment minus control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbEstimate {
    pub treatment: Option<f64>,
    pub control: Option<f64>,
    pub difference: Option<f64>,
}

/// A/B estimate of `metric` at timestep `t`; `None` if the trajectory has no
/// arm row there.
pub fn ab_estimate(
    traj: &Trajectory,
    metric: AbMetric,
    adj: Adjustment,
    t: u32,
) -> Option<AbEstimate> {
    let row = traj.arms.get(t as usize)?;
    let treatment = row.get(metric, adj, Arm::Treatment);
    let control = row.get(metric, adj, Arm::Control);
    Some(AbEstimate {
        treatment,
        control,
        difference: treatment.zip(control).map(|(a, b)| a - b),
    })
}
