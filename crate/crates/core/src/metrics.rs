//! Structural metrics: clustering, degree Gini, group homophily and
//! statistics over meeting-friends edges.
//!
//! Every metric with a possibly-zero denominator returns `Option<f64>`;
//! `None` is the undefined marker and is never coerced to 0.

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Node, NodeId, Provenance};

/// How the whole-graph clustering value is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalClustering {
    /// Mean of node-level clustering coefficients.
    #[default]
    Average,
    /// Closed triples over connected triples.
    Transitivity,
}

/// `2Δ / (d(d-1))`, or 0 below degree 2.
pub fn clustering_coefficient(g: &Graph, u: NodeId) -> f64 {
    let d = g.degree(u);
    if d < 2 {
        return 0.0;
    }
    2.0 * g.triangles(u) as f64 / (d * (d - 1)) as f64
}

pub fn average_clustering<F>(g: &Graph, subset: F) -> Option<f64>
where
    F: Fn(&Node) -> bool,
{
    let (sum, n) = g
        .alive_nodes()
        .iter()
        .filter(|&&u| subset(g.node(u)))
        .fold((0.0, 0usize), |(s, n), &u| {
            (s + clustering_coefficient(g, u), n + 1)
        });
    (n > 0).then(|| sum / n as f64)
}

pub fn transitivity<F>(g: &Graph, subset: F) -> Option<f64>
where
    F: Fn(&Node) -> bool,
{
    let (closed, triples) =
        g.alive_nodes()
            .iter()
            .filter(|&&u| subset(g.node(u)))
            .fold((0u64, 0u64), |(c, t), &u| {
                let d = g.degree(u) as u64;
                (c + g.triangles(u), t + d * d.saturating_sub(1) / 2)
            });
    (triples > 0).then(|| closed as f64 / triples as f64)
}

/// Gini coefficient of an ascending degree list:
/// `2 Σ i·d_i / (n Σ d_i) − (n + 1) / n` with 1-based `i`.
pub fn gini(degrees: &[usize]) -> Option<f64> {
    debug_assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
    let n = degrees.len();
    let total: usize = degrees.iter().sum();
    if n == 0 || total == 0 {
        return None;
    }
    let weighted: f64 = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| (i + 1) as f64 * d as f64)
        .sum();
    let n = n as f64;
    Some(2.0 * weighted / (n * total as f64) - (n + 1.0) / n)
}

/// Same formula over real-valued ascending data.
pub fn gini_real(values: &[f64]) -> Option<f64> {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return None;
    }
    let weighted: f64 = values
        .iter()
        .enumerate()
        .map(|(i, &d)| (i + 1) as f64 * d)
        .sum();
    let n = n as f64;
    Some(2.0 * weighted / (n * total) - (n + 1.0) / n)
}

/// Edge tallies for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GroupEdges {
    /// Edges with both endpoints in the group.
    pub within: f64,
    /// Edges with at least one endpoint in the group.
    pub touching: f64,
}

/// `|E_gg| / |E_g| − n_g / n` from raw tallies.
pub fn homophily_from(edges: GroupEdges, n_group: usize, n_total: usize) -> Option<f64> {
    if edges.touching <= 0.0 || n_group == 0 || n_total == 0 {
        return None;
    }
    Some(edges.within / edges.touching - n_group as f64 / n_total as f64)
}

pub fn group_edges(g: &Graph, group: usize) -> GroupEdges {
    let mut e = GroupEdges::default();
    for edge in g.edges() {
        let gu = g.node(edge.u).group == group;
        let gv = g.node(edge.v).group == group;
        if gu || gv {
            e.touching += 1.0;
        }
        if gu && gv {
            e.within += 1.0;
        }
    }
    e
}

pub fn homophily(g: &Graph, group: usize) -> Option<f64> {
    let n_g = g
        .alive_nodes()
        .iter()
        .filter(|&&u| g.node(u).group == group)
        .count();
    homophily_from(group_edges(g, group), n_g, g.n_alive())
}

/// Shares computed over alive meeting-friends edges.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeFractions {
    /// Mediated edges among all meeting-friends edges.
    pub mediated: Option<f64>,
    /// Cross-group edges among mediated edges.
    pub bichromatic_mediated: Option<f64>,
    /// Cross-group edges among unmediated meeting-friends edges.
    pub bichromatic_unmediated: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn edge_fractions(g: &Graph) -> EdgeFractions {
    let (mut med, mut unmed, mut med_bi, mut unmed_bi) = (0, 0, 0, 0);
    for e in g.edges() {
        let bi = g.node(e.u).group != g.node(e.v).group;
        match e.provenance {
            Provenance::FriendMediated => {
                med += 1;
                med_bi += bi as usize;
            }
            Provenance::FriendUnmediated => {
                unmed += 1;
                unmed_bi += bi as usize;
            }
            _ => {}
        }
    }
    EdgeFractions {
        mediated: ratio(med, med + unmed),
        bichromatic_mediated: ratio(med_bi, med),
        bichromatic_unmediated: ratio(unmed_bi, unmed),
    }
}

/// Every structural metric at one timestep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricRow {
    pub t: u32,
    pub n_alive: usize,
    pub avg_degree: Option<f64>,
    pub clustering_global: Option<f64>,
    pub clustering_by_group: Vec<Option<f64>>,
    pub gini_global: Option<f64>,
    pub gini_by_group: Vec<Option<f64>>,
    pub homophily_by_group: Vec<Option<f64>>,
    pub mediated_fraction: Option<f64>,
    pub bichromatic_fraction_mediated: Option<f64>,
    pub bichromatic_fraction_unmediated: Option<f64>,
}

impl MetricRow {
    /// Mean homophily over groups where it is defined.
    pub fn homophily_mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self.homophily_by_group.iter().flatten().copied().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Flattened `(metric name, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(String, Option<f64>)> {
        let mut out = vec![
            ("n_alive".to_string(), Some(self.n_alive as f64)),
            ("avg_degree".to_string(), self.avg_degree),
            ("clustering_global".to_string(), self.clustering_global),
        ];
        for (k, v) in self.clustering_by_group.iter().enumerate() {
            out.push((format!("clustering_g{k}"), *v));
        }
        out.push(("gini_global".to_string(), self.gini_global));
        for (k, v) in self.gini_by_group.iter().enumerate() {
            out.push((format!("gini_g{k}"), *v));
        }
        out.push(("homophily".to_string(), self.homophily_mean()));
        for (k, v) in self.homophily_by_group.iter().enumerate() {
            out.push((format!("homophily_g{k}"), *v));
        }
        out.push(("mediated_fraction".to_string(), self.mediated_fraction));
        out.push((
            "bichromatic_fraction_mediated".to_string(),
            self.bichromatic_fraction_mediated,
        ));
        out.push((
            "bichromatic_fraction_unmediated".to_string(),
            self.bichromatic_fraction_unmediated,
        ));
        out
    }

    /// Value of a metric by its flattened name. Unknown names and undefined
    /// values both yield `None`.
    pub fn get(&self, name: &str) -> Option<f64> {
        let per_group = |prefix: &str, v: &[Option<f64>]| -> Option<Option<f64>> {
            let k: usize = name.strip_prefix(prefix)?.parse().ok()?;
            Some(v.get(k).copied().flatten())
        };
        match name {
            "n_alive" => Some(self.n_alive as f64),
            "avg_degree" => self.avg_degree,
            "clustering_global" => self.clustering_global,
            "gini_global" => self.gini_global,
            "homophily" => self.homophily_mean(),
            "mediated_fraction" => self.mediated_fraction,
            "bichromatic_fraction_mediated" => self.bichromatic_fraction_mediated,
            "bichromatic_fraction_unmediated" => self.bichromatic_fraction_unmediated,
            _ => per_group("clustering_g", &self.clustering_by_group)
                .or_else(|| per_group("gini_g", &self.gini_by_group))
                .or_else(|| per_group("homophily_g", &self.homophily_by_group))
                .flatten(),
        }
    }

    pub fn has_metric(&self, name: &str) -> bool {
        self.entries().iter().any(|(n, _)| n == name)
    }
}

/// Computes a full [`MetricRow`] on the alive subgraph.
pub fn snapshot_metrics(g: &Graph, t: u32, n_groups: usize, mode: GlobalClustering) -> MetricRow {
    let n = g.n_alive();
    let mut row = MetricRow {
        t,
        n_alive: n,
        clustering_by_group: vec![None; n_groups],
        gini_by_group: vec![None; n_groups],
        homophily_by_group: vec![None; n_groups],
        ..MetricRow::default()
    };
    if n < 2 || g.edge_count() == 0 {
        return row;
    }
    row.avg_degree = Some(2.0 * g.edge_count() as f64 / n as f64);

    // Single pass over nodes for clustering, degrees and group sizes.
    let mut clus_sum = vec![0.0; n_groups];
    let mut group_n = vec![0usize; n_groups];
    let mut group_deg: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    let mut all_deg = Vec::with_capacity(n);
    let (mut clus_all, mut closed, mut triples) = (0.0, 0u64, 0u64);
    for &u in g.alive_nodes() {
        let grp = g.node(u).group;
        let d = g.degree(u);
        let c = clustering_coefficient(g, u);
        clus_all += c;
        closed += g.triangles(u);
        triples += (d as u64) * (d as u64).saturating_sub(1) / 2;
        all_deg.push(d);
        if grp < n_groups {
            clus_sum[grp] += c;
            group_n[grp] += 1;
            group_deg[grp].push(d);
        }
    }
    row.clustering_global = match mode {
        GlobalClustering::Average => Some(clus_all / n as f64),
        GlobalClustering::Transitivity => ratio_f(closed as f64, triples as f64),
    };
    all_deg.sort_unstable();
    row.gini_global = gini(&all_deg);
    for k in 0..n_groups {
        row.clustering_by_group[k] = ratio_f(clus_sum[k], group_n[k] as f64);
        group_deg[k].sort_unstable();
        row.gini_by_group[k] = gini(&group_deg[k]);
    }

    let mut tallies = vec![GroupEdges::default(); n_groups];
    let (mut med, mut unmed, mut med_bi, mut unmed_bi) = (0, 0, 0, 0);
    for e in g.edges() {
        let (gu, gv) = (g.node(e.u).group, g.node(e.v).group);
        let bi = gu != gv;
        if !bi {
            if let Some(t) = tallies.get_mut(gu) {
                t.within += 1.0;
                t.touching += 1.0;
            }
        } else {
            for grp in [gu, gv] {
                if let Some(t) = tallies.get_mut(grp) {
                    t.touching += 1.0;
                }
            }
        }
        match e.provenance {
            Provenance::FriendMediated => {
                med += 1;
                med_bi += bi as usize;
            }
            Provenance::FriendUnmediated => {
                unmed += 1;
                unmed_bi += bi as usize;
            }
            _ => {}
        }
    }
    for k in 0..n_groups {
        row.homophily_by_group[k] = homophily_from(tallies[k], group_n[k], n);
    }
    row.mediated_fraction = ratio(med, med + unmed);
    row.bichromatic_fraction_mediated = ratio(med_bi, med);
    row.bichromatic_fraction_unmediated = ratio(unmed_bi, unmed);
    row
}

fn ratio_f(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}
