//! The trajectory loop.
//!
//! Each timestep runs, in order: node arrivals (meeting strangers then
//! meeting friends per arrival), the recommendation phase when the step is
//! inside the intervention window, attrition, and measurement.

use rand::Rng;

use crate::behavior::{apply_acceptance, decide, EdgeDelta};
use crate::dynamics::{
    apply_attrition, initialize_graph, meet_friends, meet_strangers, spawn_node, MediationMode,
    Scratch,
};
use crate::engine::arms::{arm_metrics, Arm, ArmRow};
use crate::engine::scenario::{AbConfig, AbScheme, RunMode, Scenario};
use crate::error::Result;
use crate::graph::{Graph, NodeId, Provenance, RemovalReason};
use crate::metrics::{snapshot_metrics, MetricRow};
use crate::recommend::RecScratch;
use crate::rng::Streams;

/// Alive-edge counts by provenance after a step, plus the step's churn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LedgerSummary {
    pub t: u32,
    /// Indexed like [`Provenance::ALL`].
    pub alive_by_provenance: [usize; 5],
    pub added: usize,
    pub removed: usize,
    pub rewired: usize,
}

impl LedgerSummary {
    pub fn alive(&self, p: Provenance) -> usize {
        self.alive_by_provenance[p as usize]
    }
}

/// Audit record for one accepted recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptanceEvent {
    pub t: u32,
    pub node: NodeId,
    pub candidate: NodeId,
    pub degree_before: usize,
    pub degree_after: usize,
    pub rewired: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: RunMode,
    pub seed: u64,
    /// One row per timestep `0..=horizon`.
    pub rows: Vec<MetricRow>,
    pub ledger: Vec<LedgerSummary>,
    /// Per-arm rows; empty unless `mode == Ab`.
    pub arms: Vec<ArmRow>,
}

impl Trajectory {
    pub fn horizon(&self) -> u32 {
        self.rows.len().saturating_sub(1) as u32
    }

    /// Metric value at timestep `t`.
    pub fn value(&self, metric: &str, t: u32) -> Option<f64> {
        self.rows.get(t as usize)?.get(metric)
    }
}

/// Full output of one simulated run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub graph: Graph,
    /// Arm of every node ever added (AB runs only).
    pub arms: Vec<Arm>,
    pub acceptances: Vec<AcceptanceEvent>,
}

/// Simulates `scenario` under `mode` with master seed `seed`.
pub fn run_trajectory(scenario: &Scenario, mode: RunMode, seed: u64) -> Result<Trajectory> {
    Ok(simulate(scenario, mode, seed, None)?.trajectory)
}

/// A/B run: only treatment-arm nodes receive recommendations.
pub fn ab_run(scenario: &Scenario, assignment: &AbConfig, seed: u64) -> Result<Trajectory> {
    Ok(simulate(scenario, RunMode::Ab, seed, Some(assignment))?.trajectory)
}

fn assign<R: Rng + ?Sized>(cfg: &AbConfig, group: usize, rng: &mut R) -> Arm {
    match cfg.scheme {
        AbScheme::RandomNode => {
            if rng.random::<f64>() < cfg.p {
                Arm::Treatment
            } else {
                Arm::Control
            }
        }
        AbScheme::ByCommunity => {
            if group == cfg.treated_group {
                Arm::Treatment
            } else {
                Arm::Control
            }
        }
    }
}

fn provenance_counts(g: &Graph) -> [usize; 5] {
    let mut c = [0usize; 5];
    for e in g.edges() {
        c[e.provenance as usize] += 1;
    }
    c
}

struct Recorder {
    last_ledger: usize,
}

impl Recorder {
    fn summarize(&mut self, g: &Graph, t: u32) -> LedgerSummary {
        let mut s = LedgerSummary {
            t,
            alive_by_provenance: provenance_counts(g),
            ..Default::default()
        };
        for ev in &g.ledger()[self.last_ledger..] {
            match ev {
                crate::graph::LedgerEvent::EdgeAdded(_) => s.added += 1,
                crate::graph::LedgerEvent::EdgeRemoved { reason, .. } => {
                    s.removed += 1;
                    if *reason == RemovalReason::Rewire {
                        s.rewired += 1;
                    }
                }
                _ => {}
            }
        }
        self.last_ledger = g.ledger().len();
        s
    }
}

/// Runs one trajectory and keeps the final graph and audit records.
///
/// `assignment` overrides the scenario's A/B configuration in `Ab` mode.
pub fn simulate(
    scenario: &Scenario,
    mode: RunMode,
    seed: u64,
    assignment: Option<&AbConfig>,
) -> Result<RunOutput> {
    scenario.validate()?;
    let ab = assignment.unwrap_or(&scenario.ab);
    if mode == RunMode::Ab {
        let mut s = scenario.clone();
        s.ab = ab.clone();
        s.validate()?;
    }
    let sigmoid = scenario.sigmoid()?;
    let n_groups = scenario.n_groups();
    let clustering_mode = scenario.metrics.global_clustering;
    let window = scenario.window();
    let mediation = if mode == RunMode::Unmediated {
        MediationMode::OrganicOnly
    } else {
        MediationMode::Full
    };

    let mut st = Streams::new(seed);
    let mut g = initialize_graph(
        &scenario.communities,
        scenario.init.n_per_group,
        scenario.init.p_closure,
        sigmoid,
        &mut st.init,
    )?;
    let mut arms: Vec<Arm> = Vec::new();
    if mode == RunMode::Ab {
        for n in g.nodes() {
            arms.push(assign(ab, n.group, &mut st.assignment));
        }
    }

    let mut rec = Recorder {
        last_ledger: g.ledger().len(),
    };
    let mut rows = vec![snapshot_metrics(&g, 0, n_groups, clustering_mode)];
    let mut ledger = vec![LedgerSummary {
        t: 0,
        alive_by_provenance: provenance_counts(&g),
        added: g.edge_count(),
        ..Default::default()
    }];
    let mut arm_rows = Vec::new();
    if mode == RunMode::Ab {
        arm_rows.push(arm_metrics(&g, &arms, 0));
    }
    let mut acceptances = Vec::new();
    let mut scratch = Scratch::default();
    let mut rscratch = RecScratch::default();

    for t in 1..=scenario.horizon {
        g.advance_to(t);
        for _ in 0..scenario.growth.arrivals_per_step {
            let spawn = spawn_node(&scenario.communities, &mut st.arrival);
            let i = g.add_node(spawn.group, spawn.embedding, t)?;
            if mode == RunMode::Ab {
                arms.push(assign(ab, spawn.group, &mut st.assignment));
            }
            meet_strangers(&mut g, i, &scenario.growth, sigmoid, t, &mut st.strangers)?;
            meet_friends(
                &mut g,
                i,
                &scenario.growth,
                mediation,
                t,
                &mut st.friends,
                &mut scratch,
            )?;
        }

        if mode != RunMode::Natural && window.contains(t) {
            let treated: Vec<NodeId> = g
                .alive_nodes()
                .iter()
                .copied()
                .filter(|u| mode != RunMode::Ab || arms[u.index()] == Arm::Treatment)
                .collect();
            for j in treated {
                let Some(c) =
                    scenario
                        .recommender
                        .recommend(&g, j, &mut st.recommender, &mut rscratch)?
                else {
                    continue;
                };
                if !decide(
                    &scenario.behavior,
                    g.node(j),
                    g.node(c),
                    sigmoid,
                    &mut st.behavior,
                ) {
                    continue;
                }
                let degree_before = g.degree(j);
                let EdgeDelta { added, removed } =
                    apply_acceptance(&mut g, j, c, &scenario.behavior, t, &mut st.behavior)?;
                if added.is_some() {
                    acceptances.push(AcceptanceEvent {
                        t,
                        node: j,
                        candidate: c,
                        degree_before,
                        degree_after: g.degree(j),
                        rewired: removed.is_some(),
                    });
                }
            }
        }

        apply_attrition(&mut g, &scenario.hazard, t, &mut st.attrition)?;
        rows.push(snapshot_metrics(&g, t, n_groups, clustering_mode));
        ledger.push(rec.summarize(&g, t));
        if mode == RunMode::Ab {
            arm_rows.push(arm_metrics(&g, &arms, t));
        }
    }

    Ok(RunOutput {
        trajectory: Trajectory {
            mode,
            seed,
            rows,
            ledger,
            arms: arm_rows,
        },
        graph: g,
        arms,
        acceptances,
    })
}

/// Seeds used by a scenario, offset by `seed_base`.
pub fn seeds(scenario: &Scenario, seed_base: u64) -> impl Iterator<Item = u64> {
    (0..scenario.seeds as u64).map(move |k| seed_base + k)
}
