//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::time::Instant;

use linkdyn_core::engine::effects::{longitudinal_estimate, total_effect};
use linkdyn_core::engine::scenario::baseline_communities;
use linkdyn_core::io::write_trajectories;
use linkdyn_core::metrics::{clustering_coefficient, gini};
use linkdyn_core::recommend::latent_distribution;
use linkdyn_core::rng::{substream, Stream};
use linkdyn_core::{
    arm_metrics, ci95, simulate, to_toml, AbConfig, AbMetric, AbScheme, Adjustment, Arm,
    CommunitySpec, EdgeFilter, Graph, LedgerEvent, NodeId, Provenance, RecommenderKind, RunMode,
    RunOutput, Scenario, Trajectory,
};
use rand::Rng;

const SEEDS: u64 = 5;
const HORIZON: u32 = 400;

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Runs {
    cache: HashMap<String, Vec<RunOutput>>,
}

impl Runs {
    fn outputs(&mut self, s: &Scenario, mode: RunMode) -> &[RunOutput] {
        let key = format!("{}|{}", mode.as_str(), to_toml(s).unwrap());
        self.cache.entry(key).or_insert_with(|| {
            (0..SEEDS)
                .map(|seed| simulate(s, mode, seed, None).expect("scenario runs"))
                .collect()
        })
    }

    fn trajs(&mut self, s: &Scenario, mode: RunMode) -> Vec<Trajectory> {
        self.outputs(s, mode)
            .iter()
            .map(|o| o.trajectory.clone())
            .collect()
    }
}

fn scenario(kind: RecommenderKind, t_lo: u32, t_hi: u32, horizon: u32) -> Scenario {
    let mut s = Scenario::baseline(horizon).with_window(t_lo, t_hi);
    s.recommender.kind = kind;
    s
}

fn mean_at(trajs: &[Trajectory], metric: &str, t: u32) -> f64 {
    ci95(trajs.iter().map(|tr| tr.value(metric, t))).map_or(f64::NAN, |b| b.mean)
}

fn effect(rec: &[Trajectory], nat: &[Trajectory], metric: &str, t: u32) -> f64 {
    ci95(
        rec.iter()
            .zip(nat)
            .map(|(r, n)| total_effect(r, n, metric, t)),
    )
    .map_or(f64::NAN, |b| b.mean)
}

fn oracles() -> Verdict {
    let mut rng = substream(2024, Stream::Init);
    let mut worst_gini = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let mut d: Vec<usize> = (0..n).map(|_| rng.random_range(0..60)).collect();
        d[0] += 1;
        d.sort_unstable();
        let f: Vec<f64> = d.iter().map(|&x| x as f64).collect();
        worst_gini = worst_gini.max((gini(&d).unwrap() - common::mad_gini(&f)).abs());
    }
    let (mut clustering_ok, mut d2_ok) = (true, true);
    let mut worst_softmax = 0.0_f64;
    for k in 0..40 {
        let n = rng.random_range(2..=50);
        let g = common::random_graph(n, rng.random_range(0.02..0.5), &mut rng);
        for u in (0..n as u32).map(NodeId) {
            clustering_ok &= clustering_coefficient(&g, u) == common::brute_clustering(&g, u);
            let all: Vec<u32> = g
                .distance2(u, |_| true)
                .unwrap()
                .iter()
                .map(|x| x.0)
                .collect();
            let organic: Vec<u32> = g
                .distance2(u, |p| !p.is_algorithmic())
                .unwrap()
                .iter()
                .map(|x| x.0)
                .collect();
            d2_ok &= all
                .iter()
                .copied()
                .eq(common::bfs_distance2(&g, u, |_| true));
            d2_ok &= organic
                .iter()
                .copied()
                .eq(common::bfs_distance2(&g, u, |p| !p.is_algorithmic()));
            let mut bits = Vec::new();
            g.distance2_bits(u, EdgeFilter::All, &mut bits).unwrap();
            let from_bits: Vec<u32> = (0..n as u32)
                .filter(|&x| bits[x as usize / 64] >> (x % 64) & 1 == 1)
                .collect();
            d2_ok &= from_bits == all;
            let beta = [0.0, 1.0, 10.0, 50.0][k % 4];
            let dist = latent_distribution(&g, u, beta).unwrap();
            if !dist.is_empty() {
                let total: f64 = dist.iter().map(|x| x.1).sum();
                let vi = &g.node(u).embedding;
                let s: Vec<f64> = dist
                    .iter()
                    .map(|(j, _)| {
                        let vj = &g.node(*j).embedding;
                        vi[0] * vj[0] + vi[1] * vj[1]
                    })
                    .collect();
                let m = s.iter().cloned().fold(f64::MIN, f64::max);
                let z: f64 = s.iter().map(|x| (beta * (x - m)).exp()).sum();
                let oracle_gap = dist
                    .iter()
                    .zip(&s)
                    .map(|((_, p), x)| (p - (beta * (x - m)).exp() / z).abs())
                    .fold(0.0, f64::max);
                worst_softmax = worst_softmax.max((total - 1.0).abs()).max(oracle_gap);
            }
        }
    }
    Verdict {
        name: "oracle equivalences",
        pass: worst_gini <= 1e-9 && clustering_ok && d2_ok && worst_softmax <= 1e-9,
        detail: format!(
            "gini max err {worst_gini:.2e}; clustering exact {clustering_ok}; distance2 exact {d2_ok}; softmax max err {worst_softmax:.2e}"
        ),
    }
}

fn determinism() -> Verdict {
    let mut s = scenario(RecommenderKind::Latent, 20, 60, 80);
    s.modes = vec![RunMode::Natural, RunMode::Intervened, RunMode::Unmediated];
    let csv = || {
        let trajs: Vec<Trajectory> = s
            .modes
            .iter()
            .flat_map(|&m| (0..2).map(move |seed| (m, seed)))
            .map(|(m, seed)| simulate(&s, m, seed, None).unwrap().trajectory)
            .collect();
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &trajs).unwrap();
        buf
    };
    let (a, b) = (csv(), csv());
    Verdict {
        name: "determinism",
        pass: a == b && !a.is_empty(),
        detail: format!("{} bytes, identical {}", a.len(), a == b),
    }
}

fn initialization(runs: &mut Runs) -> Verdict {
    let nat = runs.trajs(
        &scenario(RecommenderKind::Latent, 50, 200, HORIZON),
        RunMode::Natural,
    );
    let h0 = mean_at(&nat, "homophily_g0", 0);
    let h1 = mean_at(&nat, "homophily_g1", 0);
    let ok = |h: f64| (h - 0.1).abs() <= 0.05;
    Verdict {
        name: "initialization homophily",
        pass: ok(h0) && ok(h1),
        detail: format!("h1 {h0:.4}, h2 {h1:.4} (target 0.1 +/- 0.05)"),
    }
}

fn delayed_signs(runs: &mut Runs) -> Verdict {
    let base = scenario(RecommenderKind::Latent, 50, 200, HORIZON);
    let nat = runs.trajs(&base, RunMode::Natural);
    let lat = runs.trajs(&base, RunMode::Intervened);
    let fof = runs.trajs(
        &scenario(RecommenderKind::Fof, 50, 200, HORIZON),
        RunMode::Intervened,
    );
    let e = |r: &[Trajectory], m: &str, t| effect(r, &nat, m, t);
    let (lh200, lh400) = (e(&lat, "homophily", 200), e(&lat, "homophily", 400));
    let (fh200, fh400) = (e(&fof, "homophily", 200), e(&fof, "homophily", 400));
    let (fg200, fg400) = (e(&fof, "gini_global", 200), e(&fof, "gini_global", 400));
    let (lg200, lg400) = (e(&lat, "gini_global", 200), e(&lat, "gini_global", 400));
    let a = lh200 > 0.0 && fh200 < 0.0;
    let b = lh400.abs() < lh200.abs() && fh400.abs() < fh200.abs();
    let c = fg200 < 0.0 && fg400 > 0.0;
    let d = lg200 > 0.0 && lg400 > 0.0;
    Verdict {
        name: "delayed-effect signs",
        pass: a && b && c && d,
        detail: format!(
            "(a) {a}: latent H {lh200:+.4}, fof H {fh200:+.4} @200; (b) {b}: latent H {lh400:+.4}, fof H {fh400:+.4} @400; (c) {c}: fof G {fg200:+.4} @200, {fg400:+.4} @400; (d) {d}: latent G {lg200:+.4} @200, {lg400:+.4} @400"
        ),
    }
}

fn indirect(runs: &mut Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    let nat = runs.trajs(
        &scenario(RecommenderKind::Latent, 50, 200, HORIZON),
        RunMode::Natural,
    );
    for kind in [RecommenderKind::Latent, RecommenderKind::Fof] {
        let mut fractions = Vec::new();
        let mut persistent = true;
        for t_hi in [100, 200, 400] {
            let rec = runs.trajs(&scenario(kind, 50, t_hi, HORIZON), RunMode::Intervened);
            let at_hi = mean_at(&rec, "mediated_fraction", t_hi);
            let at_end = mean_at(&rec, "mediated_fraction", HORIZON);
            persistent &= ((at_end - at_hi) / at_hi).abs() < 0.2;
            fractions.push(at_end);
        }
        let monotone = fractions.windows(2).all(|w| w[0] <= w[1]);
        pass &= monotone && persistent;
        parts.push(format!(
            "{kind:?} mediated@400 {:.3}/{:.3}/{:.3} monotone {monotone} persistent {persistent}",
            fractions[0], fractions[1], fractions[2]
        ));

        let s = scenario(kind, 50, 200, HORIZON);
        let rec = runs.trajs(&s, RunMode::Intervened);
        let mut bias_ok = true;
        for t in [200, HORIZON] {
            let med = mean_at(&rec, "bichromatic_fraction_mediated", t);
            let unmed = mean_at(&rec, "bichromatic_fraction_unmediated", t);
            bias_ok &= match kind {
                RecommenderKind::Latent => med < unmed,
                _ => med > unmed,
            };
            parts.push(format!(
                "{kind:?} bichromatic@{t} mediated {med:.3} unmediated {unmed:.3}"
            ));
        }
        pass &= bias_ok;

        let unm = runs.trajs(&s, RunMode::Unmediated);
        let ts: Vec<u32> = (50..=HORIZON).collect();
        let between = ts
            .iter()
            .filter(|&&t| {
                let (n, u, r) = (
                    mean_at(&nat, "homophily", t),
                    mean_at(&unm, "homophily", t),
                    mean_at(&rec, "homophily", t),
                );
                n.min(r) <= u && u <= n.max(r)
            })
            .count() as f64
            / ts.len() as f64;
        pass &= between >= 0.8;
        parts.push(format!(
            "{kind:?} unmediated between {:.1}%",
            100.0 * between
        ));
    }
    Verdict {
        name: "indirect effects",
        pass,
        detail: parts.join("; "),
    }
}

fn rewiring(runs: &mut Runs) -> Verdict {
    let nat = runs.trajs(
        &scenario(RecommenderKind::Latent, 50, 200, HORIZON),
        RunMode::Natural,
    );
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in [RecommenderKind::Fof, RecommenderKind::Latent] {
        let plain = scenario(kind, 50, 200, HORIZON);
        let mut rw = plain.clone();
        rw.behavior.rewire = true;
        let (mut events, mut violations) = (0, 0);
        for out in runs.outputs(&rw, RunMode::Intervened) {
            for ev in out.acceptances.iter().filter(|e| e.degree_before >= 1) {
                events += 1;
                violations += usize::from(ev.degree_after != ev.degree_before || !ev.rewired);
            }
        }
        pass &= events > 0 && violations == 0;
        let delayed = |rec: &[Trajectory]| {
            effect(rec, &nat, "gini_global", HORIZON) - effect(rec, &nat, "gini_global", 200)
        };
        let d_plain = delayed(&runs.trajs(&plain, RunMode::Intervened));
        let d_rw = delayed(&runs.trajs(&rw, RunMode::Intervened));
        let amplifying = d_plain > 0.0;
        if amplifying {
            pass &= d_rw.abs() < d_plain.abs();
        }
        parts.push(format!(
            "{kind:?}: {events} events, {violations} violations; delayed gini default {d_plain:+.4} rewire {d_rw:+.4}{}",
            if amplifying { "" } else { " (no amplification under default)" }
        ));
    }
    Verdict {
        name: "rewiring variant",
        pass,
        detail: parts.join("; "),
    }
}

// 5-node fixture: arms T,T,T,C,C; groups 0,0,1,0,1.
fn ab_fixture() -> (Graph, Vec<Arm>) {
    let mut g = Graph::new(2);
    for grp in [0, 0, 1, 0, 1] {
        g.add_node(grp, vec![0.0, 0.0], 0).unwrap();
    }
    let edges = [
        (0, 1, Provenance::Stranger),
        (1, 2, Provenance::FriendUnmediated),
        (0, 2, Provenance::Stranger),
        (0, 3, Provenance::Algorithmic),
        (3, 4, Provenance::Stranger),
        (2, 4, Provenance::Algorithmic),
        (1, 3, Provenance::Initial),
    ];
    for (u, v, p) in edges {
        g.add_edge(NodeId(u), NodeId(v), p, 0).unwrap();
    }
    let t = Arm::Treatment;
    let c = Arm::Control;
    (g, vec![t, t, t, c, c])
}

fn ab_fixture_oracle() -> bool {
    let (g, arms) = ab_fixture();
    let row = arm_metrics(&g, &arms, 0);
    // Hand enumeration. Edges touching T: all but 3-4.
    // mono: 0-1, 0-3, 1-3, 2-4 (4 of 6). Baseline: mean(3/5, 3/5, 2/5) = 8/15.
    // Adjusted T: cross-arm algorithmic 0-3 (mono) and 2-4 (mono) doubled: 6/8.
    // Edges touching C: 0-3, 3-4, 2-4, 1-3; mono 0-3, 2-4, 1-3. Baseline 1/2.
    // Adjusted C drops 0-3 and 2-4: 3-4 (bi), 1-3 (mono).
    // Clustering, full graph: node 0 nbrs {1,2,3}: 1-2, 1-3 -> 2/3; node 1 nbrs
    // {0,2,3}: 0-2, 0-3 -> 2/3; node 2 nbrs {1,0,4}: 0-1 -> 1/3; node 3 nbrs
    // {0,4,1}: 0-1 -> 1/3; node 4 nbrs {3,2}: none -> 0.
    // Induced T is a triangle; induced C is one edge.
    // Degrees: T [3,3,3]; C [3,2]; C without algorithmic [2,1].
    let expect = [
        (
            AbMetric::Homophily,
            Adjustment::Naive,
            Arm::Treatment,
            4.0 / 6.0 - 8.0 / 15.0,
        ),
        (
            AbMetric::Homophily,
            Adjustment::Adjusted,
            Arm::Treatment,
            6.0 / 8.0 - 8.0 / 15.0,
        ),
        (
            AbMetric::Homophily,
            Adjustment::Naive,
            Arm::Control,
            3.0 / 4.0 - 0.5,
        ),
        // mono share 1/2 against a baseline of 1/2
        (AbMetric::Homophily, Adjustment::Adjusted, Arm::Control, 0.0),
        (
            AbMetric::Clustering,
            Adjustment::Naive,
            Arm::Treatment,
            (2.0 / 3.0 + 2.0 / 3.0 + 1.0 / 3.0) / 3.0,
        ),
        (
            AbMetric::Clustering,
            Adjustment::Adjusted,
            Arm::Treatment,
            1.0,
        ),
        (
            AbMetric::Clustering,
            Adjustment::Naive,
            Arm::Control,
            (1.0 / 3.0) / 2.0,
        ),
        (
            AbMetric::Clustering,
            Adjustment::Adjusted,
            Arm::Control,
            0.0,
        ),
        (AbMetric::Gini, Adjustment::Naive, Arm::Treatment, 0.0),
        (AbMetric::Gini, Adjustment::Adjusted, Arm::Treatment, 0.0),
        // [2,3]: 2(2+6)/(2*5) - 3/2 = 0.1
        (AbMetric::Gini, Adjustment::Naive, Arm::Control, 0.1),
        // [1,2]: 2(1+4)/(2*3) - 3/2 = 1/6
        (
            AbMetric::Gini,
            Adjustment::Adjusted,
            Arm::Control,
            1.0 / 6.0,
        ),
    ];
    expect
        .iter()
        .all(|&(m, a, arm, v)| row.get(m, a, arm).is_some_and(|x| (x - v).abs() < 1e-12))
}

fn evaluation_biases(runs: &mut Runs) -> Verdict {
    let mut parts = Vec::new();
    let base = scenario(RecommenderKind::Latent, 50, 200, HORIZON);
    let nat = runs.trajs(&base, RunMode::Natural);
    let longi = |rec: &[Trajectory]| {
        ci95(
            rec.iter()
                .map(|r| longitudinal_estimate(r, "clustering_global", 50, HORIZON)),
        )
        .map_or(f64::NAN, |b| b.mean)
    };
    let fof = runs.trajs(
        &scenario(RecommenderKind::Fof, 50, 200, HORIZON),
        RunMode::Intervened,
    );
    let (f_long, f_total) = (
        longi(&fof),
        effect(&fof, &nat, "clustering_global", HORIZON),
    );
    let fof_ok = f_long / f_total > 1.5;
    parts.push(format!(
        "fof clustering longitudinal {f_long:+.4} vs total {f_total:+.4} (ratio {:.2}) {fof_ok}",
        f_long / f_total
    ));
    let lat = runs.trajs(&base, RunMode::Intervened);
    let (l_long, l_total) = (
        longi(&lat),
        effect(&lat, &nat, "clustering_global", HORIZON),
    );
    let lat_ok = l_long * l_total < 0.0;
    parts.push(format!(
        "latent clustering longitudinal {l_long:+.4} vs total {l_total:+.4} opposite sign {lat_ok}"
    ));

    let mut algorithmic = 0;
    let mut orphans = 0;
    for ab in [
        AbConfig::default(),
        AbConfig {
            scheme: AbScheme::ByCommunity,
            treated_group: 0,
            ..AbConfig::default()
        },
    ] {
        let s = scenario(RecommenderKind::Latent, 20, 80, 100);
        for seed in 0..2 {
            let out = simulate(&s, RunMode::Ab, seed, Some(&ab)).unwrap();
            for ev in out.graph.ledger() {
                if let LedgerEvent::EdgeAdded(e) = ev {
                    if e.provenance == Provenance::Algorithmic {
                        algorithmic += 1;
                        let treated = |x: NodeId| out.arms[x.index()] == Arm::Treatment;
                        orphans += usize::from(!(treated(e.u) || treated(e.v)));
                    }
                }
            }
        }
    }
    let audit_ok = algorithmic > 0 && orphans == 0;
    parts.push(format!(
        "ab audit {algorithmic} algorithmic edges, {orphans} without treatment endpoint"
    ));
    let fixture_ok = ab_fixture_oracle();
    parts.push(format!("ab fixture exact {fixture_ok}"));
    Verdict {
        name: "evaluation biases",
        pass: fof_ok && lat_ok && audit_ok && fixture_ok,
        detail: parts.join("; "),
    }
}

fn beta_sweep(runs: &mut Runs) -> Verdict {
    let mut hs = Vec::new();
    for beta in [2.0, 4.0, 10.0] {
        let mut s = scenario(RecommenderKind::Latent, 50, 200, HORIZON);
        s.recommender.beta = beta;
        hs.push(mean_at(
            &runs.trajs(&s, RunMode::Intervened),
            "homophily",
            200,
        ));
    }
    let monotone = hs.windows(2).all(|w| w[0] <= w[1]);
    let short = |kind| scenario(kind, 50, 200, 200);
    let aa = mean_at(
        &runs.trajs(&short(RecommenderKind::AdamicAdar), RunMode::Intervened),
        "clustering_global",
        200,
    );
    let fof = mean_at(
        &runs.trajs(&short(RecommenderKind::Fof), RunMode::Intervened),
        "clustering_global",
        200,
    );
    Verdict {
        name: "beta sweep and adamic-adar",
        pass: monotone && aa > fof,
        detail: format!(
            "homophily@200 beta 2/4/10: {:.4}/{:.4}/{:.4} nondecreasing {monotone}; clustering@200 adamic-adar {aa:.4} vs fof {fof:.4}",
            hs[0], hs[1], hs[2]
        ),
    }
}

fn group_structure(runs: &mut Runs) -> Verdict {
    let std = 0.05_f64.sqrt();
    let mut maj = scenario(RecommenderKind::Fof, 50, 200, 200);
    maj.communities = vec![
        CommunitySpec {
            prevalence: 0.6,
            mean: vec![0.0, 1.0],
            std,
        },
        CommunitySpec {
            prevalence: 0.4,
            mean: vec![1.2, 1.0],
            std,
        },
    ];
    let nat = runs.trajs(&maj, RunMode::Natural);
    let fof = runs.trajs(&maj, RunMode::Intervened);
    let d_major = effect(&fof, &nat, "homophily_g0", 200);
    let d_minor = effect(&fof, &nat, "homophily_g1", 200);
    let majority_ok = d_major > 0.0 && d_minor < 0.0;

    let mut hetero = Vec::new();
    for var in [0.1_f64, 0.01] {
        let mut s = scenario(RecommenderKind::Latent, 50, 200, 200);
        s.communities = baseline_communities();
        for c in &mut s.communities {
            c.std = var.sqrt();
        }
        let nat = runs.trajs(&s, RunMode::Natural);
        let lat = runs.trajs(&s, RunMode::Intervened);
        hetero.push(effect(&lat, &nat, "clustering_global", 200));
    }
    let hetero_ok = hetero[0] > 0.0 && hetero[1] < 0.0;
    Verdict {
        name: "group structure",
        pass: majority_ok && hetero_ok,
        detail: format!(
            "fof effect on majority H {d_major:+.4}, minority H {d_minor:+.4} ({majority_ok}); latent clustering effect var 0.1 {:+.4}, var 0.01 {:+.4} ({hetero_ok})",
            hetero[0], hetero[1]
        ),
    }
}

fn main() {
    let started = Instant::now();
    let mut runs = Runs::default();
    let verdicts = [
        oracles(),
        determinism(),
        initialization(&mut runs),
        delayed_signs(&mut runs),
        indirect(&mut runs),
        rewiring(&mut runs),
        evaluation_biases(&mut runs),
        beta_sweep(&mut runs),
        group_structure(&mut runs),
    ];
    let mut failed = 0;
    for v in &verdicts {
        println!(
            "{} | {} | {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {} failed ({} trajectories cached, {:.0?})",
        verdicts.len() - failed,
        failed,
        runs.cache.values().map(Vec::len).sum::<usize>(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
