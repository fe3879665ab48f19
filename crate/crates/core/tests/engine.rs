use linkdyn_core::{
    ab_run, decompose_effects, delayed_effect, effect_report, run_trajectory, simulate,
    total_effect, AbConfig, AbScheme, Arm, EffectInputs, Provenance, RecommenderKind, RunMode,
    Scenario, Trajectory,
};

fn small(kind: RecommenderKind) -> Scenario {
    let mut s = Scenario::baseline(40).with_window(10, 25);
    s.recommender.kind = kind;
    s.seeds = 2;
    s
}

fn run(s: &Scenario, mode: RunMode, seed: u64) -> Trajectory {
    run_trajectory(s, mode, seed).unwrap()
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    for kind in [
        RecommenderKind::Fof,
        RecommenderKind::Latent,
        RecommenderKind::AdamicAdar,
    ] {
        let s = small(kind);
        assert_eq!(
            run(&s, RunMode::Intervened, 3),
            run(&s, RunMode::Intervened, 3)
        );
    }
    let s = small(RecommenderKind::Fof);
    assert_ne!(
        run(&s, RunMode::Natural, 3).rows,
        run(&s, RunMode::Natural, 4).rows
    );
}

#[test]
fn natural_runs_have_no_algorithmic_or_mediated_edges() {
    let s = small(RecommenderKind::Latent);
    let tr = run(&s, RunMode::Natural, 1);
    for l in &tr.ledger {
        assert_eq!(l.alive(Provenance::Algorithmic), 0);
        assert_eq!(l.alive(Provenance::FriendMediated), 0);
    }
}

#[test]
fn unmediated_runs_have_no_mediated_edges() {
    let s = small(RecommenderKind::Fof);
    let tr = run(&s, RunMode::Unmediated, 1);
    assert!(tr
        .ledger
        .iter()
        .any(|l| l.alive(Provenance::Algorithmic) > 0));
    for l in &tr.ledger {
        assert_eq!(l.alive(Provenance::FriendMediated), 0);
    }
    let rec = run(&s, RunMode::Intervened, 1);
    assert!(rec.ledger.last().unwrap().alive(Provenance::FriendMediated) > 0);
}

#[test]
fn zero_acceptance_reproduces_natural_growth() {
    let mut s = small(RecommenderKind::Latent);
    s.behavior.p = 0.0;
    let nat = run(&s, RunMode::Natural, 2);
    assert_eq!(run(&s, RunMode::Intervened, 2).rows, nat.rows);
    let s = s.with_window(0, 0);
    assert_eq!(run(&s, RunMode::Intervened, 2).rows, nat.rows);
}

#[test]
fn pre_window_prefix_matches_natural() {
    let s = small(RecommenderKind::Fof);
    let nat = run(&s, RunMode::Natural, 5);
    let rec = run(&s, RunMode::Intervened, 5);
    let t_lo = s.window().t_lo as usize;
    assert_eq!(rec.rows[..t_lo], nat.rows[..t_lo]);
    assert_ne!(rec.rows[t_lo], nat.rows[t_lo]);
}

#[test]
fn ab_extremes_match_full_and_no_treatment() {
    let s = small(RecommenderKind::Fof);
    let all = AbConfig {
        scheme: AbScheme::RandomNode,
        p: 1.0,
        treated_group: 0,
    };
    let none = AbConfig {
        p: 0.0,
        ..all.clone()
    };
    assert_eq!(
        ab_run(&s, &all, 7).unwrap().rows,
        run(&s, RunMode::Intervened, 7).rows
    );
    assert_eq!(
        ab_run(&s, &none, 7).unwrap().rows,
        run(&s, RunMode::Natural, 7).rows
    );
}

#[test]
fn ab_algorithmic_edges_touch_treatment() {
    let s = small(RecommenderKind::Latent);
    let cfg = AbConfig {
        scheme: AbScheme::ByCommunity,
        p: 0.5,
        treated_group: 1,
    };
    let out = simulate(&s, RunMode::Ab, 0, Some(&cfg)).unwrap();
    let mut seen = 0;
    for e in out
        .graph
        .edges()
        .filter(|e| e.provenance == Provenance::Algorithmic)
    {
        seen += 1;
        assert!(out.arms[e.u.index()] == Arm::Treatment || out.arms[e.v.index()] == Arm::Treatment);
    }
    assert!(seen > 0);
    for (node, arm) in out.graph.nodes().iter().zip(&out.arms) {
        assert_eq!(*arm == Arm::Treatment, node.group == 1);
    }
}

#[test]
fn rewiring_keeps_degree_of_accepting_node() {
    let mut s = small(RecommenderKind::Fof);
    s.behavior.rewire = true;
    let out = simulate(&s, RunMode::Intervened, 0, None).unwrap();
    assert!(!out.acceptances.is_empty());
    for a in out.acceptances.iter().filter(|a| a.degree_before >= 1) {
        assert!(a.rewired);
        assert_eq!(a.degree_after, a.degree_before, "{a:?}");
    }
    assert!(out.trajectory.ledger.iter().any(|l| l.rewired > 0));
}

#[test]
fn effect_identities_hold_on_simulated_runs() {
    let s = small(RecommenderKind::Latent);
    let nat: Vec<_> = (0..2).map(|k| run(&s, RunMode::Natural, k)).collect();
    let rec: Vec<_> = (0..2).map(|k| run(&s, RunMode::Intervened, k)).collect();
    let unm: Vec<_> = (0..2).map(|k| run(&s, RunMode::Unmediated, k)).collect();
    let w = s.window();
    for k in 0..2 {
        for t in 0..=s.horizon {
            let total = total_effect(&rec[k], &nat[k], "gini_global", t).unwrap();
            let (direct, indirect) =
                decompose_effects(&rec[k], &unm[k], &nat[k], "gini_global", t).unwrap();
            assert!((direct + indirect - total).abs() < 1e-12);
            let delayed = delayed_effect(&rec[k], &nat[k], "gini_global", t, w.t_hi).unwrap();
            if t == w.t_hi {
                assert_eq!(delayed, 0.0);
            }
        }
        let self_split = decompose_effects(&rec[k], &rec[k], &nat[k], "homophily", 30).unwrap();
        assert_eq!(self_split.1, 0.0);
    }
    let rows = effect_report(EffectInputs {
        natural: &nat,
        intervened: &rec,
        unmediated: &unm,
        t_lo: w.t_lo,
        t_hi: w.t_hi,
    })
    .unwrap();
    for r in rows.iter().filter(|r| r.t < w.t_lo) {
        if let Some(b) = r.total {
            assert_eq!(b.mean, 0.0, "{} at {}", r.metric, r.t);
        }
    }
    assert!(rows
        .iter()
        .any(|r| r.metric == "clustering_global" && r.t == s.horizon));
}

#[test]
fn effect_report_requires_matched_seeds() {
    let s = small(RecommenderKind::Fof);
    let nat = vec![run(&s, RunMode::Natural, 0)];
    let rec = vec![run(&s, RunMode::Intervened, 1)];
    let res = effect_report(EffectInputs {
        natural: &nat,
        intervened: &rec,
        unmediated: &[],
        t_lo: 10,
        t_hi: 25,
    });
    assert!(res.is_err());
}
