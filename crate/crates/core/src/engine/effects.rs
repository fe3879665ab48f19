//! Counterfactual effects and the longitudinal estimator.
//!
//! All functions take seed-matched trajectories and return `None` whenever
//! a metric they need is undefined.

use crate::engine::aggregate::{ci95, Band};
use crate::engine::simulate::Trajectory;
use crate::error::{Error, Result};

/// `m(rec, T) - m(nat, T)`.
pub fn total_effect(rec: &Trajectory, nat: &Trajectory, metric: &str, t: u32) -> Option<f64> {
    Some(rec.value(metric, t)? - nat.value(metric, t)?)
}

/// `Effect_T - Effect_{t_hi}`.
pub fn delayed_effect(
    rec: &Trajectory,
    nat: &Trajectory,
    metric: &str,
    t: u32,
    t_hi: u32,
) -> Option<f64> {
    Some(total_effect(rec, nat, metric, t)? - total_effect(rec, nat, metric, t_hi)?)
}

/// `(direct, indirect)`, with direct `m(unmediated, T) - m(nat, T)` and
/// indirect the remainder of the total effect.
pub fn decompose_effects(
    rec: &Trajectory,
    unmediated: &Trajectory,
    nat: &Trajectory,
    metric: &str,
    t: u32,
) -> Option<(f64, f64)> {
    let total = total_effect(rec, nat, metric, t)?;
    let direct = unmediated.value(metric, t)? - nat.value(metric, t)?;
    Some((direct, total - direct))
}

/// Before/after difference `m(rec, T) - m(rec, t_lo)`.
pub fn longitudinal_estimate(rec: &Trajectory, metric: &str, t_lo: u32, t: u32) -> Option<f64> {
    Some(rec.value(metric, t)? - rec.value(metric, t_lo)?)
}

/// Longitudinal estimate minus the counterfactual total effect.
pub fn longitudinal_bias(
    rec: &Trajectory,
    nat: &Trajectory,
    metric: &str,
    t_lo: u32,
    t: u32,
) -> Option<f64> {
    Some(longitudinal_estimate(rec, metric, t_lo, t)? - total_effect(rec, nat, metric, t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayedClass {
    /// CI of the delayed effect contains zero.
    Persistent,
    /// The effect moved back toward zero after the window.
    Diminishing,
    /// The effect kept growing in its original direction.
    Amplifying,
}

impl DelayedClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DelayedClass::Persistent => "persistent",
            DelayedClass::Diminishing => "diminishing",
            DelayedClass::Amplifying => "amplifying",
        }
    }
}

/// Classifies a delayed effect against the effect at the window's end.
pub fn classify_delayed(delayed: &Band, effect_at_hi: f64) -> DelayedClass {
    if delayed.contains(0.0) {
        DelayedClass::Persistent
    } else if delayed.mean * effect_at_hi < 0.0 {
        DelayedClass::Diminishing
    } else {
        DelayedClass::Amplifying
    }
}

/// Seed-aggregated effects of one metric at one horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectRow {
    pub metric: String,
    pub t: u32,
    pub total: Option<Band>,
    /// Defined for `T >= t_hi`.
    pub delayed: Option<Band>,
    pub direct: Option<Band>,
    pub indirect: Option<Band>,
    /// Defined for `T >= t_lo`.
    pub longitudinal: Option<Band>,
    pub longitudinal_bias: Option<Band>,
    pub delayed_class: Option<DelayedClass>,
}

impl EffectRow {
    /// Components in CSV column order.
    pub fn components(&self) -> [(&'static str, Option<Band>); 6] {
        [
            ("total", self.total),
            ("delayed", self.delayed),
            ("direct", self.direct),
            ("indirect", self.indirect),
            ("longitudinal", self.longitudinal),
            ("longitudinal_bias", self.longitudinal_bias),
        ]
    }
}

/// Seed-matched trajectory sets for one scenario.
#[derive(Debug, Clone, Copy)]
pub struct EffectInputs<'a> {
    pub natural: &'a [Trajectory],
    pub intervened: &'a [Trajectory],
    /// Empty when the unmediated counterfactual was not run.
    pub unmediated: &'a [Trajectory],
    pub t_lo: u32,
    pub t_hi: u32,
}

/// Effect rows for every metric and every `T` in `0..=horizon`.
pub fn effect_report(inputs: EffectInputs<'_>) -> Result<Vec<EffectRow>> {
    let EffectInputs {
        natural,
        intervened,
        unmediated,
        t_lo,
        t_hi,
    } = inputs;
    if natural.is_empty() || natural.len() != intervened.len() {
        return Err(Error::Invalid(
            "effects need equally many natural and intervened trajectories".into(),
        ));
    }
    if !unmediated.is_empty() && unmediated.len() != natural.len() {
        return Err(Error::Invalid(
            "unmediated trajectories must match the natural ones seed for seed".into(),
        ));
    }
    let pairs: Vec<(&Trajectory, &Trajectory)> = intervened.iter().zip(natural).collect();
    if pairs.iter().any(|(r, n)| r.seed != n.seed) {
        return Err(Error::Invalid("trajectories are not seed-matched".into()));
    }
    let horizon = pairs
        .iter()
        .map(|(r, n)| r.horizon().min(n.horizon()))
        .min()
        .unwrap_or(0);
    let metrics: Vec<String> = natural[0].rows[0]
        .entries()
        .into_iter()
        .map(|(n, _)| n)
        .collect();

    let mut out = Vec::with_capacity(metrics.len() * (horizon as usize + 1));
    for m in &metrics {
        for t in 0..=horizon {
            let total = ci95(pairs.iter().map(|(r, n)| total_effect(r, n, m, t)));
            let delayed = if t >= t_hi {
                ci95(pairs.iter().map(|(r, n)| delayed_effect(r, n, m, t, t_hi)))
            } else {
                None
            };
            let split: Vec<Option<(f64, f64)>> = pairs
                .iter()
                .zip(unmediated)
                .map(|((r, n), u)| decompose_effects(r, u, n, m, t))
                .collect();
            let (direct, indirect) = if unmediated.is_empty() {
                (None, None)
            } else {
                (
                    ci95(split.iter().map(|d| d.map(|x| x.0))),
                    ci95(split.iter().map(|d| d.map(|x| x.1))),
                )
            };
            let (longitudinal, longitudinal_bias) = if t >= t_lo {
                (
                    ci95(
                        pairs
                            .iter()
                            .map(|(r, _)| longitudinal_estimate(r, m, t_lo, t)),
                    ),
                    ci95(
                        pairs
                            .iter()
                            .map(|(r, n)| longitudinal_bias(r, n, m, t_lo, t)),
                    ),
                )
            } else {
                (None, None)
            };
            let at_hi = ci95(pairs.iter().map(|(r, n)| total_effect(r, n, m, t_hi)));
            let delayed_class = match (delayed, at_hi) {
                (Some(d), Some(h)) if t > t_hi => Some(classify_delayed(&d, h.mean)),
                _ => None,
            };
            out.push(EffectRow {
                metric: m.clone(),
                t,
                total,
                delayed,
                direct,
                indirect,
                longitudinal,
                longitudinal_bias,
                delayed_class,
            });
        }
    }
    Ok(out)
}
