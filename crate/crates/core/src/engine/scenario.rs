//! Experiment configuration.

use serde::{Deserialize, Serialize};

use crate::behavior::BehaviorSpec;
use crate::dynamics::{
    calibrate_sigmoid, calibration_sample, CommunitySpec, GrowthParams, HazardParams, Sigmoid,
};
use crate::error::{Error, Result};
use crate::metrics::GlobalClustering;
use crate::recommend::RecommenderSpec;
use crate::rng::{substream, Stream};

/// Closed interval of timesteps during which recommendations run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct InterventionWindow {
    pub t_lo: u32,
    pub t_hi: u32,
}

impl InterventionWindow {
    pub fn new(t_lo: u32, t_hi: u32) -> Self {
        InterventionWindow { t_lo, t_hi }
    }

    pub fn contains(&self, t: u32) -> bool {
        self.t_lo <= t && t <= self.t_hi
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.t_lo, self.t_hi)
    }

    fn validate(&self, key: &str, horizon: u32) -> Result<()> {
        if self.t_lo > self.t_hi || self.t_hi > horizon {
            return Err(Error::config(
                key,
                format!(
                    "need 0 <= t_lo <= t_hi <= horizon ({horizon}), got [{}, {}]",
                    self.t_lo, self.t_hi
                ),
            ));
        }
        Ok(())
    }
}

impl From<[u32; 2]> for InterventionWindow {
    fn from(w: [u32; 2]) -> Self {
        InterventionWindow::new(w[0], w[1])
    }
}

impl From<InterventionWindow> for [u32; 2] {
    fn from(w: InterventionWindow) -> Self {
        [w.t_lo, w.t_hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// No recommendations.
    Natural,
    /// Every node receives recommendations inside the window.
    Intervened,
    /// Like `Intervened`, but meeting friends only follows algorithm-free
    /// 2-paths.
    Unmediated,
    /// Only treatment-arm nodes receive recommendations.
    Ab,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Natural => "natural",
            RunMode::Intervened => "intervened",
            RunMode::Unmediated => "unmediated",
            RunMode::Ab => "ab",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SigmoidConfig {
    /// Slope of the logistic link.
    pub a: f64,
    /// Mean link probability the offset is calibrated to.
    pub target_mean: f64,
    /// Explicit offset; skips calibration when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub calibration_samples: usize,
    pub calibration_seed: u64,
}

impl Default for SigmoidConfig {
    fn default() -> Self {
        SigmoidConfig {
            a: 1.5,
            target_mean: 0.05,
            b: None,
            calibration_samples: 10_000,
            calibration_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitParams {
    pub n_per_group: usize,
    pub p_closure: f64,
}

impl Default for InitParams {
    fn default() -> Self {
        InitParams {
            n_per_group: 50,
            p_closure: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbScheme {
    /// Each node is treated independently with probability `p`.
    RandomNode,
    /// Nodes of `treated_group` are treated, everyone else is control.
    ByCommunity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbConfig {
    pub scheme: AbScheme,
    pub p: f64,
    pub treated_group: usize,
}

impl Default for AbConfig {
    fn default() -> Self {
        AbConfig {
            scheme: AbScheme::RandomNode,
            p: 0.5,
            treated_group: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub global_clustering: GlobalClustering,
}

fn default_seeds() -> usize {
    5
}

fn default_modes() -> Vec<RunMode> {
    vec![RunMode::Natural, RunMode::Intervened]
}

/// Two equally sized groups with orthogonal embedding means and embedding
/// variance 0.05.
pub fn baseline_communities() -> Vec<CommunitySpec> {
    let std = 0.05_f64.sqrt();
    vec![
        CommunitySpec {
            prevalence: 0.5,
            mean: vec![0.0, 1.0],
            std,
        },
        CommunitySpec {
            prevalence: 0.5,
            mean: vec![1.0, 0.0],
            std,
        },
    ]
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub horizon: u32,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<RunMode>,
    /// Intervention window; defaults to `[50, 200]` clipped to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<InterventionWindow>,
    /// Windows iterated by a sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<InterventionWindow>,
    #[serde(default = "baseline_communities")]
    pub communities: Vec<CommunitySpec>,
    #[serde(default)]
    pub growth: GrowthParams,
    #[serde(default)]
    pub sigmoid: SigmoidConfig,
    #[serde(default)]
    pub hazard: HazardParams,
    #[serde(default)]
    pub init: InitParams,
    #[serde(default)]
    pub recommender: RecommenderSpec,
    #[serde(default)]
    pub behavior: BehaviorSpec,
    #[serde(default)]
    pub ab: AbConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl Scenario {
    /// Baseline two-community setup with every optional field at its default.
    pub fn baseline(horizon: u32) -> Self {
        Scenario {
            horizon,
            seeds: default_seeds(),
            modes: default_modes(),
            window: None,
            windows: Vec::new(),
            communities: baseline_communities(),
            growth: GrowthParams::default(),
            sigmoid: SigmoidConfig::default(),
            hazard: HazardParams::default(),
            init: InitParams::default(),
            recommender: RecommenderSpec::default(),
            behavior: BehaviorSpec::default(),
            ab: AbConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }

    pub fn with_window(mut self, t_lo: u32, t_hi: u32) -> Self {
        self.window = Some(InterventionWindow::new(t_lo, t_hi));
        self
    }

    pub fn window(&self) -> InterventionWindow {
        self.window
            .unwrap_or_else(|| InterventionWindow::new(50.min(self.horizon), 200.min(self.horizon)))
    }

    pub fn n_groups(&self) -> usize {
        self.communities.len()
    }

    pub fn dim(&self) -> usize {
        self.communities.first().map_or(0, |c| c.mean.len())
    }

    /// Checks every field; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        if self.seeds == 0 {
            return Err(Error::config("seeds", "must be >= 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes", "at least one run mode is required"));
        }
        if let Some(w) = &self.window {
            w.validate("window", self.horizon)?;
        }
        for w in &self.windows {
            w.validate("windows", self.horizon)?;
        }
        self.validate_communities()?;
        let g = &self.growth;
        unit_interval("growth.p_friend", g.p_friend)?;
        let s = &self.sigmoid;
        if !s.a.is_finite() {
            return Err(Error::config("sigmoid.a", "must be finite"));
        }
        if !(s.target_mean > 0.0 && s.target_mean < 1.0) {
            return Err(Error::config("sigmoid.target_mean", "must lie in (0, 1)"));
        }
        if s.b.is_some_and(|b| !b.is_finite()) {
            return Err(Error::config("sigmoid.b", "must be finite"));
        }
        if s.b.is_none() && s.calibration_samples == 0 {
            return Err(Error::config("sigmoid.calibration_samples", "must be >= 1"));
        }
        let h = &self.hazard;
        for (key, v) in [("hazard.c", h.c), ("hazard.d", h.d), ("hazard.k", h.k)] {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        unit_interval("init.p_closure", self.init.p_closure)?;
        self.recommender.validate()?;
        self.behavior.validate()?;
        unit_interval("ab.p", self.ab.p)?;
        if self.ab.scheme == AbScheme::ByCommunity && self.ab.treated_group >= self.n_groups() {
            return Err(Error::config(
                "ab.treated_group",
                format!(
                    "group {} does not exist ({} communities)",
                    self.ab.treated_group,
                    self.n_groups()
                ),
            ));
        }
        Ok(())
    }

    fn validate_communities(&self) -> Result<()> {
        let key = "communities";
        let Some(first) = self.communities.first() else {
            return Err(Error::config(key, "at least one community is required"));
        };
        let dim = first.mean.len();
        if dim == 0 {
            return Err(Error::config(key, "embedding dimension must be >= 1"));
        }
        let mut total = 0.0;
        for (k, c) in self.communities.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(Error::config(
                    key,
                    format!(
                        "community {k} has dimension {}, expected {dim}",
                        c.mean.len()
                    ),
                ));
            }
            if !(0.0..=1.0).contains(&c.prevalence) {
                return Err(Error::config(
                    key,
                    format!("community {k} prevalence outside [0, 1]"),
                ));
            }
            if !(c.std >= 0.0 && c.std.is_finite()) {
                return Err(Error::config(
                    key,
                    format!("community {k} std must be finite and >= 0"),
                ));
            }
            if c.mean.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(
                    key,
                    format!("community {k} mean must be finite"),
                ));
            }
            total += c.prevalence;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                key,
                format!("prevalences sum to {total}, expected 1"),
            ));
        }
        Ok(())
    }

    /// Link sigmoid for this scenario: the explicit offset if configured,
    /// otherwise the offset calibrated on a fixed inner-product sample.
    pub fn sigmoid(&self) -> Result<Sigmoid> {
        let s = &self.sigmoid;
        if let Some(b) = s.b {
            return Ok(Sigmoid { a: s.a, b });
        }
        let mut rng = substream(s.calibration_seed, Stream::Calibration);
        let sample = calibration_sample(&self.communities, s.calibration_samples, &mut rng);
        calibrate_sigmoid(s.target_mean, &sample, s.a)
    }
}

fn unit_interval(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in [0, 1], got {v}")))
    }
}
