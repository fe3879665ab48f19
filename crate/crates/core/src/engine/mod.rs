//! Trajectory simulation, counterfactual effects and A/B estimators.

pub mod aggregate;
pub mod arms;
pub mod effects;
pub mod scenario;
pub mod simulate;

pub use aggregate::{aggregate, ci95, Aggregate, Band};
pub use arms::{ab_estimate, arm_metrics, AbEstimate, AbMetric, Adjustment, Arm, ArmRow};
pub use effects::{
    classify_delayed, decompose_effects, delayed_effect, effect_report, longitudinal_bias,
    longitudinal_estimate, total_effect, DelayedClass, EffectInputs, EffectRow,
};
pub use scenario::{AbConfig, AbScheme, InterventionWindow, RunMode, Scenario};
pub use simulate::{
    ab_run, run_trajectory, seeds, simulate, AcceptanceEvent, LedgerSummary, RunOutput, Trajectory,
};
