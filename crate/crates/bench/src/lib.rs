//! Fixtures shared by the benchmarks.

use linkdyn_core::{simulate, Graph, RunMode, Scenario};

/// Baseline scenario with a short horizon.
pub fn scenario(horizon: u32) -> Scenario {
    Scenario::baseline(horizon).with_window(horizon.min(10), horizon)
}

/// Graph after `steps` steps of natural growth.
pub fn grown_graph(steps: u32, seed: u64) -> Graph {
    simulate(&scenario(steps), RunMode::Natural, seed, None)
        .expect("baseline scenario is valid")
        .graph
}
