//! Simulation of social-network growth under link-recommendation
//! interventions, with counterfactual effect estimation.

pub mod behavior;
pub mod bits;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod recommend;
pub mod rng;

pub use behavior::{AcceptanceKind, BehaviorSpec, RewireScope};
pub use config::{parse_config, to_toml};
pub use dynamics::{CommunitySpec, GrowthParams, HazardParams, MediationMode, Sigmoid};
pub use engine::*;
pub use error::{Error, Result};
pub use graph::{Edge, EdgeFilter, Graph, LedgerEvent, Node, NodeId, Provenance, RemovalReason};
pub use metrics::{GlobalClustering, MetricRow};
pub use recommend::{RecommenderKind, RecommenderSpec};
