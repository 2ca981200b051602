//! Binary-opinion consensus games on multiplex social networks.
//!
//! Agents sit on several network layers over the same population and update
//! a binary opinion with the external-majority rule. Two interaction
//! protocols are provided: *context permeability*, where each step draws a
//! partner from a random layer, and *context switching*, where each agent is
//! active in one layer at a time and migrates between layers with a
//! per-layer probability.
//!
//! - [`network`]: ring lattices, preferential attachment, relabelling, merging.
//! - [`metrics`]: path length, clustering, Spearman correlation.
//! - [`engine`]: agents, the update rule and the run loop.
//! - [`experiment`]: seeded sweeps, aggregation and structure correlation.
//! - [`report`]: CSV formats.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod report;
pub mod seed;

pub use engine::{
    em_update, init_run, run_simulation, Agent, Memory, Opinion, OpinionInit, Protocol, RunResult,
    SeriesRecord, SimConfig, SimState, SocialSpace,
};
pub use error::{Error, Result};
pub use experiment::{
    correlate_structure_convergence, network_property_sweep, run_sweep, run_sweep_recording,
    CellConfig, CellStats, NetworkMode, SweepResult, SweepSpec, TopologyPlan, ZetaGrid,
};
pub use metrics::{
    average_path_length, clustering_coefficient, spearman, CorrelationReport, GraphProperties,
    LowDegreeRule,
};
pub use network::{
    generate_k_regular, generate_scale_free, merge_graphs, shuffle_labels, Graph, KRegularParams,
    LayerTopology, ScaleFreeParams,
};
