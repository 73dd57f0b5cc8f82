//! Bounds on entanglement from the distance between a Bell behavior and the
//! local polytope.

pub mod bounds;
pub mod divergence;
pub mod error;
pub mod inequality;
pub mod presets;
pub mod quantum;
pub mod reproduce;
pub mod scenario;

pub use bounds::{
    chsh_refined_bounds, theorem1_bounds, theorem2_bounds, two_qubit_concurrence_bound, BoundEntry,
    BoundMethod, BoundReport, MeasureKind,
};
pub use divergence::{
    aggregate_distance, distance_to_local, distance_to_restricted_local, divergence,
    DistanceOptions, DistanceResult, DivergenceKind,
};
pub use error::{Error, Result};
pub use inequality::{
    alpha_normalizer, classical_bound, evaluate, normalized_violation, BellFunctional,
    ViolationReport,
};
pub use quantum::{behavior_from_quantum, ghz_mabk_behavior, DensityMatrix, MeasurementAssemblage};
pub use scenario::{Behavior, DeterministicStrategy, Scenario};
