//! Distances between preference structures.
//!
//! Complete orders are compared exactly with Spearman's footrule, the
//! Euclidean distance between height vectors, and the probabilistic distance
//! (the fraction of outcome pairs the two orders rank differently). Utility
//! functions are compared through 0–1 representatives or by Monte Carlo over
//! pairs of random prospects. Partial orders are compared by averaging over
//! their linear extensions, sampled with the Bubley–Dyer chain when they are
//! too many to enumerate. A small case-base layer runs simulated incremental
//! elicitation against a population of stored structures.

pub mod casebase;
pub mod complete;
pub mod error;
pub mod estimate;
pub mod linext;
pub mod orders;
pub mod partial_metrics;
pub mod rng;
pub mod space;
pub mod utility;
pub mod verify;

pub use error::{Error, Result};
pub use orders::{
    is_extension, HeightProfile, LinearExtension, OrderBuilder, PartialPreferenceOrder,
    PreferenceOrder, Relation, WeakOrder,
};
pub use space::OutcomeSpace;
pub use complete::MetricKind;
pub use estimate::{DistanceEstimate, EstimationConfig};
