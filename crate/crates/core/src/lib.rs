//! p-negative type, negative type gaps and additive combinations of finite
//! semi-metric spaces.

pub mod bounds;
pub mod cli;
pub mod combine;
pub mod error;
pub mod gap;
pub mod io;
mod linalg;
pub mod oracle;
pub mod scalar;
pub mod simplex;
pub mod space;
pub mod verdict;

pub use bounds::{c_of_n, lower_bound_combined, lower_bound_direct, scaled_diameter, BoundKind, BoundReport};
pub use combine::{build_combination, compose_gaps, extremal_simplex, simplex_components, tree_gap, CombinationSpace, Component, GluePlan, GlueStep};
pub use error::{Error, Result};
pub use gap::{gap, GapMethod, GapOptions, GapResult};
pub use oracle::gap_oracle;
pub use scalar::Scalar;
pub use simplex::{gamma, RefinedSimplex, Team, WeightedSimplex};
pub use space::{SemiMetricSpace, WeightedGraph};
pub use verdict::{has_negative_type, supremal_p, Supremal, TypeVerdict};
