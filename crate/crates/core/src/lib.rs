//! Generalized Ehrenfest chain for a genome of `N` binary sites.
//!
//! At each step one site is picked uniformly; a 0 flips to 1 with
//! probability `p_up` and a 1 flips to 0 with probability `p_down`. The
//! crate covers the counting chain (number of ones), the spatial chain
//! (the full configuration), their exact stationary and transient laws,
//! and seeded Monte Carlo estimators that check the exact results.

pub mod chain;
pub mod cli;
pub mod error;
pub mod exact;
pub mod monte_carlo;
pub mod output;

pub use chain::{
    count_ones, step_count, step_spatial, transition_probs, ChainParams, CountState, GenomeConfig,
    RandomSource, TransitionTriple,
};
pub use error::{Error, Result};
pub use exact::{DistributionVector, LogProbability, ReturnTime};
pub use monte_carlo::{EstimateWithCI, OccupancyHistogram, SpatialMarginals};
