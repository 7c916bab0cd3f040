//! Condenser p-capacities: closed forms, the variational estimator and
//! fatness diagnostics.

mod condenser;
mod fatness;
mod formulas;

pub use condenser::{
    cap_estimate_variational, CapacityEstimate, CapacityRecord, CondenserProblem, GridRecord, DEFAULT_TOLERANCE,
};
pub use fatness::{fatness_ratio, q_fatness_ratios, FatnessReport};
pub use formulas::{
    cap_ball_annulus, delta_ratio, kappa_n, kappa_n_composite, omega_n, segment_capacity_lower_bound,
};
