//! Empirical lower bounds on `‖H‖_{L^q(ν′) → L^p(ν)}`.
//!
//! Every value produced here is the norm ratio of an explicit witness (up to
//! quadrature error), so it can only undershoot the true operator norm.

mod divergence;
mod families;
mod matrix;
mod shells;

pub use divergence::{divergence_probe, DivergenceReport};
pub use families::{check_family, empirical_norm_continuous, TestFamily};
pub use matrix::{
    ascent_norm, empirical_norm_between, empirical_norm_discrete, empirical_norm_matrix, norm_1, norm_inf,
    spectral_norm, weighted_matrix, AscentOptions,
};
pub use shells::shell_estimate;

/// A lower bound together with the witness that attains it: a vector for
/// matrix norms, family parameters for continuous test families.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub witness: Vec<f64>,
    pub label: String,
    /// True when the value is a closed form or converged iteration rather
    /// than the best point found by a search.
    pub exact: bool,
}

impl LowerBound {
    pub fn exact(value: f64, witness: Vec<f64>, label: impl Into<String>) -> Self {
        Self {
            value,
            witness,
            label: label.into(),
            exact: true,
        }
    }

    pub fn approximate(value: f64, witness: Vec<f64>, label: impl Into<String>) -> Self {
        Self {
            value,
            witness,
            label: label.into(),
            exact: false,
        }
    }
}
