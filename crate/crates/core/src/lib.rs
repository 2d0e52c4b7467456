//! Exact SHAP scores by reduction to model-expectation oracles, plus a
//! laboratory for the counting reductions that make the general problem hard:
//! empirical-distribution/PP2CNF equivalences, number-partitioning gadgets,
//! and a cover-averaging audit for the recursive tree value function.

pub mod dist;
pub mod empirical_shap;
pub mod engine;
pub mod error;
pub mod extfloat;
pub mod linalg;
pub mod model;
pub mod num;

pub use error::{Error, Result};

/// Size limits for the deliberately exponential paths. They guard against
/// accidental 2^n blowups, not against patient users.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Feature cap for brute-force expectation enumeration (logistic, CNF,
    /// reference oracles).
    pub brute_force_features: usize,
    /// Feature cap for the n!-enumeration SHAP oracle.
    pub permutation_features: usize,
    /// Feature cap for the 2^n-subset SHAP oracle and empirical direct path.
    pub subset_features: usize,
    /// Column cap for subset-polynomial enumeration (PP2CNF expectations).
    pub subset_polynomial_cols: usize,
    /// Dimension cap (rows and columns) for the SHAP-oracle side of the
    /// reverse PP2CNF reduction.
    pub reverse_reduction_dim: usize,
    /// Feature cap for the condition-set sweep in the tree audit.
    pub audit_features: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            brute_force_features: 25,
            permutation_features: 8,
            subset_features: 20,
            subset_polynomial_cols: 24,
            reverse_reduction_dim: 8,
            audit_features: 16,
        }
    }
}
