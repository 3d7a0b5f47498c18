//! Budgeted combinatorial optimization over exact rational arithmetic.
//!
//! The crate solves maximization problems of the form: pick a solution `S`
//! from a ground structure (independent set of a matroid, matching or forest
//! of a graph, ...) maximizing a weight `w(S)` subject to `k` budget
//! constraints `l_i(S) <= L_i`. Everything is computed with exact rationals,
//! so feasibility, LP vertices, and approximation guarantees are decided
//! without floating-point tolerances.
//!
//! Main entry points:
//! - [`matroid_ptas::solve_kbudget_matroid`] — (1-eps)-approximation for
//!   k-budgeted matroid independent set,
//! - [`matching::solve_2budget_matching`] — (1-eps)-approximation for
//!   2-budgeted matching,
//! - [`feasibilize::feasibilize`] — wraps a budget-violating multi-criteria
//!   solver into a strictly feasible one,
//! - [`oracle`] — brute-force optima, Pareto sets and subset-sum checks used
//!   as ground truth by the verification sweeps in [`verify`].

pub mod curve;
pub mod error;
pub mod feasibilize;
pub mod instance;
pub mod lp;
pub mod matching;
pub mod matroid;
pub mod matroid_ptas;
pub mod numeric;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{BudgetedInstance, GraphSpec, GroundSpec};
pub use numeric::{Rat, RatMatrix, RatVec};

/// Caps on the exhaustive subroutines. All solvers in this crate are exact
/// at desk scale; these bounds make runaway inputs fail fast instead of
/// hanging.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Largest universe for which matroid polytope separation scans subsets.
    pub separation_universe: usize,
    /// Largest node count for which odd-set inequalities are enumerated.
    pub odd_set_nodes: usize,
    /// Backtracking-node cap for the brute-force enumerators.
    pub enumeration_steps: u64,
    /// Maximum number of cutting-plane rounds per LP solve.
    pub cut_rounds: usize,
    /// Maximum item count accepted by the subset-sum oracle.
    pub partition_items: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            separation_universe: 20,
            odd_set_nodes: 14,
            enumeration_steps: 50_000_000,
            cut_rounds: 10_000,
            partition_items: 24,
        }
    }
}
