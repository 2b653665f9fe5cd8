//! Exact and Monte Carlo tooling for partition functions of the graph
//! Laplacian over the Erdős–Rényi ensemble.
//!
//! The weight `exp(-β Tr Δ)` on simple labelled graphs is the product
//! Bernoulli measure with edge probability `p = e^{-2β} / (1 + e^{-2β})`.
//! Adding the quartic analog `g Tr Δ²` shifts `β` and introduces the
//! statistic `X_n = Σ_{i,l,j} a_il a_lj = Σ_l deg(l)²`, whose cumulants are
//! governed by connected diagrams on two-valent (more generally `q`-valent)
//! star vertices.
//!
//! Modules:
//! - [`arith`]: exact rationals, truncated power series, integer polynomials, set partitions
//! - [`counting`]: diagram-count sequences and generating-function identities
//! - [`diagrams`]: brute-force enumeration of connected reduced acyclic diagrams
//! - [`graphs`]: graphs, the β ↔ p dictionary, `X` statistics, Laplacian traces
//! - [`exactcum`]: exact moments/cumulants and partition functions over all graphs
//! - [`weights`]: per-diagram semi-invariant weights and cumulant coefficients
//! - [`mc`]: Monte Carlo estimation of the sparse-regime cumulants

pub mod arith;
pub mod counting;
pub mod diagrams;
pub mod error;
pub mod exactcum;
pub mod graphs;
pub mod mc;
pub mod weights;

pub use error::{Error, Result};

/// Enumeration limits. All of them can be raised by the caller; the defaults
/// keep every brute-force routine at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Largest ground set for [`arith::set_partitions`].
    pub max_partition_k: usize,
    /// Largest `q·k` for exhaustive diagram enumeration.
    pub max_offspreads: usize,
    /// Largest `k` for diagram weight polynomials.
    pub max_weight_k: usize,
    /// Largest `n` for the all-graphs histogram.
    pub max_histogram_n: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_partition_k: 10,
            max_offspreads: 12,
            max_weight_k: 6,
            max_histogram_n: 7,
        }
    }
}
