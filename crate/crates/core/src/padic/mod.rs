//! Lattices and norms over `Q_p^d`.
//!
//! Balls of a norm `N(z) = max_i q_i |(Az)_i|_p` around zero are lattices.
//! Between `pL` and a lattice `L` the balls of such a norm form a chain, and
//! every maximal lattice chain arises this way from some norm. This module
//! enumerates those chains at small `p` and `d`, builds the corresponding
//! norms and checks the round trip. [`ball_network`] restricts the norms to
//! a finite window so they can be fed to the cluster network code.

pub mod ball_network;
pub mod chain;
pub mod correspondence;
pub mod flags;
pub mod lattice;
pub mod linalg;
pub mod norm;
pub mod scalar;

use thiserror::Error;

pub use ball_network::{ball_network, orderings, BallNetwork};
pub use chain::{lattices_between, maximal_chains, LatticeChain};
pub use correspondence::{
    basis_from_chain, check_decomposition, norm_from_chain, verify_correspondence, CorrespondenceReport,
};
pub use flags::{flag_count, gaussian_binomial, subspaces, Flag, Subspace};
pub use lattice::{is_adjacent, Lattice, LatticeClass};
pub use linalg::PadicMatrix;
pub use norm::{ball_of_radius, intermediary_balls, norm_eval, radius_of, NormSpec};
pub use scalar::{is_prime, Padic, PadicRing};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision {precision} out of range for p = {p}")]
    PrecisionOutOfRange { p: u64, precision: u32 },
    #[error("precision exhausted")]
    Precision,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is not a p-adic integer")]
    NotIntegral,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("matrix is singular")]
    Singular,
    #[error("weights must lie in (1/p, 1]: {0}")]
    InvalidWeights(String),
    #[error("weights must be strictly increasing")]
    NotIncreasing,
    #[error("lattice is not a ball of this norm")]
    NotABall,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("invalid lattice chain: {0}")]
    InvalidChain(String),
    #[error("chain is not maximal: {len} lattices, expected {expected}")]
    NotMaximal { len: usize, expected: usize },
    #[error("window {0} is too large")]
    WindowTooLarge(u32),
}
