//! Numerical laboratory for the distribution of squarefree integers.
//!
//! The crate computes, exactly where possible, the second moments of squarefree
//! counts in short intervals and in arithmetic progressions, the analytic
//! constants that govern them, the weighted sinc sums that produce the main
//! term, exact point counts for the Diophantine inequalities that control the
//! off-diagonal terms, and the scaling diagnostics of the normalized
//! partial-sum processes.
//!
//! Every heavy loop is expressed as a map-reduce over independent blocks (see
//! [`par`]). With the default `parallel` feature the blocks run on a rayon pool
//! sized by the caller; without it everything runs on the calling thread.
//! Integer accumulators make results bit-identical for every worker count.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ap_variance;
pub mod characters;
pub mod constants;
pub mod diophantine;
mod error;
pub mod interval;
pub mod main_term;
pub mod par;
pub mod quadrature;
pub mod sieve;
pub mod stochastic;
pub mod verify;

pub use error::{LabError, Result};
pub use par::Workers;
