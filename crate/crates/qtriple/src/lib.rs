//! Jackson q-calculus on geometric lattices, fractional q-operators, the
//! q-Hankel pair, and solvers for dual and triple q-integral equations with
//! third Jackson q-Bessel kernels.

// `!(x > 0.0)` guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod qlattice;
pub mod qspecial;

pub use error::{QError, QResult};
pub mod qfrac;
pub mod qhankel;
pub mod residual;
pub mod verify;
pub mod dualsolver;
pub mod triplesolver;
pub mod quadsolver;
pub mod cli;
