//! Krylov subspace evaluation of phi matrix function actions with
//! residual–time (RT) restarting.
//!
//! The central entry point is [`phi_rt::phi_rt_solve`], which approximates
//! `y(t) = v + t phi(-tA)(g - Av)`, the solution of `y' = -Ay + g`, `y(0) = v`,
//! for a sparse `A` whose symmetric part is nonnegative definite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod bounds;
pub mod cli;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod mm;
pub mod oracle;
pub mod phi_rt;
pub mod problems;
pub mod sparse;
pub mod vector;

pub use error::{Error, Result};
