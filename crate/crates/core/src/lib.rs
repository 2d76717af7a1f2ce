//! Phase-space dynamics of a free quantum particle.
//!
//! Closed-form Wigner functions for coherent and even cat states
//! ([`states`]), uniform-grid quadrature and marginals ([`phase_space`]),
//! free evolution with the absolute-deviation curvature diagnostics
//! ([`dynamics`]), and a simulated homodyne witness of Wigner negativity
//! ([`homodyne`]). Units have ħ = 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod homodyne;
pub mod numeric;
pub mod output;
pub mod phase_space;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
