//! Half-space Kramers isothermal-slip problem for ideal quantum gases under
//! the BGK model.
//!
//! The pipeline runs bottom-up: [`moments`] gives the kernel
//! `K(mu) = ln(1 + s e^(alpha - mu^2)) / (2 l0)`, [`dispersion`] its dispersion
//! function and boundary phase, [`factorization`] the phase table and the
//! `X` function, and [`kramers`] the slip coefficient, velocity profile and
//! distribution function. [`check`] evaluates the closed-form identities.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod dispersion;
pub mod error;
pub mod factorization;
pub mod kramers;
pub mod moments;
pub mod quadrature;

pub use error::{Error, QuadratureError, Result};
pub use factorization::XiTable;
pub use kramers::{KramersSolution, PhysicalParams, ProfilePoint, SlipResult};
pub use moments::{DispersionKernel, GasStatistics, MomentSet};
pub use quadrature::QuadratureConfig;
