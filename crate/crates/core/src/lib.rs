//! Quasiparticle bath spectral densities, Matsubara observables and the
//! Stokes-shifted Dicke critical point of a pumped cavity-BEC.
//!
//! All quantities are in recoil units (ω_R = k = ħ = 1, m = 1/2).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod matsubara;
pub mod critical;
pub mod exec;
pub mod fit;
pub mod kernel;
pub mod model;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    bogoliubov_factors, dispersion, validate_and_derive, BogoliubovFactors, DerivedParams,
    IrCutoff, PhysicalParams, Support,
};
pub use spectral::{Branch, Channel};
