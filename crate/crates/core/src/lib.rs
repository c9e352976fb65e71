//! Pseudospectral Benjamin-Ono solver with virial-identity and commutator
//! diagnostics.
//!
//! * [`spectral`]: periodic grids, Fourier multipliers, commutators.
//! * [`dynamics`]: the `u_t = H u_xx - u^k u_x` family, IF-RK4 time stepping,
//!   conserved quantities, solitons.
//! * [`weights`]: weight profiles, cut-offs, time schedules and moving fronts.
//! * [`virial`]: weighted functionals, regional masses and the virial breakdown.
//! * [`lab`]: randomized checks of the commutator and interpolation inequalities.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod snapshot;
pub mod spectral;
pub mod virial;
pub mod weights;

pub use error::{Error, Result};
pub use spectral::{Field, Grid};
