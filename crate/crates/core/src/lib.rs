//! Linear and nonlinear stability of radially symmetric equilibria in a
//! free-boundary tumor growth model driven by nutrient and pressure.
//!
//! The tumor occupies `{ |x| < R (1 + rho(theta)) }`. Inside, the nutrient
//! `psi` solves `Delta psi = f(psi)` and the pressure `p` is harmonic; the
//! boundary moves with the normal velocity produced by both fields.
//!
//! * [`radial`]: steady profiles, mode solutions `u_n` and the steady radius.
//! * [`spectrum`]: Fourier symbols, stability thresholds and regimes.
//! * [`linear`]: exact integration of the linearized boundary flow.
//! * [`nonlinear`]: field solves on perturbed disks and the full flow.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod error;
pub mod linear;
pub mod model;
pub mod nonlinear;
pub mod ode;
pub mod radial;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::NutrientModel;
