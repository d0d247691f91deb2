//! Hodge–de Rham spectra of piecewise-conical model manifolds.
//!
//! The manifolds handled here are warped products `dt² + f(t)² h` over the
//! round sphere `Sⁿ` where `f` is piecewise linear with slope ±1: spindles,
//! truncated spindles, annuli and the collapsing connected sums built from
//! them. Separation of variables over coclosed sphere eigenforms reduces the
//! p-form Laplacian to a family of radial problems `-u'' + γ(γ+1)u/r²`
//! (possibly coupled in pairs), which are solved by two independent routes:
//! Bessel transfer matrices and a finite-element discretisation of the
//! quadratic form.

pub mod analysis;
pub mod aps_limit;
pub mod cone_operator;
pub mod error;
pub mod geometry;
pub mod radial;
pub mod sphere_modes;

pub use error::{Error, Result};
