//! Numerical toolkit for Toeplitz operators with singular symbols on the
//! Bergman space of the upper half-plane.
//!
//! The library builds truncated Toeplitz matrices from sesquilinear forms
//! whose symbols are measures and distributional derivatives of measures
//! (atoms, weighted lines, smooth densities), computes Carleson k-norms by
//! certified grid search, and mechanizes the reduction of Toeplitz operators
//! on true-polyanalytic spaces to operators with derived symbols on the
//! analytic space.
//!
//! Module map:
//! - [`geometry`]: pseudo-hyperbolic metric and disk conversions on the
//!   upper half-plane, Möbius transfer to the unit disk.
//! - [`basis`]: reproducing kernel and the transferred orthonormal basis of
//!   the Bergman space, with analytic derivatives to arbitrary order.
//! - [`quad`]: quadrature rules (disk transfer, line panels, Gauss-Laguerre),
//!   singular values, exponential decay fits.
//! - [`symbols`]: singular symbol data model and Carleson k-norm machinery.
//! - [`toeplitz`]: truncated operator assembly and boundedness/spectrum
//!   reports.
//! - [`poly`]: creation operators on polyanalytic spaces and the symbolic
//!   integration-by-parts engine producing the derived-symbol operator.

pub mod basis;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod symbols;
pub mod taylor;
pub mod toeplitz;

pub use error::{Error, Result};
pub use num_complex::Complex64;
