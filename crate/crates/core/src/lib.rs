//! Semiclassical spectral toolkit for one-dimensional PT-symmetric
//! Schrödinger operators `-h^2 d^2/dx^2 + V0(x) + i eps W(x)` with a single
//! potential well.
//!
//! The modules follow the computation from the potential outward:
//!
//! - [`potential`]: polynomial `V0` (even) and `W` (odd), hypothesis checks.
//! - [`turning`]: the two complex turning points bounding the well.
//! - [`action`]: the action `I(E, eps)` and period `T = dI/dE`.
//! - [`bs`]: Bohr–Sommerfeld eigenvalues and their empirical `h^2` correction.
//! - [`wkb`]: WKB phase and transport coefficients outside the well.
//! - [`stokes`]: Stokes and anti-Stokes lines of `V_eps - E`.
//! - [`shooting`]: independent eigenvalue oracle from a PT-paired Wronskian,
//!   with argument-principle zero counting.
//! - [`cli`]: the `ptwell` command-line front end.

pub mod action;
pub mod bs;
pub mod cli;
pub mod error;
pub mod poly;
pub mod potential;
pub mod quadrature;
pub mod shooting;
pub mod stokes;
pub mod turning;
pub mod wkb;

pub use error::{Error, Result};
pub use num_complex::Complex64;
