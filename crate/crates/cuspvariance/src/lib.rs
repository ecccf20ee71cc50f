//! Numerical companion to quantum variance of holomorphic Hecke cusp forms
//! on `PSL2(Z)\H` at shrinking scales `(k-1)^θ`.
//!
//! * [`qforms`]: exact q-expansions, the Miller basis and Hecke eigenforms.
//! * [`kernels`]: special functions, arithmetic sums, quadrature, test weights.
//! * [`petersson`]: `L(1, sym² f)` and both sides of the Petersson formula.
//! * [`variance`]: shifted convolution sums, Poincaré masses and moment sums.
//! * [`btheta`]: the limiting Hermitian forms `B_θ` and Maass-form ingestion.

pub mod btheta;
pub mod error;
pub mod kernels;
pub mod petersson;
pub mod qforms;
pub mod variance;

pub use error::{Error, Result};
