//! Special functions, arithmetic sums, quadrature and test weights.

mod arith;
mod bessel;
pub mod quad;
pub mod sum;
mod weight;

pub use arith::{b2, divisors, kloosterman, num_divisors, tau1};
pub use bessel::{bessel_j, bessel_k_imag};
pub use quad::{integrate, integrate_pieces, Domain, QuadResult, QuadratureSpec, Scheme};
pub use sum::{compensated_sum, CompensatedSum};
pub use weight::{weight_tilde, TestWeight};
