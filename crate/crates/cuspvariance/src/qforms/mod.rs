//! Exact construction of level-one Hecke eigenforms.
//!
//! Eisenstein series and `Δ` are built over the rationals, echelonized into the
//! Miller basis, and `T_2` is diagonalized through its exact characteristic
//! polynomial. Eigenvalues are carried in binary fixed point ([`Fixed`]).

mod eigen;
pub mod fixed;
mod qseries;

pub use eigen::{
    basis_coefficient_bits, exact_hecke_residual, factorize, hecke_eigenforms, hecke_residual,
    HeckeBasis, HeckeEigenform, LAMBDA_BITS,
};
pub use fixed::Fixed;
pub use qseries::{
    charpoly, cusp_dimension, delta_q, eisenstein_q, hecke_coefficient, hecke_matrix,
    miller_basis, QSeries,
};
