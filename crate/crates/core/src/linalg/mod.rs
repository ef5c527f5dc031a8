//! Dense kernels used by the solver: symmetric eigendecomposition, truncated SVD,
//! symmetric Sylvester solves and SPD inversion.
//!
//! Everything here is a pure function of its inputs.

mod eigen;
mod matrix;
mod svd;
mod sylvester;

pub(crate) use eigen::check_symmetric;
pub use eigen::{sym_eigen, SymEigen};
pub use matrix::DenseMatrix;
pub use svd::{complete_orthonormal, truncated_svd, TruncatedSvd};
pub use sylvester::{
    solve_sylvester_eig, solve_sylvester_sym, spd_inverse, SpdInverse, MIN_EIGEN_SUM, SPD_FLOOR,
};
