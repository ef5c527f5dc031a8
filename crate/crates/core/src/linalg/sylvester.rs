//! Sylvester equations `AX + XB = C` with symmetric `A`, `B`, and SPD inversion.

use super::{sym_eigen, DenseMatrix, SymEigen};
use crate::error::{Error, Result};

/// Smallest admissible `λa_i + λb_j`.
pub const MIN_EIGEN_SUM: f64 = 1e-12;

/// Relative eigenvalue floor used by [`spd_inverse`].
pub const SPD_FLOOR: f64 = 1e-10;

pub fn solve_sylvester_sym(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
) -> Result<DenseMatrix> {
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            op: "sylvester",
            expected: (a.rows(), b.rows()),
            got: c.shape(),
        });
    }
    let ea = sym_eigen(a)?;
    let eb = sym_eigen(b)?;
    solve_sylvester_eig(&ea, &eb, c)
}

/// Solves `AX + XB = C` given eigendecompositions of both sides.
///
/// With `A = Qa Λa Qaᵀ` and `B = Qb Λb Qbᵀ` the system decouples in the rotated
/// frame: `(Qaᵀ C Qb)_ij / (λa_i + λb_j)`.
pub fn solve_sylvester_eig(ea: &SymEigen, eb: &SymEigen, c: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, m) = (ea.dim(), eb.dim());
    if c.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            op: "sylvester",
            expected: (n, m),
            got: c.shape(),
        });
    }
    let min_sum = ea
        .values
        .first()
        .zip(eb.values.first())
        .map_or(f64::INFINITY, |(x, y)| x + y);
    if min_sum < MIN_EIGEN_SUM {
        return Err(Error::SingularSystem { min_sum });
    }
    let mut rotated = ea.vectors.t_matmul(c)?.matmul(&eb.vectors)?;
    for i in 0..n {
        for j in 0..m {
            rotated[(i, j)] /= ea.values[i] + eb.values[j];
        }
    }
    ea.vectors.matmul(&rotated)?.matmul_t(&eb.vectors)
}

/// Inverse of a symmetric positive (semi)definite matrix.
#[derive(Debug, Clone)]
pub struct SpdInverse {
    pub inverse: DenseMatrix,
    /// Number of eigenvalues raised to the floor `1e-10 · λ_max`.
    pub floored: usize,
}

impl SpdInverse {
    pub fn was_floored(&self) -> bool {
        self.floored > 0
    }
}

/// Eigenvalues below `1e-10 · λ_max` (or `1e-10` when `λ_max ≤ 0`) are raised to
/// that floor before inverting.
pub fn spd_inverse(a: &DenseMatrix) -> Result<SpdInverse> {
    let eig = sym_eigen(a)?;
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    let floor = if lambda_max > 0.0 {
        SPD_FLOOR * lambda_max
    } else {
        SPD_FLOOR
    };
    let floored = eig.values.iter().filter(|&&l| l < floor).count();
    if floored > 0 {
        log::debug!("spd_inverse: floored {floored} eigenvalue(s) at {floor:.3e}");
    }
    let inverse = eig.reconstruct_with(|l| 1.0 / l.max(floor));
    Ok(SpdInverse { inverse, floored })
}
