//! Objective and the individual block updates of the hybrid proximal scheme.

use super::{FactorSet, PROX_WEIGHT};
use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::linalg::{solve_sylvester_eig, spd_inverse, sym_eigen, DenseMatrix, SymEigen};

/// Observed data and graph priors of one completion problem.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    /// Observed matrix; unobserved cells are expected to be zero.
    pub y: &'a DenseMatrix,
    /// Binary observation mask, same shape as `y`.
    pub mask: &'a DenseMatrix,
    /// Row-entity Laplacian (m×m).
    pub l_rows: &'a LaplacianMatrix,
    /// Column-entity Laplacian (n×n).
    pub l_cols: &'a LaplacianMatrix,
}

impl<'a> Problem<'a> {
    pub fn new(
        y: &'a DenseMatrix,
        mask: &'a DenseMatrix,
        l_rows: &'a LaplacianMatrix,
        l_cols: &'a LaplacianMatrix,
    ) -> Result<Self> {
        let (m, n) = y.shape();
        if mask.shape() != (m, n) {
            return Err(Error::DimensionMismatch {
                op: "mask",
                expected: (m, n),
                got: mask.shape(),
            });
        }
        if mask.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("mask must be binary"));
        }
        if l_rows.dim() != m {
            return Err(Error::DimensionMismatch {
                op: "row Laplacian",
                expected: (m, m),
                got: l_rows.values().shape(),
            });
        }
        if l_cols.dim() != n {
            return Err(Error::DimensionMismatch {
                op: "column Laplacian",
                expected: (n, n),
                got: l_cols.values().shape(),
            });
        }
        Ok(Self {
            y,
            mask,
            l_rows,
            l_cols,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.y.shape()
    }
}

/// `‖Y − M⊙X‖² + ϑ‖X − U1⋯V‖² + 2μ tr(U1ᵀ L_d U1) + 2μ tr(V L_v Vᵀ)`
pub fn objective(
    problem: &Problem<'_>,
    x: &DenseMatrix,
    factors: &FactorSet,
    mu: f64,
    theta: f64,
) -> Result<f64> {
    weighted_objective(problem, x, factors, 1.0, mu, theta)
}

/// The objective with its data term scaled by `α`.
///
/// A full iteration never increases this quantity for `α ∈ (0, 2)`. It coincides
/// with [`objective`] only at `α = 1`; for other step sizes `objective` itself
/// may rise slightly near convergence.
pub fn merit(
    problem: &Problem<'_>,
    x: &DenseMatrix,
    factors: &FactorSet,
    alpha: f64,
    mu: f64,
    theta: f64,
) -> Result<f64> {
    weighted_objective(problem, x, factors, alpha, mu, theta)
}

fn weighted_objective(
    problem: &Problem<'_>,
    x: &DenseMatrix,
    factors: &FactorSet,
    data_weight: f64,
    mu: f64,
    theta: f64,
) -> Result<f64> {
    for got in [x.shape(), factors.output_shape()] {
        if got != problem.shape() {
            return Err(Error::DimensionMismatch {
                op: "objective",
                expected: problem.shape(),
                got,
            });
        }
    }
    let fit = problem.y.sub(&problem.mask.hadamard(x)?)?.frobenius_sq();
    let coupling = x.sub(&factors.product())?.frobenius_sq();
    let smooth_rows = problem
        .l_rows
        .values()
        .matmul(&factors.u1)?
        .inner(&factors.u1)?;
    let smooth_cols = factors
        .v
        .matmul(problem.l_cols.values())?
        .inner(&factors.v)?;
    Ok(data_weight * fit + theta * coupling + 2.0 * mu * (smooth_rows + smooth_cols))
}

/// Gradient step on the data term followed by the prox of the coupling term and
/// the nonnegativity constraint:
/// `max{(B + ϑ·P)/(1 + ϑ), 0}` with `B = X + α·M⊙(Y − M⊙X)`.
pub fn update_x(
    x: &DenseMatrix,
    product: &DenseMatrix,
    y: &DenseMatrix,
    mask: &DenseMatrix,
    alpha: f64,
    theta: f64,
) -> Result<DenseMatrix> {
    for (name, other) in [("product", product), ("y", y), ("mask", mask)] {
        if other.shape() != x.shape() {
            return Err(Error::DimensionMismatch {
                op: name,
                expected: x.shape(),
                got: other.shape(),
            });
        }
    }
    let sigma = PROX_WEIGHT;
    let (xs, ps, ys, ms) = (
        x.as_slice(),
        product.as_slice(),
        y.as_slice(),
        mask.as_slice(),
    );
    let data = (0..xs.len())
        .map(|i| {
            let b = xs[i] + alpha * ms[i] * (ys[i] - ms[i] * xs[i]);
            ((sigma * b + theta * ps[i]) / (sigma + theta)).max(0.0)
        })
        .collect();
    Ok(DenseMatrix::from_vec_unchecked(x.rows(), x.cols(), data))
}

/// Eigendecomposition of `2μL + ςI`, shared across iterations.
pub fn regularizer_eigen(l: &LaplacianMatrix, mu: f64) -> Result<SymEigen> {
    sym_eigen(&l.values().scale(2.0 * mu).add_diag(PROX_WEIGHT))
}

/// Prox of `F` in `U1`: solves `(2μL_d + I)U1 + U1(ϑTTᵀ) = ϑXTᵀ + U1_prev`.
pub fn update_u1(
    x: &DenseMatrix,
    u1_prev: &DenseMatrix,
    tail: &DenseMatrix,
    l_rows: &LaplacianMatrix,
    mu: f64,
    theta: f64,
) -> Result<DenseMatrix> {
    update_u1_with(&regularizer_eigen(l_rows, mu)?, x, u1_prev, tail, theta)
}

pub(crate) fn update_u1_with(
    reg: &SymEigen,
    x: &DenseMatrix,
    u1_prev: &DenseMatrix,
    tail: &DenseMatrix,
    theta: f64,
) -> Result<DenseMatrix> {
    let coupling = sym_eigen(&tail.matmul_t(tail)?.scale(theta))?;
    let rhs = x
        .matmul_t(tail)?
        .scale(theta)
        .add(&u1_prev.scale(PROX_WEIGHT))?;
    solve_sylvester_eig(reg, &coupling, &rhs)
}

/// Result of an inner-factor update.
#[derive(Debug, Clone)]
pub struct MiddleUpdate {
    pub factor: DenseMatrix,
    /// Whether `leftᵀleft` needed eigenvalue flooring before inversion.
    pub floored: bool,
}

/// Prox of `F` in an inner factor `W` with `left · W · right` the full product:
/// with `G = (leftᵀleft)⁻¹`, solves `G·W + W(ϑ·RRᵀ) = ϑ·G·leftᵀ·X·Rᵀ + G·W_prev`.
pub fn update_middle(
    x: &DenseMatrix,
    factor_prev: &DenseMatrix,
    left: &DenseMatrix,
    right: &DenseMatrix,
    theta: f64,
) -> Result<MiddleUpdate> {
    let g = spd_inverse(&left.t_matmul(left)?)?;
    let coupling = sym_eigen(&right.matmul_t(right)?.scale(theta))?;
    let projected = left.t_matmul(x)?.matmul_t(right)?.scale(theta);
    let rhs = g
        .inverse
        .matmul(&projected.add(&factor_prev.scale(PROX_WEIGHT))?)?;
    let g_eig = sym_eigen(&g.inverse)?;
    let factor = solve_sylvester_eig(&g_eig, &coupling, &rhs)?;
    Ok(MiddleUpdate {
        factor,
        floored: g.was_floored(),
    })
}

/// Prox of `F` in `V`: solves `(ϑHᵀH)V + V(2μL_v + I) = ϑHᵀX + V_prev`.
pub fn update_v(
    x: &DenseMatrix,
    v_prev: &DenseMatrix,
    head: &DenseMatrix,
    l_cols: &LaplacianMatrix,
    mu: f64,
    theta: f64,
) -> Result<DenseMatrix> {
    update_v_with(&regularizer_eigen(l_cols, mu)?, x, v_prev, head, theta)
}

pub(crate) fn update_v_with(
    reg: &SymEigen,
    x: &DenseMatrix,
    v_prev: &DenseMatrix,
    head: &DenseMatrix,
    theta: f64,
) -> Result<DenseMatrix> {
    let coupling = sym_eigen(&head.t_matmul(head)?.scale(theta))?;
    let rhs = head
        .t_matmul(x)?
        .scale(theta)
        .add(&v_prev.scale(PROX_WEIGHT))?;
    solve_sylvester_eig(&coupling, reg, &rhs)
}
