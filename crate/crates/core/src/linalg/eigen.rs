//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use super::DenseMatrix;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-8;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// `A = Q diag(values) Qᵀ` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q diag(f(λ)) Qᵀ`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.dim();
        let q = &self.vectors;
        let scaled: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q[(i, k)] * scaled[k] * q[(j, k)]).sum()
        })
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Checks that `a` is square and symmetric within `1e-8 · (1 + ‖a‖_F)`.
pub(crate) fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    let asymmetry = a.asymmetry()?;
    if asymmetry > SYMMETRY_TOL * (1.0 + a.frobenius_norm()) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    check_symmetric(a)?;
    let n = a.rows();
    // Work on the exactly symmetrized copy so rotations see one value per pair.
    let mut w = a.symmetrized()?;
    let mut q = DenseMatrix::identity(n);

    let norm = w.frobenius_norm();
    let tol = OFF_DIAGONAL_TOL * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&w) <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = w[(p, r)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = w[(p, p)];
                let aqq = w[(r, r)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut w, &mut q, p, r, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].total_cmp(&w[(j, j)]));
    let values = order.iter().map(|&i| w[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| q[(i, order[k])]);
    Ok(SymEigen { vectors, values })
}

fn off_diagonal_norm(w: &DenseMatrix) -> f64 {
    let n = w.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += w[(i, j)] * w[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Applies `W ← JᵀWJ`, `Q ← QJ` for the rotation in the (p, r) plane.
fn rotate(w: &mut DenseMatrix, q: &mut DenseMatrix, p: usize, r: usize, c: f64, s: f64) {
    let n = w.rows();
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkr = w[(k, r)];
        w[(k, p)] = c * wkp - s * wkr;
        w[(k, r)] = s * wkp + c * wkr;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wrk = w[(r, k)];
        w[(p, k)] = c * wpk - s * wrk;
        w[(r, k)] = s * wpk + c * wrk;
    }
    // The rotation annihilates (p, r) analytically; pin it to avoid drift.
    w[(p, r)] = 0.0;
    w[(r, p)] = 0.0;
    for k in 0..n {
        let qkp = q[(k, p)];
        let qkr = q[(k, r)];
        q[(k, p)] = c * qkp - s * qkr;
        q[(k, r)] = s * qkp + c * qkr;
    }
}
