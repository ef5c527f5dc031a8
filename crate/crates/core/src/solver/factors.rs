use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal, truncated_svd, DenseMatrix};

/// Latent factors `U1 · M1 ⋯ · V` of a deep factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSet {
    pub u1: DenseMatrix,
    /// Inner factors, left to right (`U2`, then `U3` for three layers).
    pub middles: Vec<DenseMatrix>,
    pub v: DenseMatrix,
}

impl FactorSet {
    pub fn new(u1: DenseMatrix, middles: Vec<DenseMatrix>, v: DenseMatrix) -> Result<Self> {
        let set = Self { u1, middles, v };
        let mut cols = set.u1.cols();
        for f in set.middles.iter().chain(std::iter::once(&set.v)) {
            if f.rows() != cols {
                return Err(Error::DimensionMismatch {
                    op: "factor chain",
                    expected: (cols, f.cols()),
                    got: f.shape(),
                });
            }
            cols = f.cols();
        }
        if set.chain().any(|f| !f.is_finite()) {
            return Err(Error::param("factor entries must be finite"));
        }
        Ok(set)
    }

    /// All factors in multiplication order.
    pub fn chain(&self) -> impl Iterator<Item = &DenseMatrix> {
        std::iter::once(&self.u1)
            .chain(self.middles.iter())
            .chain(std::iter::once(&self.v))
    }

    pub fn len(&self) -> usize {
        self.middles.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, idx: usize) -> &DenseMatrix {
        match idx {
            0 => &self.u1,
            i if i <= self.middles.len() => &self.middles[i - 1],
            _ => &self.v,
        }
    }

    /// Latent sizes `(k1, …, k_last)`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.u1.cols())
            .chain(self.middles.iter().map(DenseMatrix::cols))
            .collect()
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.u1.rows(), self.v.cols())
    }

    /// Product of factors `from..to` (exclusive end); `None` when the range is empty.
    pub fn partial_product(&self, from: usize, to: usize) -> Option<DenseMatrix> {
        (from..to)
            .map(|i| self.get(i))
            .fold(None, |acc: Option<DenseMatrix>, f| {
                Some(match acc {
                    None => f.clone(),
                    Some(a) => a.matmul(f).expect("chain validated on construction"),
                })
            })
    }

    /// Full product `U1 ⋯ V`.
    pub fn product(&self) -> DenseMatrix {
        self.partial_product(0, self.len())
            .expect("a factor set always has at least two factors")
    }
}

/// SVD initialization.
///
/// A rank-`k_last` truncated SVD of `y` gives `A = U Σ^{1/2}` and `V = Σ^{1/2} Vᵀ`;
/// the remaining factors come from splitting `A` again with a truncated SVD for each
/// remaining latent size, innermost first. Columns beyond the available rank are
/// filled with orthonormal completion vectors (scaled like the weakest retained
/// component) paired with zero rows, so the product is unchanged while `U1ᵀU1`
/// stays invertible.
pub fn init_factors(y: &DenseMatrix, dims: &[usize]) -> Result<FactorSet> {
    let (m, n) = y.shape();
    if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
        return Err(Error::param(format!("invalid latent sizes {dims:?}")));
    }
    let k_last = *dims.last().expect("non-empty");
    if k_last > m.min(n) {
        return Err(Error::param(format!(
            "latent size {k_last} exceeds min({m}, {n})"
        )));
    }
    if let Some(&d) = dims.iter().find(|&&d| d > m) {
        return Err(Error::param(format!(
            "latent size {d} exceeds row count {m}"
        )));
    }

    let svd = truncated_svd(y, k_last)?;
    let roots: Vec<f64> = svd.singular.iter().map(|s| s.sqrt()).collect();
    let v = DenseMatrix::from_fn(k_last, n, |i, j| roots[i] * svd.right[(j, i)]);
    let mut a = DenseMatrix::from_fn(m, k_last, |i, j| svd.left[(i, j)] * roots[j]);

    let mut inner = Vec::with_capacity(dims.len() - 1);
    for &d in dims[..dims.len() - 1].iter().rev() {
        let (left, right) = split_factor(&a, d)?;
        inner.push(right);
        a = left;
    }
    inner.reverse();
    FactorSet::new(a, inner, v)
}

/// Writes `a` (m×c) as `left (m×d) · right (d×c)`.
fn split_factor(a: &DenseMatrix, d: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, c) = a.shape();
    let r = d.min(c);
    let svd = truncated_svd(a, r)?;
    let scale = svd
        .singular
        .iter()
        .rev()
        .find(|&&s| s > 0.0)
        .map_or(0.0, |s| s.sqrt());
    let basis = complete_orthonormal(&svd.left, d - r);
    let left = DenseMatrix::from_fn(m, d, |i, j| {
        if j < r && svd.singular[j] > 0.0 {
            basis[(i, j)] * svd.singular[j].sqrt()
        } else {
            basis[(i, j)] * scale
        }
    });
    let right = DenseMatrix::from_fn(d, c, |i, j| {
        if i < r {
            svd.singular[i].sqrt() * svd.right[(j, i)]
        } else {
            0.0
        }
    });
    Ok((left, right))
}
