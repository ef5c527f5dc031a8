//! Truncated SVD through the eigendecomposition of the smaller Gram matrix.

use super::{sym_eigen, DenseMatrix};
use crate::error::{Error, Result};

/// Relative cutoff below which singular values are treated as zero.
const SINGULAR_CUTOFF: f64 = 1e-12;

/// `A ≈ left · diag(singular) · rightᵀ`
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub left: DenseMatrix,
    pub singular: Vec<f64>,
    pub right: DenseMatrix,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let scaled = DenseMatrix::from_fn(self.left.rows(), self.rank(), |i, j| {
            self.left[(i, j)] * self.singular[j]
        });
        scaled
            .matmul_t(&self.right)
            .expect("factor shapes are consistent by construction")
    }
}

pub fn truncated_svd(a: &DenseMatrix, r: usize) -> Result<TruncatedSvd> {
    let (m, n) = a.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::param(format!(
            "svd rank {r} outside 1..={}",
            m.min(n)
        )));
    }
    // Decompose the smaller Gram matrix; the other side follows from A·v / σ.
    let wide = m < n;
    let gram = if wide { a.matmul_t(a)? } else { a.t_matmul(a)? };
    let eig = sym_eigen(&gram)?;
    let k = gram.rows();

    let sigma_all: Vec<f64> = (0..k)
        .rev()
        .map(|i| eig.values[i].max(0.0).sqrt())
        .collect();
    let sigma_max = sigma_all.first().copied().unwrap_or(0.0);
    let cutoff = SINGULAR_CUTOFF * sigma_max;

    let gram_vectors = DenseMatrix::from_fn(k, r, |i, j| eig.vectors[(i, k - 1 - j)]);
    let mut singular = Vec::with_capacity(r);
    let mut kept = 0;
    for &s in sigma_all.iter().take(r) {
        if s > cutoff && s > 0.0 {
            singular.push(s);
            kept += 1;
        } else {
            singular.push(0.0);
        }
    }

    // other = A·v / σ (tall case) or Aᵀ·u / σ (wide case) for the kept columns.
    let projected = if wide {
        a.t_matmul(&gram_vectors.leading_columns(kept))?
    } else {
        a.matmul(&gram_vectors.leading_columns(kept))?
    };
    let other_dim = if wide { n } else { m };
    let partial = DenseMatrix::from_fn(other_dim, kept, |i, j| projected[(i, j)] / singular[j]);
    let other = complete_orthonormal(&partial, r - kept);

    let (left, right) = if wide {
        (gram_vectors, other)
    } else {
        (other, gram_vectors)
    };
    Ok(TruncatedSvd {
        left,
        singular,
        right,
    })
}

/// Returns `basis` extended by `extra` unit columns orthogonal to every existing column.
///
/// Candidates are the standard basis vectors in order, each orthogonalized twice by
/// modified Gram-Schmidt, so the completion is deterministic.
pub fn complete_orthonormal(basis: &DenseMatrix, extra: usize) -> DenseMatrix {
    let m = basis.rows();
    let mut cols: Vec<Vec<f64>> = (0..basis.cols()).map(|j| basis.column(j)).collect();
    let target = cols.len() + extra;
    let mut candidate = 0;
    while cols.len() < target && candidate < m {
        let mut v = vec![0.0; m];
        v[candidate] = 1.0;
        candidate += 1;
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= d * ci;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    debug_assert_eq!(
        cols.len(),
        target,
        "cannot complete beyond the ambient dimension"
    );
    DenseMatrix::from_fn(m, cols.len(), |i, j| cols[j][i])
}
