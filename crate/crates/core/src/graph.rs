//! Similarity graphs and their Laplacians.
//!
//! Metadata similarities are sparsified to a p-nearest-neighbour graph before the
//! Laplacian `L = D − S` is formed; several Laplacians on the same entity set are
//! simply summed.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, DenseMatrix};

/// Binary entity × feature indicator (one-hot encoded metadata).
#[derive(Debug, Clone)]
pub struct FeatureProfile {
    entities: Vec<String>,
    features: Vec<String>,
    indicator: DenseMatrix,
}

impl FeatureProfile {
    pub fn new(
        entities: Vec<String>,
        features: Vec<String>,
        indicator: DenseMatrix,
    ) -> Result<Self> {
        if indicator.shape() != (entities.len(), features.len()) {
            return Err(Error::DimensionMismatch {
                op: "feature profile",
                expected: (entities.len(), features.len()),
                got: indicator.shape(),
            });
        }
        if let Some(pos) = indicator
            .as_slice()
            .iter()
            .position(|&v| v != 0.0 && v != 1.0)
        {
            let f = features.len().max(1);
            return Err(Error::Config(format!(
                "feature profile entry ({}, {}) is not binary",
                pos / f,
                pos % f
            )));
        }
        ensure_unique(&entities)?;
        Ok(Self {
            entities,
            features,
            indicator,
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn indicator(&self) -> &DenseMatrix {
        &self.indicator
    }

    /// Indices of entities with no feature set.
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.indicator.rows())
            .filter(|&i| self.indicator.row(i).iter().all(|&v| v == 0.0))
            .collect()
    }
}

pub(crate) fn ensure_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Config(format!("duplicate entity name {n:?}")));
        }
    }
    Ok(())
}

/// Square symmetric similarity matrix over a named entity set.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    entities: Vec<String>,
    values: DenseMatrix,
}

impl SimilarityMatrix {
    /// Wraps a matrix that must already be symmetric within `1e-12`.
    pub fn new(entities: Vec<String>, values: DenseMatrix) -> Result<Self> {
        Self::check_shape(&entities, &values)?;
        let asymmetry = values.asymmetry()?;
        if asymmetry > 1e-12 {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self { entities, values })
    }

    /// Ingests an externally supplied similarity, averaging `(S + Sᵀ)/2` when the
    /// input is asymmetric beyond `1e-9`.
    pub fn from_supplied(entities: Vec<String>, values: DenseMatrix) -> Result<Self> {
        Self::check_shape(&entities, &values)?;
        let asymmetry = values.asymmetry()?;
        if asymmetry > 1e-9 {
            log::warn!(
                "supplied similarity is asymmetric ({asymmetry:.3e}); averaging with its transpose"
            );
        }
        Ok(Self {
            entities,
            values: values.symmetrized()?,
        })
    }

    fn check_shape(entities: &[String], values: &DenseMatrix) -> Result<()> {
        if values.shape() != (entities.len(), entities.len()) {
            return Err(Error::DimensionMismatch {
                op: "similarity",
                expected: (entities.len(), entities.len()),
                got: values.shape(),
            });
        }
        ensure_unique(entities)
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// Graph Laplacian `D − S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    values: DenseMatrix,
}

impl LaplacianMatrix {
    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: DenseMatrix::zeros(n, n),
        }
    }

    /// Wraps an arbitrary symmetric matrix as a Laplacian after checking the row sums.
    pub fn from_matrix(values: DenseMatrix) -> Result<Self> {
        check_symmetric(&values)?;
        let n = values.rows();
        for i in 0..n {
            let s: f64 = values.row(i).iter().sum();
            if s.abs() > 1e-10 * (1.0 + values.max_abs()) {
                return Err(Error::Config(format!("Laplacian row {i} sums to {s:.3e}")));
            }
        }
        Ok(Self { values })
    }
}

/// Cosine similarity of binary profiles. Entities without any feature get
/// off-diagonal similarity 0 and self-similarity 1.
pub fn cosine_similarity(profile: &FeatureProfile) -> SimilarityMatrix {
    let zero = profile.zero_rows();
    if !zero.is_empty() {
        let names: Vec<&str> = zero.iter().map(|&i| profile.entities[i].as_str()).collect();
        log::warn!("entities without any feature: {}", names.join(", "));
    }
    cosine_similarity_dense(profile.entities.clone(), &profile.indicator)
        .expect("profile names were validated on construction")
}

/// Cosine similarity between the rows of a real matrix.
pub fn cosine_similarity_dense(
    entities: Vec<String>,
    rows: &DenseMatrix,
) -> Result<SimilarityMatrix> {
    let n = rows.rows();
    if entities.len() != n {
        return Err(Error::DimensionMismatch {
            op: "cosine similarity",
            expected: (entities.len(), rows.cols()),
            got: rows.shape(),
        });
    }
    let norms: Vec<f64> = (0..n)
        .map(|i| rows.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut s = DenseMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            let dot: f64 = rows
                .row(i)
                .iter()
                .zip(rows.row(j))
                .map(|(a, b)| a * b)
                .sum();
            let v = dot / (norms[i] * norms[j]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    SimilarityMatrix::new(entities, s)
}

/// Keeps, per row, the `p` largest off-diagonal entries (ties to the lower column);
/// an edge survives if either endpoint selected it. Values and the diagonal are kept.
pub fn sparsify_pnn(s: &SimilarityMatrix, p: usize) -> Result<SimilarityMatrix> {
    let n = s.len();
    if p == 0 || p >= n {
        return Err(Error::param(format!(
            "p-nearest neighbours: p = {p} outside 1..{n}"
        )));
    }
    let values = &s.values;
    let mut keep = vec![false; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        // stable sort keeps ascending column order among ties
        order.sort_by(|&a, &b| values[(i, b)].total_cmp(&values[(i, a)]));
        for &j in order.iter().take(p) {
            keep[i * n + j] = true;
            keep[j * n + i] = true;
        }
    }
    let out = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j || keep[i * n + j] {
            values[(i, j)]
        } else {
            0.0
        }
    });
    Ok(SimilarityMatrix {
        entities: s.entities.clone(),
        values: out,
    })
}

/// `L = D − S` with `D_ii = Σ_j S_ij`, the diagonal of `S` included.
pub fn laplacian(s: &SimilarityMatrix) -> Result<LaplacianMatrix> {
    laplacian_of(&s.values)
}

pub(crate) fn laplacian_of(s: &DenseMatrix) -> Result<LaplacianMatrix> {
    let asymmetry = s.asymmetry()?;
    if asymmetry > 1e-12 * (1.0 + s.frobenius_norm()) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let n = s.rows();
    let degree: Vec<f64> = (0..n).map(|i| s.row(i).iter().sum()).collect();
    let values = DenseMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { degree[i] } else { 0.0 };
        d - s[(i, j)]
    });
    Ok(LaplacianMatrix { values })
}

pub fn combine_laplacians(parts: &[LaplacianMatrix]) -> Result<LaplacianMatrix> {
    let first = parts
        .first()
        .ok_or_else(|| Error::param("combine_laplacians needs at least one part"))?;
    let mut acc = first.values.clone();
    for part in &parts[1..] {
        acc = acc.add(&part.values)?;
    }
    Ok(LaplacianMatrix { values: acc })
}

/// Sparsifies every similarity with the shared `p` and sums the resulting Laplacians.
pub fn summed_laplacian<'a>(
    sims: impl IntoIterator<Item = &'a SimilarityMatrix>,
    p: usize,
) -> Result<LaplacianMatrix> {
    let parts = sims
        .into_iter()
        .map(|s| sparsify_pnn(s, p).and_then(|sp| laplacian(&sp)))
        .collect::<Result<Vec<_>>>()?;
    combine_laplacians(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("e{i}")).collect()
    }

    fn profile(rows: &[&[f64]]) -> FeatureProfile {
        let m = DenseMatrix::from_rows(rows);
        FeatureProfile::new(names(m.rows()), names(m.cols()), m).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let s = cosine_similarity(&profile(&[&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]]));
        assert!((s.values()[(0, 1)] - 1.0).abs() < 1e-15);
        let s = cosine_similarity(&profile(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(s.values()[(0, 1)], 0.0);
        let s = cosine_similarity(&profile(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]]));
        assert!((s.values()[(0, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_zero_profile() {
        let p = profile(&[&[0.0, 0.0], &[1.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(p.zero_rows(), vec![0]);
        let s = cosine_similarity(&p);
        assert_eq!(s.values()[(0, 0)], 1.0);
        assert_eq!(s.values()[(0, 1)], 0.0);
        assert_eq!(s.values()[(2, 0)], 0.0);
    }

    #[test]
    fn profile_rejects_non_binary_and_duplicates() {
        let m = DenseMatrix::from_rows(&[[2.0]]);
        assert!(FeatureProfile::new(names(1), names(1), m).is_err());
        let m = DenseMatrix::zeros(2, 1);
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(FeatureProfile::new(dup, names(1), m).is_err());
    }

    #[test]
    fn pnn_top_selection() {
        let v = DenseMatrix::from_rows(&[
            [1.0, 0.9, 0.5, 0.2],
            [0.9, 1.0, 0.1, 0.05],
            [0.5, 0.1, 1.0, 0.0],
            [0.2, 0.05, 0.0, 1.0],
        ]);
        let s = SimilarityMatrix::new(names(4), v.clone()).unwrap();
        let sp = sparsify_pnn(&s, 2).unwrap();
        // row 0 keeps 0.9 and 0.5; 0.2 survives because row 3 selects column 0
        assert_eq!(sp.values()[(0, 1)], 0.9);
        assert_eq!(sp.values()[(0, 2)], 0.5);
        assert_eq!(sp.values()[(0, 3)], 0.2);
        assert_eq!(sp.values().asymmetry().unwrap(), 0.0);

        let full = sparsify_pnn(&s, 3).unwrap();
        assert_eq!(full.values(), &v);
    }

    #[test]
    fn pnn_drops_unselected_edge() {
        let v = DenseMatrix::from_rows(&[
            [1.0, 0.9, 0.5, 0.2],
            [0.9, 1.0, 0.3, 0.4],
            [0.5, 0.3, 1.0, 0.8],
            [0.2, 0.4, 0.8, 1.0],
        ]);
        let s = SimilarityMatrix::new(names(4), v).unwrap();
        let sp = sparsify_pnn(&s, 1).unwrap();
        assert_eq!(sp.values()[(0, 1)], 0.9);
        assert_eq!(sp.values()[(2, 3)], 0.8);
        assert_eq!(sp.values()[(0, 3)], 0.0);
        assert_eq!(sp.values()[(1, 2)], 0.0);
    }

    #[test]
    fn pnn_ties_prefer_lower_column() {
        let v = DenseMatrix::from_rows(&[[1.0, 0.5, 0.5], [0.5, 1.0, 0.0], [0.5, 0.0, 1.0]]);
        let s = SimilarityMatrix::new(names(3), v).unwrap();
        let sp = sparsify_pnn(&s, 1).unwrap();
        assert_eq!(sp.values()[(0, 1)], 0.5);
        // kept because row 2 picks column 0 as its best neighbour
        assert_eq!(sp.values()[(0, 2)], 0.5);
    }

    #[test]
    fn pnn_range() {
        let s = SimilarityMatrix::new(names(3), DenseMatrix::identity(3)).unwrap();
        assert!(sparsify_pnn(&s, 0).is_err());
        assert!(sparsify_pnn(&s, 3).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let s = SimilarityMatrix::new(names(3), DenseMatrix::identity(3)).unwrap();
        assert_eq!(laplacian(&s).unwrap().values(), &DenseMatrix::zeros(3, 3));

        let s = SimilarityMatrix::new(names(2), DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]))
            .unwrap();
        let l = laplacian(&s).unwrap();
        assert_eq!(
            l.values(),
            &DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]])
        );
    }

    #[test]
    fn laplacian_rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(laplacian_of(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn supplied_similarity_is_averaged() {
        let m = DenseMatrix::from_rows(&[[1.0, 0.4], [0.2, 1.0]]);
        assert!(SimilarityMatrix::new(names(2), m.clone()).is_err());
        let s = SimilarityMatrix::from_supplied(names(2), m).unwrap();
        assert!((s.values()[(0, 1)] - 0.3).abs() < 1e-15);
        assert_eq!(s.values().asymmetry().unwrap(), 0.0);
    }

    #[test]
    fn combine_checks_sizes() {
        let a = LaplacianMatrix::zeros(2);
        let b = LaplacianMatrix::zeros(3);
        assert!(combine_laplacians(&[a.clone(), b]).is_err());
        assert_eq!(combine_laplacians(&[a.clone()]).unwrap(), a);
        assert_eq!(combine_laplacians(&[a.clone(), a.clone()]).unwrap(), a);
        assert!(combine_laplacians(&[]).is_err());
    }
}
