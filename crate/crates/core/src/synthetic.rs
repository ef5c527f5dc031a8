//! Planted low-rank association problems for testing and benchmarking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{AssociationDataset, Side, SimilaritySet};
use crate::error::Result;
use crate::graph::cosine_similarity_dense;
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone)]
pub struct Planted {
    pub dataset: AssociationDataset,
    /// Cosine similarities of the true latent factors, registered as `s1_d` / `s1_v`.
    pub similarities: SimilaritySet,
    /// The real-valued low-rank matrix before binarization.
    pub latent: DenseMatrix,
}

/// Draws `W (m×rank)` and `H (rank×n)` uniformly from `[0, 1)`, binarizes `W·H` so
/// that cells strictly above its `quantile` become 1, and derives similarities from
/// the rows of `W` and the columns of `H`.
pub fn planted(m: usize, n: usize, rank: usize, quantile: f64, seed: u64) -> Result<Planted> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DenseMatrix::from_fn(m, rank, |_, _| rng.gen::<f64>());
    let h = DenseMatrix::from_fn(rank, n, |_, _| rng.gen::<f64>());
    let latent = w.matmul(&h)?;

    let mut sorted = latent.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = ((sorted.len() as f64 - 1.0) * quantile).round() as usize;
    let threshold = sorted[pos.min(sorted.len() - 1)];
    let y = latent.map(|v| if v > threshold { 1.0 } else { 0.0 });

    let drugs: Vec<String> = (0..m).map(|i| format!("drug{i}")).collect();
    let viruses: Vec<String> = (0..n).map(|j| format!("virus{j}")).collect();
    let dataset = AssociationDataset::new(drugs.clone(), viruses.clone(), y)?;

    let drug_sim = cosine_similarity_dense(drugs, &w)?;
    let virus_sim = cosine_similarity_dense(viruses, &h.transpose())?;
    let mut similarities = SimilaritySet::new();
    similarities.insert(&dataset, Side::Drug, "s1_d", &drug_sim)?;
    similarities.insert(&dataset, Side::Virus, "s1_v", &virus_sim)?;
    Ok(Planted {
        dataset,
        similarities,
        latent,
    })
}

/// Nonnegative `m×n` matrix of exact rank `rank` (almost surely), entries in `[0, rank)`.
pub fn nonnegative_low_rank(m: usize, n: usize, rank: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DenseMatrix::from_fn(m, rank, |_, _| rng.gen::<f64>());
    let h = DenseMatrix::from_fn(rank, n, |_, _| rng.gen::<f64>());
    w.matmul(&h).expect("inner dimensions match")
}
