//! Seeded inputs shared by the benchmarks.

use grdmf::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform entries in [-1, 1).
pub fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// GᵀG + I, so the smallest eigenvalue is at least 1.
pub fn spd(n: usize, seed: u64) -> DenseMatrix {
    let g = random(n, n, seed);
    g.t_matmul(&g).expect("square").add_diag(1.0)
}
