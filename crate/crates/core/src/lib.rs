//! Multi-graph regularized deep matrix factorization for completing binary
//! association matrices (e.g. drug × virus), solved with a hybrid proximal
//! alternating linearized minimization scheme.
//!
//! The pipeline is: similarity matrices → p-nearest-neighbour sparsification →
//! summed graph Laplacians → [`solver::fit`] → ranking metrics in [`eval`].

pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod solver;
pub mod synthetic;

pub use dataset::{AssociationDataset, Combo, Side, SimilaritySet};
pub use error::{Error, Result};
pub use eval::{EvalReport, FoldRecord, GraphPriors, MeanMetrics};
pub use graph::{FeatureProfile, LaplacianMatrix, SimilarityMatrix};
pub use linalg::DenseMatrix;
pub use solver::{fit, FactorSet, FitResult, HyperParams, Problem, Scheme, SolveTrace};
