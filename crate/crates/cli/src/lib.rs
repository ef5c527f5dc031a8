//! File formats, configuration and orchestration behind the `grdmf` binary.

pub mod config;
pub mod io;
pub mod pipeline;

pub use config::{RunConfig, Settings, Source};
pub use io::{
    load_association_csv, load_profile_csv, load_similarity_csv, write_association_csv,
    write_matrix_csv, write_trace_csv,
};
pub use pipeline::{
    fit_full, load_inputs, predict_topk, Inputs, Recommendation, RecommendationList,
};
