//! Evaluation protocol: cross-validation over hidden cells, rows or columns,
//! leave-one-virus-out ranking, and similarity ablations.
//!
//! Folds are independent and run in parallel; results are gathered in
//! `(seed, fold)` order so reports do not depend on scheduling.

mod metrics;
mod split;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use metrics::{auc, aupr, ranking, topk_metrics, TopK};
pub use split::{folds_for_fraction, split_axis, split_entries, Axis, FoldSplit};

use crate::dataset::{AssociationDataset, Combo, SimilaritySet};
use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::linalg::DenseMatrix;
use crate::solver::{fit, HyperParams, Problem, Scheme};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_REPEATS: usize = 10;

/// Produces a completed score matrix from a masked training problem.
pub trait Predictor: Sync {
    fn predict(&self, problem: Problem<'_>) -> Result<DenseMatrix>;
}

impl<F> Predictor for F
where
    F: Fn(Problem<'_>) -> Result<DenseMatrix> + Sync,
{
    fn predict(&self, problem: Problem<'_>) -> Result<DenseMatrix> {
        self(problem)
    }
}

/// The deep factorization model.
#[derive(Debug, Clone)]
pub struct GrdmfPredictor {
    pub hp: HyperParams,
}

impl Predictor for GrdmfPredictor {
    fn predict(&self, problem: Problem<'_>) -> Result<DenseMatrix> {
        Ok(fit(problem, &self.hp)?.x)
    }
}

/// Row and column Laplacians used by every fold.
#[derive(Debug, Clone)]
pub struct GraphPriors {
    pub l_rows: LaplacianMatrix,
    pub l_cols: LaplacianMatrix,
}

impl GraphPriors {
    pub fn from_similarities(sims: &SimilaritySet, combo: &Combo, p: usize) -> Result<Self> {
        let (l_rows, l_cols) = sims.laplacians(combo, p)?;
        Ok(Self { l_rows, l_cols })
    }
}

/// Metrics of one fold (CV) or one held-out virus (LOOCV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub fold_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virus: Option<String>,
    pub hidden: usize,
    pub positives: usize,
    pub auc: Option<f64>,
    pub aupr: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub pre_at_k: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub rec_at_k: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub auc: Option<f64>,
    pub aupr: Option<f64>,
    pub pre_at_k: BTreeMap<usize, f64>,
    pub rec_at_k: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `entries`, `viruses`, `drugs` or `loo`.
    pub scheme: String,
    pub seeds: Vec<u64>,
    pub folds: Vec<FoldRecord>,
    pub mean: MeanMetrics,
    /// Skipped folds and other non-fatal conditions.
    pub notes: Vec<String>,
}

pub fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Entries => "entries",
        Scheme::Viruses => "viruses",
        Scheme::Drugs => "drugs",
    }
}

/// Deterministic per-repetition seeds derived from a base seed.
pub fn derive_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
        .collect()
}

pub fn split_for(
    scheme: Scheme,
    rows: usize,
    cols: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    match scheme {
        Scheme::Entries => split_entries(rows, cols, folds, seed),
        Scheme::Viruses => split_axis(rows, cols, Axis::Cols, folds, seed),
        Scheme::Drugs => split_axis(rows, cols, Axis::Rows, folds, seed),
    }
}

/// Training copy of `y` and its mask with `hidden` cells removed from both.
pub fn masked_training(y: &DenseMatrix, hidden: &[(usize, usize)]) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = y.shape();
    let mut mask = DenseMatrix::from_fn(m, n, |_, _| 1.0);
    let mut train = y.clone();
    for &(i, j) in hidden {
        mask[(i, j)] = 0.0;
        train[(i, j)] = 0.0;
    }
    (train, mask)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Cross-validation with the deep factorization model over every registered
/// similarity, one repetition per seed.
pub fn run_cv(
    dataset: &AssociationDataset,
    sims: &SimilaritySet,
    scheme: Scheme,
    hp: &HyperParams,
    seeds: &[u64],
) -> Result<EvalReport> {
    let priors = GraphPriors::from_similarities(sims, &sims.all(), hp.p)?;
    let predictor = GrdmfPredictor { hp: hp.clone() };
    run_cv_with(dataset, &priors, scheme, &predictor, seeds, DEFAULT_FOLDS)
}

/// Cross-validation with an arbitrary predictor.
///
/// Every fold hides its cells in both the mask and the training copy of `Y`, fits,
/// and scores the hidden cells against their true labels. Folds whose hidden labels
/// are single-class are skipped and noted.
pub fn run_cv_with<P: Predictor>(
    dataset: &AssociationDataset,
    priors: &GraphPriors,
    scheme: Scheme,
    predictor: &P,
    seeds: &[u64],
    folds: usize,
) -> Result<EvalReport> {
    if seeds.is_empty() {
        return Err(Error::param("at least one seed required"));
    }
    let y = dataset.y();
    let (m, n) = y.shape();
    let jobs: Vec<(u64, FoldSplit)> = seeds
        .iter()
        .map(|&seed| {
            split_for(scheme, m, n, folds, seed).map(|s| s.into_iter().map(move |f| (seed, f)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let outcomes: Vec<(FoldRecord, Option<String>)> = jobs
        .par_iter()
        .map(|(seed, split)| {
            let (train, mask) = masked_training(y, &split.hidden_cells);
            let problem = Problem::new(&train, &mask, &priors.l_rows, &priors.l_cols)?;
            let scores_full = predictor
                .predict(problem)
                .map_err(|e| Error::Config(format!("seed {seed} fold {}: {e}", split.fold_id)))?;
            let scores: Vec<f64> = split.hidden_cells.iter().map(|&c| scores_full[c]).collect();
            let labels: Vec<bool> = split.hidden_cells.iter().map(|&c| y[c] == 1.0).collect();
            let positives = labels.iter().filter(|&&l| l).count();
            let (auc_v, aupr_v, note) = match (auc(&scores, &labels), aupr(&scores, &labels)) {
                (Ok(a), Ok(p)) => (Some(a), Some(p), None),
                (Err(e), _) | (_, Err(e)) => {
                    let note = format!("seed {seed} fold {} skipped: {e}", split.fold_id);
                    log::warn!("{note}");
                    (None, None, Some(note))
                }
            };
            Ok((
                FoldRecord {
                    seed: Some(*seed),
                    fold_id: split.fold_id,
                    virus: None,
                    hidden: split.hidden_cells.len(),
                    positives,
                    auc: auc_v,
                    aupr: aupr_v,
                    pre_at_k: BTreeMap::new(),
                    rec_at_k: BTreeMap::new(),
                },
                note,
            ))
        })
        .collect::<Result<_>>()?;

    let (records, notes): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let mean = MeanMetrics {
        auc: mean(records.iter().filter_map(|r| r.auc)),
        aupr: mean(records.iter().filter_map(|r| r.aupr)),
        ..MeanMetrics::default()
    };
    Ok(EvalReport {
        scheme: scheme_name(scheme).to_string(),
        seeds: seeds.to_vec(),
        folds: records,
        mean,
        notes: notes.into_iter().flatten().collect(),
    })
}

/// Leave-one-virus-out ranking with the deep factorization model.
pub fn run_loocv(
    dataset: &AssociationDataset,
    sims: &SimilaritySet,
    hp: &HyperParams,
    ks: &[usize],
) -> Result<EvalReport> {
    let priors = GraphPriors::from_similarities(sims, &sims.all(), hp.p)?;
    run_loocv_with(dataset, &priors, &GrdmfPredictor { hp: hp.clone() }, ks)
}

/// Hides each virus column in turn, ranks all drugs for it and scores Pre@k and
/// Rec@k against the held-out positives.
///
/// Precision is averaged over all viruses; recall only over viruses with at least
/// one known positive.
pub fn run_loocv_with<P: Predictor>(
    dataset: &AssociationDataset,
    priors: &GraphPriors,
    predictor: &P,
    ks: &[usize],
) -> Result<EvalReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::param("ks must be non-empty and positive"));
    }
    let y = dataset.y();
    let (m, n) = y.shape();
    let records: Vec<FoldRecord> = (0..n)
        .into_par_iter()
        .map(|j| {
            let hidden: Vec<(usize, usize)> = (0..m).map(|i| (i, j)).collect();
            let (train, mask) = masked_training(y, &hidden);
            let problem = Problem::new(&train, &mask, &priors.l_rows, &priors.l_cols)?;
            let scores_full = predictor.predict(problem)?;
            let scores = scores_full.column(j);
            let labels: Vec<bool> = y.column(j).iter().map(|&v| v == 1.0).collect();
            let positives = labels.iter().filter(|&&l| l).count();
            let mut pre_at_k = BTreeMap::new();
            let mut rec_at_k = BTreeMap::new();
            for &k in ks {
                let t = topk_metrics(&scores, &labels, k)?;
                pre_at_k.insert(k, t.precision);
                if let Some(r) = t.recall {
                    rec_at_k.insert(k, r);
                }
            }
            Ok(FoldRecord {
                seed: None,
                fold_id: j,
                virus: Some(dataset.viruses()[j].clone()),
                hidden: m,
                positives,
                auc: None,
                aupr: None,
                pre_at_k,
                rec_at_k,
            })
        })
        .collect::<Result<_>>()?;

    let notes = records
        .iter()
        .filter(|r| r.positives == 0)
        .map(|r| {
            format!(
                "virus {} has no known positives; excluded from recall means",
                r.virus.as_deref().unwrap_or("?")
            )
        })
        .collect();
    let mut mean_m = MeanMetrics::default();
    for &k in ks {
        if let Some(v) = mean(records.iter().filter_map(|r| r.pre_at_k.get(&k).copied())) {
            mean_m.pre_at_k.insert(k, v);
        }
        if let Some(v) = mean(records.iter().filter_map(|r| r.rec_at_k.get(&k).copied())) {
            mean_m.rec_at_k.insert(k, v);
        }
    }
    Ok(EvalReport {
        scheme: "loo".to_string(),
        seeds: Vec::new(),
        folds: records,
        mean: mean_m,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub combo: Combo,
    pub label: String,
    pub report: EvalReport,
}

/// Entry-wise cross-validation once per similarity combination.
pub fn run_ablation(
    dataset: &AssociationDataset,
    sims: &SimilaritySet,
    combos: &[Combo],
    hp: &HyperParams,
    seeds: &[u64],
) -> Result<Vec<AblationEntry>> {
    let predictor = GrdmfPredictor { hp: hp.clone() };
    combos
        .iter()
        .map(|combo| {
            let priors = GraphPriors::from_similarities(sims, combo, hp.p)?;
            let report = run_cv_with(
                dataset,
                &priors,
                Scheme::Entries,
                &predictor,
                seeds,
                DEFAULT_FOLDS,
            )?;
            Ok(AblationEntry {
                combo: combo.clone(),
                label: combo.label(),
                report,
            })
        })
        .collect()
}
