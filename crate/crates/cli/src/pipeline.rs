use anyhow::{bail, Context, Result};
use grdmf::eval::{ranking, AblationEntry, EvalReport};
use grdmf::graph::cosine_similarity;
use grdmf::linalg::DenseMatrix;
use grdmf::{fit, AssociationDataset, Combo, FitResult, Problem, Side, SimilaritySet};
use serde::Serialize;

use crate::config::{RunConfig, Source};
use crate::io::{load_association_csv, load_profile_csv, load_similarity_csv};

/// Everything read from disk for one run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub dataset: AssociationDataset,
    pub sims: SimilaritySet,
}

/// Loads and aligns every input named in `cfg`; nothing is computed until all parse.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let dataset = load_association_csv(&cfg.association.path)?;
    let mut sims = SimilaritySet::new();
    let mut add = |side: Side, src: &Source, sim: grdmf::SimilarityMatrix| -> Result<()> {
        sims.insert(&dataset, side, src.name.clone(), &sim)
            .with_context(|| {
                format!(
                    "{}: cannot align with the association file",
                    src.path.display()
                )
            })
    };
    for (side, files, profile) in [
        (Side::Drug, &cfg.drug_sims, &cfg.drug_profile),
        (Side::Virus, &cfg.virus_sims, &cfg.virus_profile),
    ] {
        for src in files {
            add(side, src, load_similarity_csv(&src.path)?)?;
        }
        if let Some(src) = profile {
            add(side, src, cosine_similarity(&load_profile_csv(&src.path)?))?;
        }
    }
    Ok(Inputs { dataset, sims })
}

/// Fits every observed cell with all similarity sources combined.
pub fn fit_full(inputs: &Inputs, cfg: &RunConfig) -> Result<FitResult> {
    let (l_rows, l_cols) = inputs.sims.laplacians(&inputs.sims.all(), cfg.hyper.p)?;
    let y = inputs.dataset.y();
    let mask = DenseMatrix::from_fn(y.rows(), y.cols(), |_, _| 1.0);
    let problem = Problem::new(y, &mask, &l_rows, &l_cols)?;
    let result = fit(problem, &cfg.hyper)?;
    if result.trace.floor_events > 0 {
        log::warn!(
            "{} inner-factor updates needed eigenvalue flooring",
            result.trace.floor_events
        );
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub rank: usize,
    pub drug: String,
    pub score: f64,
    /// Already a known association in the training data.
    pub known: bool,
}

/// Drugs ranked for one virus, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationList {
    pub virus: String,
    pub entries: Vec<Recommendation>,
}

/// Top `k` drugs for `virus` by completed score. Known associations are kept in
/// the ranking; equal scores keep drug registry order.
pub fn predict_topk(
    fit: &FitResult,
    dataset: &AssociationDataset,
    virus: &str,
    k: usize,
) -> Result<RecommendationList> {
    if k == 0 {
        bail!("k must be >= 1");
    }
    let j = dataset
        .virus_index(virus)
        .with_context(|| format!("unknown virus {virus:?}"))?;
    let scores = fit.x.column(j);
    if k > scores.len() {
        log::warn!(
            "k = {k} exceeds the {} drugs; returning the full ranking",
            scores.len()
        );
    }
    let entries = ranking(&scores)
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(r, i)| Recommendation {
            rank: r + 1,
            drug: dataset.drugs()[i].clone(),
            score: scores[i],
            known: dataset.y()[(i, j)] == 1.0,
        })
        .collect();
    Ok(RecommendationList {
        virus: virus.to_string(),
        entries,
    })
}

/// Metrics JSON: the resolved configuration followed by the report fields.
#[derive(Debug, Serialize)]
pub struct CvOutput<'a> {
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub report: &'a EvalReport,
}

#[derive(Debug, Serialize)]
pub struct AblationOutput<'a> {
    pub config: &'a RunConfig,
    pub combos: &'a [AblationEntry],
}

/// One drug and one virus source per combination, then everything together.
pub fn default_combos(sims: &SimilaritySet) -> Vec<Combo> {
    let drugs = sims.names(Side::Drug);
    let viruses = sims.names(Side::Virus);
    let mut combos: Vec<Combo> = drugs
        .iter()
        .flat_map(|d| {
            viruses.iter().map(move |v| Combo {
                drug: vec![d.to_string()],
                virus: vec![v.to_string()],
            })
        })
        .collect();
    let all = sims.all();
    if !combos.contains(&all) {
        combos.push(all);
    }
    combos
}
