//! Ranking metrics over (score, binary label) lists.

use crate::error::{Error, Result};

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::param(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Indices by descending score; equal scores keep their input order.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Area under the ROC curve in its Mann–Whitney form: the probability that a random
/// positive outscores a random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both positive and negative labels",
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of (1-based, tie-averaged) ranks of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += avg_rank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// Average precision: mean, over positives in ranked order, of the precision at
/// each positive's rank.
pub fn aupr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::UndefinedMetric(
            "AUPR needs at least one positive label",
        ));
    }
    let mut hits = 0usize;
    let mut acc = 0.0;
    for (rank, &i) in ranking(scores).iter().enumerate() {
        if labels[i] {
            hits += 1;
            acc += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(acc / positives as f64)
}

/// Precision and recall restricted to the `k` best-scored items.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopK {
    pub precision: f64,
    /// `None` when there are no positives.
    pub recall: Option<f64>,
    /// Effective cutoff after clamping to the list length.
    pub k: usize,
    pub clamped: bool,
}

pub fn topk_metrics(scores: &[f64], labels: &[bool], k: usize) -> Result<TopK> {
    check_lengths(scores, labels)?;
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    if scores.is_empty() {
        return Err(Error::UndefinedMetric("top-k of an empty list"));
    }
    let clamped = k > scores.len();
    let k_eff = k.min(scores.len());
    if clamped {
        log::warn!("top-k cutoff {k} clamped to list length {k_eff}");
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let hits = ranking(scores)
        .iter()
        .take(k_eff)
        .filter(|&&i| labels[i])
        .count();
    Ok(TopK {
        precision: hits as f64 / k_eff as f64,
        recall: (positives > 0).then(|| hits as f64 / positives as f64),
        k: k_eff,
        clamped,
    })
}
