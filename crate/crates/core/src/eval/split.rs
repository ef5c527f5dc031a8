//! Cross-validation partitions of matrix cells.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cells hidden in one fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_id: usize,
    /// `(row, col)` pairs, sorted.
    pub hidden_cells: Vec<(usize, usize)>,
}

/// Which axis whole lines are hidden along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// Number of folds that hides `fraction` of the data per fold.
pub fn folds_for_fraction(fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("fraction {fraction} outside (0, 1)")));
    }
    let folds = (1.0 / fraction).round() as usize;
    if folds < 2 {
        return Err(Error::param(format!(
            "fraction {fraction} gives fewer than 2 folds"
        )));
    }
    Ok(folds)
}

/// Shuffles `0..len` with the seed and cuts it into `folds` contiguous groups whose
/// sizes differ by at most one.
fn partition(len: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = len / folds;
    let extra = len % folds;
    let mut groups = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut g = idx[start..start + size].to_vec();
        g.sort_unstable();
        groups.push(g);
        start += size;
    }
    groups
}

/// Random partition of all `rows × cols` cells into `folds` groups.
pub fn split_entries(rows: usize, cols: usize, folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    let cells = rows * cols;
    if folds < 2 || folds > cells {
        return Err(Error::param(format!("{folds} folds for {cells} cells")));
    }
    Ok(partition(cells, folds, seed)
        .into_iter()
        .enumerate()
        .map(|(fold_id, group)| FoldSplit {
            fold_id,
            hidden_cells: group.into_iter().map(|c| (c / cols, c % cols)).collect(),
        })
        .collect())
}

/// Random partition of whole rows or columns into `folds` groups; a fold hides every
/// cell of its lines.
pub fn split_axis(
    rows: usize,
    cols: usize,
    axis: Axis,
    folds: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    let len = match axis {
        Axis::Rows => rows,
        Axis::Cols => cols,
    };
    if folds < 2 || folds > len {
        return Err(Error::param(format!(
            "{folds} folds for an axis of length {len}"
        )));
    }
    Ok(partition(len, folds, seed)
        .into_iter()
        .enumerate()
        .map(|(fold_id, lines)| {
            let mut hidden_cells: Vec<(usize, usize)> = match axis {
                Axis::Rows => lines
                    .iter()
                    .flat_map(|&i| (0..cols).map(move |j| (i, j)))
                    .collect(),
                Axis::Cols => lines
                    .iter()
                    .flat_map(|&j| (0..rows).map(move |i| (i, j)))
                    .collect(),
            };
            hidden_cells.sort_unstable();
            FoldSplit {
                fold_id,
                hidden_cells,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn check_partition(splits: &[FoldSplit], universe: usize) {
        let mut seen = HashSet::new();
        for s in splits {
            for &c in &s.hidden_cells {
                assert!(seen.insert(c), "duplicate cell {c:?}");
            }
        }
        assert_eq!(seen.len(), universe);
    }

    #[test]
    fn entries_exact_partition() {
        let s = split_entries(10, 10, 10, 7).unwrap();
        assert!(s.iter().all(|f| f.hidden_cells.len() == 10));
        check_partition(&s, 100);
        assert_eq!(s, split_entries(10, 10, 10, 7).unwrap());
        assert_ne!(s, split_entries(10, 10, 10, 8).unwrap());
    }

    #[test]
    fn entries_dva_shape_counts() {
        let s = split_entries(86, 23, 10, 1).unwrap();
        // 1978 = 8 * 198 + 2 * 197
        let sizes: Vec<usize> = s.iter().map(|f| f.hidden_cells.len()).collect();
        assert_eq!(sizes.iter().filter(|&&n| n == 198).count(), 8);
        assert_eq!(sizes.iter().filter(|&&n| n == 197).count(), 2);
        check_partition(&s, 1978);
    }

    #[test]
    fn axis_counts() {
        let s = split_axis(86, 23, Axis::Cols, 10, 3).unwrap();
        for f in &s {
            let cols: HashSet<usize> = f.hidden_cells.iter().map(|c| c.1).collect();
            assert!(cols.len() == 2 || cols.len() == 3);
            assert_eq!(f.hidden_cells.len(), cols.len() * 86);
        }
        check_partition(&s, 86 * 23);

        let s = split_axis(86, 23, Axis::Rows, 10, 3).unwrap();
        for f in &s {
            let rows: HashSet<usize> = f.hidden_cells.iter().map(|c| c.0).collect();
            assert!(rows.len() == 8 || rows.len() == 9);
        }
        assert!(split_axis(86, 23, Axis::Cols, 24, 3).is_err());
    }

    #[test]
    fn hiding_a_column_hides_all_its_rows() {
        let s = split_axis(4, 2, Axis::Cols, 2, 0).unwrap();
        for f in &s {
            let j = f.hidden_cells[0].1;
            assert_eq!(f.hidden_cells, (0..4).map(|i| (i, j)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fraction_to_folds() {
        assert_eq!(folds_for_fraction(0.1).unwrap(), 10);
        assert_eq!(folds_for_fraction(0.2).unwrap(), 5);
        assert!(folds_for_fraction(0.0).is_err());
        assert!(folds_for_fraction(0.9).is_err());
    }
}
