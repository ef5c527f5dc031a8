//! Association matrices and the named similarity sources attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ensure_unique, summed_laplacian, LaplacianMatrix, SimilarityMatrix};
use crate::linalg::DenseMatrix;

/// Binary drug × virus association matrix with its name registries.
#[derive(Debug, Clone)]
pub struct AssociationDataset {
    drugs: Vec<String>,
    viruses: Vec<String>,
    y: DenseMatrix,
}

impl AssociationDataset {
    pub fn new(drugs: Vec<String>, viruses: Vec<String>, y: DenseMatrix) -> Result<Self> {
        if y.shape() != (drugs.len(), viruses.len()) {
            return Err(Error::DimensionMismatch {
                op: "association",
                expected: (drugs.len(), viruses.len()),
                got: y.shape(),
            });
        }
        if let Some(pos) = y.as_slice().iter().position(|&v| v != 0.0 && v != 1.0) {
            let n = viruses.len().max(1);
            return Err(Error::Config(format!(
                "association entry ({}, {}) is not binary",
                pos / n,
                pos % n
            )));
        }
        ensure_unique(&drugs)?;
        ensure_unique(&viruses)?;
        Ok(Self { drugs, viruses, y })
    }

    pub fn drugs(&self) -> &[String] {
        &self.drugs
    }

    pub fn viruses(&self) -> &[String] {
        &self.viruses
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn shape(&self) -> (usize, usize) {
        self.y.shape()
    }

    pub fn virus_index(&self, name: &str) -> Option<usize> {
        self.viruses.iter().position(|v| v == name)
    }

    pub fn drug_index(&self, name: &str) -> Option<usize> {
        self.drugs.iter().position(|d| d == name)
    }
}

/// Which entity axis a similarity describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Drug,
    Virus,
}

/// Named drug- and virus-side similarity matrices, aligned to a dataset's registries.
#[derive(Debug, Clone, Default)]
pub struct SimilaritySet {
    drug: Vec<(String, SimilarityMatrix)>,
    virus: Vec<(String, SimilarityMatrix)>,
}

/// A selection of similarity names, e.g. `s1_d+s2_d` with `s1_v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combo {
    pub drug: Vec<String>,
    pub virus: Vec<String>,
}

impl Combo {
    /// Parses `"s1_d+s2_d:s1_v"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (d, v) = spec.split_once(':').ok_or_else(|| {
            Error::Config(format!(
                "combo {spec:?}: expected DRUG[+DRUG]:VIRUS[+VIRUS]"
            ))
        })?;
        let split = |s: &str| -> Vec<String> {
            s.split('+')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(String::from)
                .collect()
        };
        let combo = Self {
            drug: split(d),
            virus: split(v),
        };
        if combo.drug.is_empty() || combo.virus.is_empty() {
            return Err(Error::Config(format!(
                "combo {spec:?} must name at least one drug and one virus similarity"
            )));
        }
        Ok(combo)
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.drug.join("+"), self.virus.join("+"))
    }
}

impl SimilaritySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a similarity, reordering it to match `dataset`'s registry for `side`.
    pub fn insert(
        &mut self,
        dataset: &AssociationDataset,
        side: Side,
        name: impl Into<String>,
        sim: &SimilarityMatrix,
    ) -> Result<()> {
        let name = name.into();
        if self.names(side).iter().any(|n| *n == name) {
            return Err(Error::Config(format!("duplicate similarity name {name:?}")));
        }
        let registry = match side {
            Side::Drug => dataset.drugs(),
            Side::Virus => dataset.viruses(),
        };
        let aligned = align(sim, registry)?;
        match side {
            Side::Drug => self.drug.push((name, aligned)),
            Side::Virus => self.virus.push((name, aligned)),
        }
        Ok(())
    }

    pub fn names(&self, side: Side) -> Vec<&str> {
        let list = match side {
            Side::Drug => &self.drug,
            Side::Virus => &self.virus,
        };
        list.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// The registered matrix called `name`, aligned to the dataset.
    pub fn get(&self, side: Side, name: &str) -> Option<&SimilarityMatrix> {
        let list = match side {
            Side::Drug => &self.drug,
            Side::Virus => &self.virus,
        };
        list.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Combo selecting every registered source.
    pub fn all(&self) -> Combo {
        Combo {
            drug: self.drug.iter().map(|(n, _)| n.clone()).collect(),
            virus: self.virus.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    fn select<'s>(
        list: &'s [(String, SimilarityMatrix)],
        names: &[String],
    ) -> Result<Vec<&'s SimilarityMatrix>> {
        if names.is_empty() {
            return Err(Error::Config("empty similarity selection".into()));
        }
        names
            .iter()
            .map(|n| {
                list.iter()
                    .find(|(k, _)| k == n)
                    .map(|(_, s)| s)
                    .ok_or_else(|| Error::Config(format!("unknown similarity {n:?}")))
            })
            .collect()
    }

    /// Summed, p-NN sparsified Laplacians `(L_d, L_v)` for `combo`.
    pub fn laplacians(
        &self,
        combo: &Combo,
        p: usize,
    ) -> Result<(LaplacianMatrix, LaplacianMatrix)> {
        let drug = Self::select(&self.drug, &combo.drug)?;
        let virus = Self::select(&self.virus, &combo.virus)?;
        Ok((summed_laplacian(drug, p)?, summed_laplacian(virus, p)?))
    }
}

fn align(sim: &SimilarityMatrix, registry: &[String]) -> Result<SimilarityMatrix> {
    if sim.entities() == registry {
        return Ok(sim.clone());
    }
    if sim.len() != registry.len() {
        return Err(Error::Config(format!(
            "similarity covers {} entities, registry has {}",
            sim.len(),
            registry.len()
        )));
    }
    let index: Vec<usize> = registry
        .iter()
        .map(|name| {
            sim.entities()
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| Error::Config(format!("similarity lacks entity {name:?}")))
        })
        .collect::<Result<_>>()?;
    let values = sim.values();
    let n = registry.len();
    let reordered = DenseMatrix::from_fn(n, n, |i, j| values[(index[i], index[j])]);
    SimilarityMatrix::new(registry.to_vec(), reordered)
}
