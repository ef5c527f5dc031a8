//! Run configuration: a TOML file and command-line flags merged into one
//! resolved [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use grdmf::{HyperParams, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Inputs and hyperparameters as given by the user; every field optional.
///
/// Used both as the flag set of each subcommand and as the schema of the
/// `--config` file. Flags take precedence over the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file supplying any of these settings.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Association CSV: drugs × viruses, binary.
    #[arg(long, value_name = "FILE")]
    pub association: Option<PathBuf>,

    /// Drug similarity CSV as `[NAME=]FILE`; repeatable.
    #[arg(long = "drug-sim", value_name = "[NAME=]FILE")]
    #[serde(default)]
    pub drug_sim: Vec<String>,

    /// Virus similarity CSV as `[NAME=]FILE`; repeatable.
    #[arg(long = "virus-sim", value_name = "[NAME=]FILE")]
    #[serde(default)]
    pub virus_sim: Vec<String>,

    /// Drug × class profile CSV, turned into a cosine similarity.
    #[arg(long = "drug-profile", value_name = "[NAME=]FILE")]
    pub drug_profile: Option<String>,

    /// Virus × symptom profile CSV, turned into a cosine similarity.
    #[arg(long = "virus-profile", value_name = "[NAME=]FILE")]
    pub virus_profile: Option<String>,

    /// Tuned preset to start from: entries, viruses or drugs.
    #[arg(long, value_name = "SCHEME")]
    pub preset: Option<String>,

    /// Number of factor layers for the preset (2 or 3).
    #[arg(long)]
    pub layers: Option<usize>,

    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Neighbours kept per entity when sparsifying similarities.
    #[arg(long)]
    pub p: Option<usize>,
    /// Latent sizes, e.g. `17,15`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub iters: Option<usize>,

    /// Cutoffs for precision and recall at k, e.g. `5,10`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub ks: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cross-validation repetitions.
    #[arg(long)]
    pub repeats: Option<usize>,

    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// An input file with its content digest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Source {
    pub name: String,
    pub path: PathBuf,
    pub sha256: String,
}

/// Fully resolved settings, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub association: Source,
    pub drug_sims: Vec<Source>,
    pub virus_sims: Vec<Source>,
    pub drug_profile: Option<Source>,
    pub virus_profile: Option<Source>,
    pub hyper: HyperParams,
    pub ks: Vec<usize>,
    pub seed: u64,
    pub repeats: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

pub const DEFAULT_KS: [usize; 2] = [5, 10];
pub const DEFAULT_SEED: u64 = 0;

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    match s {
        "entries" => Ok(Scheme::Entries),
        "viruses" => Ok(Scheme::Viruses),
        "drugs" => Ok(Scheme::Drugs),
        other => bail!("unknown scheme {other:?}: expected entries, viruses or drugs"),
    }
}

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Splits `NAME=FILE`; a bare `FILE` gets `default_name`.
fn named(spec: &str, default_name: String) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path))
            if !name.is_empty() && !name.contains(['/', '\\']) && !path.is_empty() =>
        {
            (name.to_string(), PathBuf::from(path))
        }
        _ => (default_name, PathBuf::from(spec)),
    }
}

fn source(name: String, path: PathBuf) -> Result<Source> {
    let sha256 = digest(&path)?;
    Ok(Source { name, path, sha256 })
}

impl Settings {
    /// Reads a TOML settings file; relative paths in it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut s: Self =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &Path| {
            if p.is_relative() {
                base.join(p)
            } else {
                p.to_path_buf()
            }
        };
        let rebase_spec = |spec: &str| {
            let (name, p) = spec
                .split_once('=')
                .filter(|(n, _)| !n.contains(['/', '\\']))
                .map_or((None, spec), |(n, p)| (Some(n), p));
            let p = rebase(Path::new(p)).display().to_string();
            name.map_or(p.clone(), |n| format!("{n}={p}"))
        };
        s.association = s.association.as_deref().map(rebase);
        s.out = s.out.as_deref().map(rebase);
        s.drug_sim = s.drug_sim.iter().map(|x| rebase_spec(x)).collect();
        s.virus_sim = s.virus_sim.iter().map(|x| rebase_spec(x)).collect();
        s.drug_profile = s.drug_profile.as_deref().map(rebase_spec);
        s.virus_profile = s.virus_profile.as_deref().map(rebase_spec);
        Ok(s)
    }

    /// `self` with every unset field taken from `base`.
    pub fn over(self, base: Settings) -> Settings {
        fn vec_or<T>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        Settings {
            config: self.config.or(base.config),
            association: self.association.or(base.association),
            drug_sim: vec_or(self.drug_sim, base.drug_sim),
            virus_sim: vec_or(self.virus_sim, base.virus_sim),
            drug_profile: self.drug_profile.or(base.drug_profile),
            virus_profile: self.virus_profile.or(base.virus_profile),
            preset: self.preset.or(base.preset),
            layers: self.layers.or(base.layers),
            mu: self.mu.or(base.mu),
            theta: self.theta.or(base.theta),
            alpha: self.alpha.or(base.alpha),
            p: self.p.or(base.p),
            dims: vec_or(self.dims, base.dims),
            iters: self.iters.or(base.iters),
            ks: vec_or(self.ks, base.ks),
            seed: self.seed.or(base.seed),
            repeats: self.repeats.or(base.repeats),
            out: self.out.or(base.out),
        }
    }

    /// Merges in the `--config` file, if any, then resolves. `default_preset` is
    /// used when neither source names one.
    pub fn resolve(self, default_preset: Scheme) -> Result<RunConfig> {
        let merged = match &self.config {
            Some(path) => {
                let file = Self::from_file(path)?;
                self.over(file)
            }
            None => self,
        };
        merged.into_run_config(default_preset)
    }

    fn hyper(&self, default_preset: Scheme) -> Result<HyperParams> {
        let scheme = match &self.preset {
            Some(s) => parse_scheme(s)?,
            None => default_preset,
        };
        let layers = match (self.layers, self.dims.len()) {
            (Some(l), 0) => l,
            (Some(l), d) if l != d => bail!("--layers {l} conflicts with {d} dims"),
            (_, 0) => 2,
            (_, d) => d,
        };
        // presets exist for 2 and 3 layers; deeper models need explicit dims
        let mut hp = match HyperParams::preset(scheme, layers) {
            Ok(hp) => hp,
            Err(_) if !self.dims.is_empty() => HyperParams {
                dims: self.dims.clone(),
                ..HyperParams::preset(scheme, 2)?
            },
            Err(e) => return Err(e.into()),
        };
        if let Some(v) = self.mu {
            hp.mu = v;
        }
        if let Some(v) = self.theta {
            hp.theta = v;
        }
        if let Some(v) = self.alpha {
            hp.alpha = v;
        }
        if let Some(v) = self.p {
            hp.p = v;
        }
        if !self.dims.is_empty() {
            hp.dims = self.dims.clone();
        }
        if let Some(v) = self.iters {
            hp.iters = v;
        }
        hp.validate()?;
        Ok(hp)
    }

    fn into_run_config(self, default_preset: Scheme) -> Result<RunConfig> {
        let hyper = self.hyper(default_preset)?;
        let association = self
            .association
            .clone()
            .context("no association file given (--association)")?;

        let side = |files: &[String], profile: &Option<String>, suffix: &str| -> Result<_> {
            let mut sims = Vec::new();
            for (i, spec) in files.iter().enumerate() {
                let (name, path) = named(spec, format!("s{}_{suffix}", i + 1));
                sims.push(source(name, path)?);
            }
            let profile = match profile {
                Some(spec) => {
                    let (name, path) = named(spec, format!("s{}_{suffix}", files.len() + 1));
                    Some(source(name, path)?)
                }
                None => None,
            };
            if sims.is_empty() && profile.is_none() {
                let flag = if suffix == "d" { "drug" } else { "virus" };
                bail!("no {flag} similarity source: give --{flag}-sim or --{flag}-profile");
            }
            Ok((sims, profile))
        };
        let (drug_sims, drug_profile) = side(&self.drug_sim, &self.drug_profile, "d")?;
        let (virus_sims, virus_profile) = side(&self.virus_sim, &self.virus_profile, "v")?;

        let ks = if self.ks.is_empty() {
            DEFAULT_KS.to_vec()
        } else {
            self.ks.clone()
        };
        if ks.contains(&0) {
            bail!("ks must be positive");
        }
        let repeats = self.repeats.unwrap_or(grdmf::eval::DEFAULT_REPEATS);
        if repeats == 0 {
            bail!("repeats must be >= 1");
        }
        Ok(RunConfig {
            association: source("association".into(), association)?,
            drug_sims,
            virus_sims,
            drug_profile,
            virus_profile,
            hyper,
            ks,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            repeats,
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
