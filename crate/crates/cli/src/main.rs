use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use grdmf::eval::{derive_seeds, run_ablation, run_cv, run_loocv};
use grdmf::{Combo, Scheme};
use grdmf_cli::pipeline::{default_combos, AblationOutput, CvOutput};
use grdmf_cli::{fit_full, load_inputs, predict_topk, write_matrix_csv, write_trace_csv, Settings};
use serde::Serialize;

/// Drug–virus association completion with graph-regularized deep matrix factorization.
#[derive(Parser)]
#[command(name = "grdmf", version)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit all known associations; writes x_hat.csv and trace.csv.
    Fit {
        #[command(flatten)]
        settings: Settings,
    },
    /// Rank drugs for the named viruses; writes recommendations.csv.
    Predict {
        #[command(flatten)]
        settings: Settings,
        /// Virus to rank drugs for; repeatable.
        #[arg(long = "virus", required = true)]
        viruses: Vec<String>,
        /// Number of drugs to list per virus.
        #[arg(short, long, default_value_t = 10)]
        k: usize,
    },
    /// Cross-validate; writes cv_<scheme>.json.
    Cv {
        #[arg(value_enum)]
        scheme: CvScheme,
        #[command(flatten)]
        settings: Settings,
    },
    /// Cross-validate each similarity combination; writes ablation.json.
    Ablation {
        #[command(flatten)]
        settings: Settings,
        /// Combination as `DRUG[+DRUG]:VIRUS[+VIRUS]`, e.g. `s1_d+s2_d:s1_v`; repeatable.
        /// Defaults to every single pair plus all sources together.
        #[arg(long = "combo")]
        combos: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CvScheme {
    /// Hide random cells.
    Entries,
    /// Hide whole virus columns.
    Viruses,
    /// Hide whole drug rows.
    Drugs,
    /// Leave one virus out and score the top-k drugs.
    Loo,
}

impl CvScheme {
    fn name(self) -> &'static str {
        match self {
            Self::Entries => "entries",
            Self::Viruses => "viruses",
            Self::Drugs => "drugs",
            Self::Loo => "loo",
        }
    }

    /// Preset used when none is given; leave-one-virus-out shares the column setting.
    fn preset(self) -> Scheme {
        match self {
            Self::Entries => Scheme::Entries,
            Self::Viruses | Self::Loo => Scheme::Viruses,
            Self::Drugs => Scheme::Drugs,
        }
    }
}

fn out_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |v| format!("{v:.4}"))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit { settings } => {
            let cfg = settings.resolve(Scheme::Entries)?;
            let inputs = load_inputs(&cfg)?;
            let result = fit_full(&inputs, &cfg)?;
            let dir = out_dir(&cfg.out)?;
            let ds = &inputs.dataset;
            let x_path = dir.join("x_hat.csv");
            write_matrix_csv(&x_path, "drug", ds.drugs(), ds.viruses(), &result.x)?;
            println!("wrote {}", x_path.display());
            let trace_path = dir.join("trace.csv");
            write_trace_csv(&trace_path, &result.trace.loss)?;
            println!("wrote {}", trace_path.display());
            let loss = &result.trace.loss;
            println!(
                "loss {:.6} -> {:.6} in {} iterations ({:.3}s)",
                loss[0],
                loss[loss.len() - 1],
                loss.len() - 1,
                result.trace.wall_time
            );
        }
        Command::Predict {
            settings,
            viruses,
            k,
        } => {
            let cfg = settings.resolve(Scheme::Entries)?;
            let inputs = load_inputs(&cfg)?;
            // resolve names before fitting
            for v in &viruses {
                inputs
                    .dataset
                    .virus_index(v)
                    .with_context(|| format!("unknown virus {v:?}"))?;
            }
            let result = fit_full(&inputs, &cfg)?;
            let path = out_dir(&cfg.out)?.join("recommendations.csv");
            let mut w = csv::Writer::from_path(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            w.write_record(["virus", "rank", "drug", "score", "known"])?;
            for v in &viruses {
                let list = predict_topk(&result, &inputs.dataset, v, k)?;
                println!("{}", list.virus);
                for e in &list.entries {
                    let mark = if e.known { " (known)" } else { "" };
                    println!("  {:>3}  {:<30} {:.4}{mark}", e.rank, e.drug, e.score);
                    w.write_record([
                        list.virus.clone(),
                        e.rank.to_string(),
                        e.drug.clone(),
                        e.score.to_string(),
                        e.known.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            println!("wrote {}", path.display());
        }
        Command::Cv { scheme, settings } => {
            let cfg = settings.resolve(scheme.preset())?;
            let inputs = load_inputs(&cfg)?;
            let report = match scheme {
                CvScheme::Loo => run_loocv(&inputs.dataset, &inputs.sims, &cfg.hyper, &cfg.ks)?,
                _ => {
                    let seeds = derive_seeds(cfg.seed, cfg.repeats);
                    run_cv(
                        &inputs.dataset,
                        &inputs.sims,
                        scheme.preset(),
                        &cfg.hyper,
                        &seeds,
                    )?
                }
            };
            for note in &report.notes {
                log::warn!("{note}");
            }
            let m = &report.mean;
            println!(
                "{}: AUC {} AUPR {}",
                scheme.name(),
                fmt_opt(m.auc),
                fmt_opt(m.aupr)
            );
            for (k, v) in &m.pre_at_k {
                let rec = fmt_opt(m.rec_at_k.get(k).copied());
                println!("  Pre@{k} {v:.4}  Rec@{k} {rec}");
            }
            let path = out_dir(&cfg.out)?.join(format!("cv_{}.json", scheme.name()));
            write_json(
                &path,
                &CvOutput {
                    config: &cfg,
                    report: &report,
                },
            )?;
        }
        Command::Ablation { settings, combos } => {
            let cfg = settings.resolve(Scheme::Entries)?;
            let inputs = load_inputs(&cfg)?;
            let combos = if combos.is_empty() {
                default_combos(&inputs.sims)
            } else {
                combos
                    .iter()
                    .map(|c| Combo::parse(c))
                    .collect::<grdmf::Result<_>>()?
            };
            let seeds = derive_seeds(cfg.seed, cfg.repeats);
            let entries = run_ablation(&inputs.dataset, &inputs.sims, &combos, &cfg.hyper, &seeds)?;
            for e in &entries {
                println!(
                    "{:<30} AUC {}  AUPR {}",
                    e.label,
                    fmt_opt(e.report.mean.auc),
                    fmt_opt(e.report.mean.aupr)
                );
            }
            let path = out_dir(&cfg.out)?.join("ablation.json");
            write_json(
                &path,
                &AblationOutput {
                    config: &cfg,
                    combos: &entries,
                },
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
