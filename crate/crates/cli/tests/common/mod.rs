#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grdmf::synthetic::planted;
use grdmf::Side;
use grdmf_cli::{write_association_csv, write_matrix_csv};

/// Paths of a planted dataset written as CSV files.
pub struct Fixture {
    pub association: PathBuf,
    pub drug_sim: PathBuf,
    pub virus_sim: PathBuf,
}

pub fn write_planted(dir: &Path, m: usize, n: usize, seed: u64) -> Fixture {
    let pl = planted(m, n, 3, 0.7, seed).unwrap();
    let association = dir.join("assoc.csv");
    write_association_csv(&association, &pl.dataset).unwrap();
    let sim_file = |side: Side, name: &str, file: &str| {
        let path = dir.join(file);
        let s = pl.similarities.get(side, name).unwrap();
        write_matrix_csv(&path, "", s.entities(), s.entities(), s.values()).unwrap();
        path
    };
    Fixture {
        drug_sim: sim_file(Side::Drug, "s1_d", "drug_sim.csv"),
        virus_sim: sim_file(Side::Virus, "s1_v", "virus_sim.csv"),
        association,
    }
}

pub fn grdmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grdmf"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
