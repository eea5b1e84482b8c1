//! JSON problem files.

use std::path::Path;

use mimo_pnc::{Complex64, MatrixC, RateMode, TwoWayNetwork};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Capacity {
    Finite(f64),
    Named(String),
}

impl Capacity {
    fn value(&self) -> Result<f64, Failure> {
        match self {
            Capacity::Finite(c) => Ok(*c),
            Capacity::Named(s) if s == "inf" => Ok(f64::INFINITY),
            Capacity::Named(s) => Err(Failure::input(format!(
                "c_common must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// Problem description as stored on disk. Matrices are row lists of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub h1: Vec<Vec<[f64; 2]>>,
    pub h2: Vec<Vec<[f64; 2]>>,
    pub power: f64,
    pub c_common: Capacity,
    #[serde(default)]
    pub orders: Option<Vec<u32>>,
    #[serde(default)]
    pub block_length: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: Option<RateMode>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn matrix(name: &str, rows: &[Vec<[f64; 2]>]) -> Result<MatrixC, Failure> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    MatrixC::from_rows(&rows).map_err(|e| Failure::input(format!("{name}: {e}")))
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    pub fn network(&self) -> Result<TwoWayNetwork, Failure> {
        let h1 = matrix("h1", &self.h1)?;
        let h2 = matrix("h2", &self.h2)?;
        if h1.rows() != h2.rows() {
            return Err(Failure::input(format!(
                "h1 has {} rows but h2 has {}",
                h1.rows(),
                h2.rows()
            )));
        }
        Ok(TwoWayNetwork::new(
            h1,
            h2,
            self.power,
            self.c_common.value()?,
        )?)
    }
}
