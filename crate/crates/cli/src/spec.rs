//! Gate specification files (TOML).
//!
//! Either a catalog entry
//!
//! ```toml
//! gate = "phase"
//! gamma = 3.141592653589793
//! ```
//!
//! or an explicit matrix of `[re, im]` pairs, one inner list per row
//!
//! ```toml
//! label = "swap-ish"
//! matrix = [[[0.0, 0.0], [1.0, 0.0]],
//!           [[1.0, 0.0], [0.0, 0.0]]]
//! ```
//!
//! with optional `phases = [...]` (one φ per mode) and `tolerance`.

use holonomic_core::matcore::{c, CMatrix};
use holonomic_core::synthesis::{gate_catalog, CatalogParams, TOL_SYNTHESIS};
use holonomic_core::UnitaryGate;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GateSpecFile {
    pub gate: Option<String>,
    pub k: Option<usize>,
    pub gamma: Option<f64>,
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    pub label: Option<String>,
    pub phases: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ResolvedSpec {
    pub gate: UnitaryGate,
    pub phases: Option<Vec<f64>>,
    pub tolerance: f64,
}

impl GateSpecFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("gate spec: {e}")))
    }

    pub fn resolve(&self) -> CliResult<ResolvedSpec> {
        let gate = match (&self.gate, &self.matrix) {
            (Some(_), Some(_)) => {
                return Err(CliError::Parse(
                    "gate spec: give either `gate` or `matrix`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Parse(
                    "gate spec: missing `gate` or `matrix`".into(),
                ))
            }
            (Some(name), None) => {
                let params = CatalogParams {
                    k: self.k,
                    gamma: self.gamma,
                };
                let gate = gate_catalog(name, &params)
                    .map_err(|e| CliError::input("gate spec: `gate`", e))?;
                match &self.label {
                    Some(l) => gate.with_label(l.clone()),
                    None => gate,
                }
            }
            (None, Some(rows)) => {
                if self.k.is_some() || self.gamma.is_some() {
                    return Err(CliError::Parse(
                        "gate spec: `k` and `gamma` only apply to catalog gates".into(),
                    ));
                }
                let matrix = matrix_from_rows(rows)?;
                let gate = UnitaryGate::new(matrix)
                    .map_err(|e| CliError::input("gate spec: `matrix`", e))?;
                gate.with_label(self.label.clone().unwrap_or_else(|| "matrix".into()))
            }
        };
        let tolerance = self.tolerance.unwrap_or(TOL_SYNTHESIS);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(CliError::Parse(format!(
                "gate spec: `tolerance` must be positive, got {tolerance}"
            )));
        }
        Ok(ResolvedSpec {
            gate,
            phases: self.phases.clone(),
            tolerance,
        })
    }
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> CliResult<CMatrix> {
    let k = rows.len();
    if k == 0 {
        return Err(CliError::Parse("gate spec: `matrix` is empty".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(CliError::Parse(format!(
                "gate spec: `matrix` row {} has {} entries, expected {k}",
                i + 1,
                row.len()
            )));
        }
        if let Some(j) = row
            .iter()
            .position(|z| !(z[0].is_finite() && z[1].is_finite()))
        {
            return Err(CliError::Parse(format!(
                "gate spec: `matrix` entry ({}, {}) is not finite",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(CMatrix::from_fn(k, k, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}
