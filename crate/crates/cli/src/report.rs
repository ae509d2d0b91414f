//! Report files: JSON with every real stored as `"<hex> (<decimal>)"`.
//!
//! The hexadecimal half is authoritative and reproduces each f64 bit for bit;
//! the decimal half is for people and is checked against it on read.

use std::fmt;
use std::path::Path;

use holonomic_core::extremal::Controller;
use holonomic_core::matcore::{c, AntiHermitian, CMatrix};
use holonomic_core::synthesis::{GateSpectrum, SynthesisReport};
use holonomic_core::UnitaryGate;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};
use crate::hexfloat::{format_hex, parse_hex};

pub const FORMAT: &str = "holonomic-report/1";

#[derive(Clone, Copy, Debug)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:?})", format_hex(self.0), self.0)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string \"<hex float> (<decimal>)\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                let (hex, decimal) = match v.split_once(' ') {
                    Some((h, rest)) => {
                        let inner = rest
                            .strip_prefix('(')
                            .and_then(|r| r.strip_suffix(')'))
                            .ok_or_else(|| E::custom(format!("malformed real '{v}'")))?;
                        (h, Some(inner))
                    }
                    None => (v, None),
                };
                let x =
                    parse_hex(hex).ok_or_else(|| E::custom(format!("bad hex float '{hex}'")))?;
                if let Some(dec) = decimal {
                    let y: f64 = dec
                        .parse()
                        .map_err(|_| E::custom(format!("bad decimal '{dec}'")))?;
                    let agree = y.to_bits() == x.to_bits() || (x.is_nan() && y.is_nan());
                    if !agree {
                        return Err(E::custom(format!("hex {hex} and decimal {dec} disagree")));
                    }
                }
                Ok(Real(x))
            }
        }
        d.deserialize_str(RealVisitor)
    }
}

pub type Complex = [Real; 2];
pub type Matrix = Vec<Vec<Complex>>;

pub fn encode_matrix(m: &CMatrix) -> Matrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [Real(m[(i, j)].re), Real(m[(i, j)].im)])
                .collect()
        })
        .collect()
}

pub fn decode_matrix(m: &Matrix, what: &str) -> CliResult<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(CliError::Parse(format!("report: `{what}` is empty")));
    }
    if let Some(i) = m.iter().position(|r| r.len() != cols) {
        return Err(CliError::Parse(format!(
            "report: `{what}` row {} has {} entries, expected {cols}",
            i + 1,
            m[i].len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        c(m[i][j][0].0, m[i][j][1].0)
    }))
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().map(|&x| Real(x)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub input_sha256: String,
    pub created: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub label: Option<String>,
    pub k: usize,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub gammas: Vec<Real>,
    pub r: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub gamma: Real,
    pub phi: Real,
    pub omega: Real,
    pub tau: Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub omega: Matrix,
    pub w: Matrix,
    pub x: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSection {
    pub closure_error: Real,
    pub holonomy_error: Real,
    pub tolerance: Real,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format: String,
    pub provenance: Provenance,
    pub gate: GateSection,
    pub spectrum: SpectrumSection,
    pub modes: Vec<ModeSection>,
    pub controller: ControllerSection,
    pub holonomy: Matrix,
    pub length: Real,
    pub verification: VerificationSection,
}

impl ReportFile {
    pub fn from_synthesis(report: &SynthesisReport, provenance: Provenance) -> Self {
        let ctrl = &report.controller;
        Self {
            format: FORMAT.to_string(),
            provenance,
            gate: GateSection {
                label: report.gate.label().map(str::to_string),
                k: report.gate.dim(),
                matrix: encode_matrix(report.gate.matrix()),
            },
            spectrum: SpectrumSection {
                gammas: reals(&report.spectrum.gammas),
                r: encode_matrix(&report.spectrum.r),
            },
            modes: report
                .modes
                .iter()
                .map(|m| ModeSection {
                    gamma: Real(m.gamma),
                    phi: Real(m.phi),
                    omega: Real(m.omega),
                    tau: [Real(m.tau.re), Real(m.tau.im)],
                })
                .collect(),
            controller: ControllerSection {
                omega: encode_matrix(ctrl.omega().as_matrix()),
                w: encode_matrix(ctrl.w()),
                x: encode_matrix(ctrl.x().as_matrix()),
            },
            holonomy: encode_matrix(&report.holonomy),
            length: Real(report.length),
            verification: VerificationSection {
                closure_error: Real(report.closure_error),
                holonomy_error: Real(report.holonomy_error),
                tolerance: Real(report.tolerance),
                passed: report.succeeded(),
            },
        }
    }

    /// Indented JSON with arrays of scalars kept on one line, so each matrix
    /// entry reads as `[re, im]`.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text = String::new();
        render(&value, 0, &mut text);
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let report: Self =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("report: {e}")))?;
        if report.format != FORMAT {
            return Err(CliError::Parse(format!(
                "report: unsupported format '{}', expected '{FORMAT}'",
                report.format
            )));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn gate(&self) -> CliResult<UnitaryGate> {
        let m = decode_matrix(&self.gate.matrix, "gate.matrix")?;
        let gate = UnitaryGate::new(m).map_err(|e| CliError::input("report: gate", e))?;
        Ok(match &self.gate.label {
            Some(l) => gate.with_label(l.clone()),
            None => gate,
        })
    }

    pub fn controller(&self) -> CliResult<Controller> {
        let omega = decode_matrix(&self.controller.omega, "controller.omega")?;
        let omega = AntiHermitian::new(omega)
            .map_err(|e| CliError::input("report: controller.omega", e))?;
        let w = decode_matrix(&self.controller.w, "controller.w")?;
        Controller::new(omega, w).map_err(|e| CliError::input("report: controller", e))
    }

    /// X exactly as stored, which may differ from the one assembled from Ω, W.
    pub fn stored_x(&self) -> CliResult<AntiHermitian> {
        let x = decode_matrix(&self.controller.x, "controller.x")?;
        AntiHermitian::new(x).map_err(|e| CliError::input("report: controller.x", e))
    }

    pub fn spectrum(&self) -> CliResult<GateSpectrum> {
        let r = decode_matrix(&self.spectrum.r, "spectrum.r")?;
        let gammas = self.spectrum.gammas.iter().map(|g| g.0).collect();
        GateSpectrum::new(r, gammas).map_err(|e| CliError::input("report: spectrum", e))
    }

    pub fn label(&self) -> &str {
        self.gate.label.as_deref().unwrap_or("unlabelled")
    }
}

fn scalar(v: &serde_json::Value) -> String {
    serde_json::to_string(v).expect("scalar serializes")
}

fn render(v: &serde_json::Value, depth: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&scalar(&Value::String(key.clone())));
                out.push_str(": ");
                render(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                render(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        other => out.push_str(&scalar(other)),
    }
}
