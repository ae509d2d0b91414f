//! Controller synthesis for a target gate U ∈ U(k).
//!
//! 1. Diagonalize: R†UR = diag(e^{iγ_j}) with γ_j ∈ [0, 2π).
//! 2. Per mode j build the small-circle data ω_j = 2(π − γ_j) and
//!    τ_j = e^{iφ_j} √(π² − (π − γ_j)²).
//! 3. Conjugate: Ω = R diag(iω) R†, W = R diag(iτ), X = [[Ω, W], [−W†, 0]].
//!
//! Each 2×2 mode block [[iω, iτ], [iτ̄, 0]] has eigenvalues i(ω/2 ± π) because
//! ω²/4 + |τ|² = π², so e^{X} acts on every mode as −e^{iω/2}·I₂. The loop
//! therefore closes at T = 1 and the holonomy of mode j is −e^{−iω/2} = e^{iγ_j}.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::extremal::{analytic_length, Controller};
use crate::manifold::StiefelFrame;
use crate::matcore::{
    c, expm_antihermitian, frobenius_norm, hermitian_eig, identity, polar_factor, unitarity_defect,
    AntiHermitian, CMatrix, C64, I,
};

pub const TOL_UNITARY: f64 = 1e-10;
pub const TOL_SPECTRUM: f64 = 1e-9;
/// Acceptance tolerance for the analytic closure and holonomy errors.
pub const TOL_SYNTHESIS: f64 = 1e-9;

/// Eigenvalues whose Hermitian-part spectra are closer than this are refined
/// together.
const CLUSTER_GAP: f64 = 1e-6;
/// Angles this close to 0 (or 2π) are set to exactly 0.
const ANGLE_SNAP: f64 = 1e-10;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryGate {
    matrix: CMatrix,
    label: Option<String>,
}

impl UnitaryGate {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        crate::matcore::ensure_finite(&matrix)?;
        let k = matrix.nrows();
        if k == 0 || matrix.ncols() != k {
            return Err(Error::Shape {
                expected: (k.max(1), k.max(1)),
                got: matrix.shape(),
            });
        }
        let residual = unitarity_defect(&matrix);
        if residual > TOL_UNITARY {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self {
            matrix,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// R and the ascending eigenphases γ_j ∈ [0, 2π) of a unitary gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpectrum {
    pub r: CMatrix,
    pub gammas: Vec<f64>,
}

impl GateSpectrum {
    pub fn new(r: CMatrix, gammas: Vec<f64>) -> Result<Self> {
        if r.nrows() != gammas.len() || r.ncols() != gammas.len() {
            return Err(Error::Shape {
                expected: (gammas.len(), gammas.len()),
                got: r.shape(),
            });
        }
        let residual = unitarity_defect(&r);
        if residual > TOL_UNITARY {
            return Err(Error::NotUnitary { residual });
        }
        check_branch(&gammas)?;
        Ok(Self { r, gammas })
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.gammas
            .iter()
            .map(|&g| C64::from_polar(1.0, g))
            .collect()
    }

    /// ‖R†UR − diag(e^{iγ})‖_F.
    pub fn residual(&self, u: &CMatrix) -> f64 {
        let d = &self.r.adjoint() * u * &self.r;
        frobenius_norm(&(d - diagonal(&self.eigenvalues())))
    }
}

fn check_branch(gammas: &[f64]) -> Result<()> {
    for (index, &gamma) in gammas.iter().enumerate() {
        if !(0.0..TWO_PI).contains(&gamma) {
            return Err(Error::BranchViolation { index, gamma });
        }
    }
    Ok(())
}

fn diagonal(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Groups consecutive ascending values whose gaps are at most `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn columns(m: &CMatrix, range: &std::ops::Range<usize>) -> CMatrix {
    m.columns(range.start, range.len()).into_owned()
}

/// (M − M†)/(2i), the Hermitian "sine part" of a unitary.
fn sine_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()).map(|z| z / (2.0 * I))
}

/// Eigenvectors of a unitary block: split by sin γ, and for residual
/// near-degenerate groups rotate away the common phase before splitting again.
fn refine_cluster(u: &CMatrix, basis: &CMatrix) -> Result<CMatrix> {
    let block = basis.adjoint() * u * basis;
    let sin = hermitian_eig(&sine_part(&block))?;
    let mut out = CMatrix::zeros(basis.nrows(), basis.ncols());
    for group in clusters(&sin.values, CLUSTER_GAP) {
        let y = columns(&sin.vectors, &group);
        let vectors = if group.len() == 1 {
            y
        } else {
            let sub = y.adjoint() * &block * &y;
            let trace = sub.trace();
            let unphase = if trace.norm() > 0.0 {
                trace.conj() / trace.norm()
            } else {
                c(1.0, 0.0)
            };
            let centered = sub.map(|z| z * unphase);
            let inner = hermitian_eig(&sine_part(&centered))?;
            &y * inner.vectors
        };
        out.columns_mut(group.start, group.len())
            .copy_from(&(basis * vectors));
    }
    Ok(out)
}

fn principal_angle(z: C64) -> f64 {
    let mut gamma = z.im.atan2(z.re).rem_euclid(TWO_PI);
    if gamma < ANGLE_SNAP || TWO_PI - gamma < ANGLE_SNAP {
        gamma = 0.0;
    }
    gamma
}

/// R†UR = diag(e^{iγ_j}), γ ascending in [0, 2π).
///
/// Uses the Hermitian eigenproblem of (U + U†)/2; eigenvalue clusters are
/// split by (U − U†)/(2i) restricted to the cluster.
pub fn diagonalize_gate(gate: &UnitaryGate) -> Result<GateSpectrum> {
    let u = gate.matrix();
    let cos = hermitian_eig(&(u + u.adjoint()).scale(0.5))?;
    let k = gate.dim();
    let mut r = CMatrix::zeros(k, k);
    for group in clusters(&cos.values, CLUSTER_GAP) {
        let basis = columns(&cos.vectors, &group);
        let vectors = if group.len() == 1 {
            basis
        } else {
            refine_cluster(u, &basis)?
        };
        r.columns_mut(group.start, group.len()).copy_from(&vectors);
    }
    let r = polar_factor(&r)?;
    if unitarity_defect(&r) > TOL_UNITARY {
        return Err(Error::NotUnitary {
            residual: unitarity_defect(&r),
        });
    }

    let d = r.adjoint() * u * &r;
    let angles: Vec<f64> = (0..k).map(|j| principal_angle(d[(j, j)])).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let gammas: Vec<f64> = order.iter().map(|&j| angles[j]).collect();
    let r = CMatrix::from_fn(k, k, |row, col| r[(row, order[col])]);

    let spectrum = GateSpectrum::new(r, gammas)?;
    let residual = spectrum.residual(u);
    if residual > TOL_SPECTRUM {
        return Err(Error::Diagonalization {
            residual,
            tolerance: TOL_SPECTRUM,
        });
    }
    Ok(spectrum)
}

/// The small-circle data of one diagonal mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeParameters {
    pub gamma: f64,
    pub phi: f64,
    /// ω = 2(π − γ).
    pub omega: f64,
    /// τ = e^{iφ} √(π² − (π − γ)²).
    pub tau: C64,
}

impl ModeParameters {
    pub fn new(gamma: f64, phi: f64) -> Self {
        let offset = PI - gamma;
        let radius = (PI * PI - offset * offset).max(0.0).sqrt();
        Self {
            gamma,
            phi,
            omega: 2.0 * offset,
            tau: C64::from_polar(radius, phi),
        }
    }

    /// ω²/4 + |τ|², which equals π² for every admissible γ.
    pub fn frequency_norm(&self) -> f64 {
        self.omega * self.omega / 4.0 + self.tau.norm_sqr()
    }
}

pub fn mode_parameters(
    spectrum: &GateSpectrum,
    phases: Option<&[f64]>,
) -> Result<Vec<ModeParameters>> {
    check_branch(&spectrum.gammas)?;
    let k = spectrum.dim();
    let phases = match phases {
        Some(p) if p.len() != k => {
            return Err(Error::BadParameter(format!(
                "expected {k} phases, got {}",
                p.len()
            )))
        }
        Some(p) => p.to_vec(),
        None => vec![0.0; k],
    };
    if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
        return Err(Error::BadParameter(format!("phase {bad} is not finite")));
    }
    Ok(spectrum
        .gammas
        .iter()
        .zip(&phases)
        .map(|(&g, &phi)| ModeParameters::new(g, phi))
        .collect())
}

/// Ω = R diag(iω) R†, W = R diag(iτ).
pub fn build_controller(spectrum: &GateSpectrum, phases: Option<&[f64]>) -> Result<Controller> {
    let modes = mode_parameters(spectrum, phases)?;
    let omega_diag: Vec<C64> = modes.iter().map(|m| I * m.omega).collect();
    let w_diag: Vec<C64> = modes.iter().map(|m| I * m.tau).collect();
    let r = &spectrum.r;
    let omega = AntiHermitian::skew_part(&(r * diagonal(&omega_diag) * r.adjoint()));
    let w = r * diagonal(&w_diag);
    Controller::new(omega, w)
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    /// φ_j per mode; all zero when absent.
    pub phases: Option<Vec<f64>>,
    pub tolerance: f64,
    /// Requested working dimension; only N = 2k is supported.
    pub ambient_dim: Option<usize>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            phases: None,
            tolerance: TOL_SYNTHESIS,
            ambient_dim: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub gate: UnitaryGate,
    pub spectrum: GateSpectrum,
    pub modes: Vec<ModeParameters>,
    pub controller: Controller,
    /// V₀† e^{X} V₀ e^{−Ω}.
    pub holonomy: CMatrix,
    pub closure_error: f64,
    pub holonomy_error: f64,
    pub length: f64,
    pub tolerance: f64,
}

impl SynthesisReport {
    pub fn succeeded(&self) -> bool {
        self.closure_error <= self.tolerance && self.holonomy_error <= self.tolerance
    }
}

/// Closure ‖e^{X}PV₀e^{−X} − P‖_F and holonomy V₀†e^{X}V₀e^{−Ω} of a
/// controller at T = 1, evaluated with exact exponentials.
pub fn boundary_conditions(controller: &Controller) -> Result<(f64, CMatrix)> {
    let n = controller.ambient_dim();
    let k = controller.gate_dim();
    let v0 = StiefelFrame::canonical(n, k);
    let p0 = v0.project();
    let e_x = expm_antihermitian(&controller.x())?;
    let closure = frobenius_norm(&(&e_x * p0.matrix() * e_x.adjoint() - p0.matrix()));
    let e_omega = expm_antihermitian(&-controller.omega())?;
    let holonomy = v0.matrix().adjoint() * &e_x * v0.matrix() * e_omega;
    Ok((closure, holonomy))
}

pub fn synthesize(gate: &UnitaryGate) -> Result<SynthesisReport> {
    synthesize_with(gate, &SynthesisOptions::default())
}

pub fn synthesize_with(gate: &UnitaryGate, options: &SynthesisOptions) -> Result<SynthesisReport> {
    let k = gate.dim();
    if let Some(n) = options.ambient_dim {
        if n != 2 * k {
            return Err(Error::AmbientDimension { n, expected: 2 * k });
        }
    }
    let spectrum = diagonalize_gate(gate)?;
    let modes = mode_parameters(&spectrum, options.phases.as_deref())?;
    let controller = build_controller(&spectrum, options.phases.as_deref())?;
    let (closure_error, holonomy) = boundary_conditions(&controller)?;
    let holonomy_error = frobenius_norm(&(&holonomy - gate.matrix()));
    let length = analytic_length(&controller, 1.0);
    let report = SynthesisReport {
        gate: gate.clone(),
        spectrum,
        modes,
        controller,
        holonomy,
        closure_error,
        holonomy_error,
        length,
        tolerance: options.tolerance,
    };
    if !report.succeeded() {
        return Err(Error::Verification {
            closure_error,
            holonomy_error,
            tolerance: options.tolerance,
            report: Box::new(report),
        });
    }
    Ok(report)
}

/// √(Σ_j (π² − (π − γ_j)²)).
pub fn length_from_spectrum(gammas: &[f64]) -> f64 {
    gammas
        .iter()
        .map(|g| PI * PI - (PI - g) * (PI - g))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// Entries of the standard gates known to [`gate_catalog`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub parameters: &'static str,
    pub description: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "identity",
        parameters: "k",
        description: "k×k identity",
    },
    CatalogEntry {
        name: "phase",
        parameters: "gamma",
        description: "1×1 phase e^{i·gamma}",
    },
    CatalogEntry {
        name: "phase-shift",
        parameters: "gamma",
        description: "single-qubit diag(1, e^{i·gamma})",
    },
    CatalogEntry {
        name: "hadamard",
        parameters: "",
        description: "single-qubit Hadamard",
    },
    CatalogEntry {
        name: "pauli-x",
        parameters: "",
        description: "single-qubit NOT",
    },
    CatalogEntry {
        name: "cnot",
        parameters: "",
        description: "two-qubit controlled NOT, basis |00>,|01>,|10>,|11>",
    },
    CatalogEntry {
        name: "dft",
        parameters: "k",
        description: "k-point discrete Fourier transform, entries w^{mn}/sqrt(k)",
    },
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CatalogParams {
    pub k: Option<usize>,
    pub gamma: Option<f64>,
}

fn require_k(name: &str, params: &CatalogParams) -> Result<usize> {
    match params.k {
        Some(k) if k >= 1 => Ok(k),
        Some(k) => Err(Error::BadParameter(format!(
            "{name}: k must be >= 1, got {k}"
        ))),
        None => Err(Error::BadParameter(format!("{name}: missing parameter k"))),
    }
}

fn require_gamma(name: &str, params: &CatalogParams) -> Result<f64> {
    match params.gamma {
        Some(g) if g.is_finite() => Ok(g),
        Some(g) => Err(Error::BadParameter(format!(
            "{name}: gamma {g} is not finite"
        ))),
        None => Err(Error::BadParameter(format!(
            "{name}: missing parameter gamma"
        ))),
    }
}

pub fn gate_catalog(name: &str, params: &CatalogParams) -> Result<UnitaryGate> {
    let matrix = match name {
        "identity" => identity(require_k(name, params)?),
        "phase" => CMatrix::from_element(1, 1, C64::from_polar(1.0, require_gamma(name, params)?)),
        "phase-shift" => diagonal(&[
            c(1.0, 0.0),
            C64::from_polar(1.0, require_gamma(name, params)?),
        ]),
        "hadamard" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
        }
        "pauli-x" => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        "cnot" => {
            let mut m = identity(4);
            m[(2, 2)] = c(0.0, 0.0);
            m[(3, 3)] = c(0.0, 0.0);
            m[(2, 3)] = c(1.0, 0.0);
            m[(3, 2)] = c(1.0, 0.0);
            m
        }
        "dft" => {
            let k = require_k(name, params)?;
            let norm = 1.0 / (k as f64).sqrt();
            CMatrix::from_fn(k, k, |m, n| {
                // Reduce the exponent first so large k keeps full accuracy.
                let e = (m * n) % k;
                C64::from_polar(norm, TWO_PI * e as f64 / k as f64)
            })
        }
        other => return Err(Error::UnknownGate(other.to_string())),
    };
    Ok(UnitaryGate::new(matrix)?.with_label(catalog_label(name, params)))
}

fn catalog_label(name: &str, params: &CatalogParams) -> String {
    match (name, params.k, params.gamma) {
        ("identity" | "dft", Some(k), _) => format!("{name}({k})"),
        ("phase" | "phase-shift", _, Some(g)) => format!("{name}({g})"),
        _ => name.to_string(),
    }
}
