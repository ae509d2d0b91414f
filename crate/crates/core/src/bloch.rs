//! Per-mode Bloch-sphere picture of a synthesized loop.
//!
//! In the basis D = diag(R, I) the generator splits into independent 2×2
//! blocks on the pairs (j, j + k), so each mode's line is a point of ℂP¹ and
//! traces a circle on the Bloch sphere.
//!
//! Orientation: the accumulated solid angle Θ is the signed spherical excess
//! of the triangles (q, r_i, r_{i+1}) with q the pole the loop circles
//! clockwise, i.e. q = −Σ r_i × r_{i+1} normalized. A loop of the synthesized
//! controller then gives Θ_j = −2γ_j, and the mode phase is e^{−iΘ_j/2} = e^{iγ_j}.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremal::ExtremalCurve;
use crate::matcore::{frobenius_norm, CMatrix, C64};

/// One-line summary of the orientation rule, for output headers.
pub const SOLID_ANGLE_CONVENTION: &str = "solid angle = signed spherical excess about the pole the loop circles clockwise; mode phase = exp(-i*solid_angle/2); a synthesized mode with eigenphase gamma gives -2*gamma";

const TOL_MODE_DIAGONAL: f64 = 1e-9;

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Bloch vector of the line through (a, b): (2Re āb, 2Im āb, |a|² − |b|²),
/// normalized.
pub fn bloch_vector(a: C64, b: C64) -> Result<Vec3> {
    let w = a.conj() * b;
    let r = [2.0 * w.re, 2.0 * w.im, a.norm_sqr() - b.norm_sqr()];
    let len = norm(r);
    if !(len > 1e-12) {
        return Err(Error::Structural {
            what: "mode amplitude vanishes",
            residual: len,
        });
    }
    Ok([r[0] / len, r[1] / len, r[2] / len])
}

/// Signed excess of the spherical triangle (a, b, c), positive when
/// counter-clockwise seen from outside.
pub fn triangle_excess(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let numerator = dot(a, cross(b, c));
    let denominator = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * numerator.atan2(denominator)
}

/// The pole the closed polygon circles clockwise, or `None` when the
/// polygon has no net rotation.
pub fn clockwise_pole(points: &[Vec3]) -> Option<Vec3> {
    let mut axis = [0.0; 3];
    for pair in points.windows(2) {
        let c = cross(pair[0], pair[1]);
        axis = [axis[0] + c[0], axis[1] + c[1], axis[2] + c[2]];
    }
    let len = norm(axis);
    let scale = points.len().max(1) as f64;
    if len <= 1e-12 * scale {
        return None;
    }
    Some([-axis[0] / len, -axis[1] / len, -axis[2] / len])
}

/// Running solid angle along the polygon, starting at 0.
pub fn accumulated_solid_angle(points: &[Vec3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let Some(q) = clockwise_pole(points) else {
        out.resize(points.len(), 0.0);
        return out;
    };
    let mut total = 0.0;
    out.push(0.0);
    for pair in points.windows(2) {
        total += triangle_excess(q, pair[0], pair[1]);
        out.push(total);
    }
    out
}

#[derive(Clone, Debug)]
pub struct ModeLoop {
    pub mode: usize,
    pub gamma: f64,
    pub points: Vec<Vec3>,
    pub solid_angle: Vec<f64>,
}

impl ModeLoop {
    pub fn total_solid_angle(&self) -> f64 {
        self.solid_angle.last().copied().unwrap_or(0.0)
    }

    /// |Θ| / (2γ); NaN for γ = 0.
    pub fn ratio_to_twice_gamma(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::NAN
        } else {
            self.total_solid_angle().abs() / (2.0 * self.gamma)
        }
    }

    /// e^{−iΘ/2}.
    pub fn berry_phase_factor(&self) -> C64 {
        C64::from_polar(1.0, -self.total_solid_angle() / 2.0)
    }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut d = m.clone();
    d.fill_diagonal(C64::new(0.0, 0.0));
    frobenius_norm(&d)
}

/// Bloch loops of every mode on `n_samples` uniform times.
///
/// `r` must diagonalize both R†ΩR and R†W, as the synthesized R does.
pub fn mode_loops(
    curve: &ExtremalCurve,
    r: &CMatrix,
    gammas: &[f64],
    n_samples: usize,
) -> Result<Vec<ModeLoop>> {
    let ctrl = curve.controller();
    let k = ctrl.gate_dim();
    crate::matcore::ensure_shape(r, k, k)?;
    if gammas.len() != k {
        return Err(Error::Shape {
            expected: (k, 1),
            got: (gammas.len(), 1),
        });
    }
    let omega_d = r.adjoint() * ctrl.omega().as_matrix() * r;
    let w_d = r.adjoint() * ctrl.w();
    let residual = off_diagonal_norm(&omega_d).max(off_diagonal_norm(&w_d));
    if residual > TOL_MODE_DIAGONAL {
        return Err(Error::Structural {
            what: "controller is not mode-diagonal in the given basis",
            residual,
        });
    }
    let path = curve.sample(n_samples)?;
    // V_d = D†V R with D = diag(R, I).
    let amplitudes: Vec<CMatrix> = path
        .frames()
        .par_iter()
        .map(|v| {
            let m = v.matrix();
            let top = r.adjoint() * m.rows(0, k) * r;
            let bottom = m.rows(k, k) * r;
            let mut out = CMatrix::zeros(2, k);
            for j in 0..k {
                out[(0, j)] = top[(j, j)];
                out[(1, j)] = bottom[(j, j)];
            }
            out
        })
        .collect();
    (0..k)
        .map(|j| {
            let points = amplitudes
                .iter()
                .map(|a| bloch_vector(a[(0, j)], a[(1, j)]))
                .collect::<Result<Vec<_>>>()?;
            let solid_angle = accumulated_solid_angle(&points);
            Ok(ModeLoop {
                mode: j,
                gamma: gammas[j],
                points,
                solid_angle,
            })
        })
        .collect()
}
