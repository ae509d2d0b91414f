//! Dense complex-matrix kernels.
//!
//! Everything downstream works with `nalgebra::DMatrix<Complex64>`; this module
//! supplies the handful of structured operations the geometry needs: Hermitian
//! eigendecomposition, exponentials of anti-Hermitian generators, polar
//! retraction onto orthonormal frames, and Frobenius distances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::StiefelFrame;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Structural tolerance for Hermitian / anti-Hermitian checks.
pub const TOL_STRUCT: f64 = 1e-12;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_SWEEPS_PER_DIM: usize = 1000;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let z = m[(row, col)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

pub fn ensure_shape(m: &CMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::Shape {
            expected: (rows, cols),
            got: m.shape(),
        });
    }
    Ok(())
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    let n = m.nrows();
    ensure_shape(m, n, n)?;
    Ok(n)
}

/// ‖U†U − I‖_F.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    frobenius_norm(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn hermitian_defect(h: &CMatrix) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn anti_hermitian_defect(x: &CMatrix) -> f64 {
    max_abs(&(x + x.adjoint()))
}

fn scaled_tol(m: &CMatrix) -> f64 {
    TOL_STRUCT * frobenius_norm(m).max(1.0)
}

/// An element of the Lie algebra u(n): X† = −X.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiHermitian(CMatrix);

impl AntiHermitian {
    /// Validates the structure and stores the exactly skew part.
    pub fn new(x: CMatrix) -> Result<Self> {
        ensure_square(&x)?;
        ensure_finite(&x)?;
        let residual = anti_hermitian_defect(&x);
        if residual > scaled_tol(&x) {
            return Err(Error::Structural {
                what: "matrix is not anti-Hermitian",
                residual,
            });
        }
        Ok(Self::skew_part(&x))
    }

    /// (M − M†)/2, no validation beyond squareness.
    pub fn skew_part(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "skew part of a non-square matrix");
        Self((m - m.adjoint()).scale(0.5))
    }

    pub fn zeros(n: usize) -> Self {
        Self(zeros(n, n))
    }

    /// i·H for a Hermitian H.
    pub fn from_hermitian(h: &CMatrix) -> Result<Self> {
        Self::new(h.map(|z| z * I))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// h† X h for unitary h; the result stays in the algebra.
    pub fn conjugate_by(&self, h: &CMatrix) -> Self {
        Self::skew_part(&(h.adjoint() * &self.0 * h))
    }
}

impl std::ops::Add for &AntiHermitian {
    type Output = AntiHermitian;
    fn add(self, rhs: Self) -> AntiHermitian {
        AntiHermitian(&self.0 + &rhs.0)
    }
}

impl std::ops::Neg for &AntiHermitian {
    type Output = AntiHermitian;
    fn neg(self) -> AntiHermitian {
        AntiHermitian(-&self.0)
    }
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column j is the eigenvector of `values[j]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| c(v, 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Eigendecomposition H = Q diag(λ) Q† with λ ascending.
pub fn hermitian_eig(h: &CMatrix) -> Result<HermitianEigen> {
    let n = ensure_square(h)?;
    ensure_finite(h)?;
    let residual = hermitian_defect(h);
    if residual > scaled_tol(h) {
        return Err(Error::Structural {
            what: "matrix is not Hermitian",
            residual,
        });
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: zeros(0, 0),
        });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let iterations = EIG_MAX_SWEEPS_PER_DIM * n;
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, iterations)
        .ok_or(Error::NoConvergence { iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(HermitianEigen { values, vectors })
}

/// e^X for anti-Hermitian X, via the spectrum of the Hermitian −iX.
///
/// e^X = Q diag(e^{iλ}) Q†, which is unitary to working precision for any
/// scale of X.
pub fn expm_antihermitian(x: &AntiHermitian) -> Result<CMatrix> {
    Ok(UnitaryFlow::new(x)?.at(1.0))
}

/// e^{tX}.
pub fn expm_scaled(x: &AntiHermitian, t: f64) -> Result<CMatrix> {
    expm_antihermitian(&x.scale(t))
}

/// U V† from the SVD M = U Σ V†; errors when σ_min ≤ 1e−12.
pub fn polar_factor(m: &CMatrix) -> Result<CMatrix> {
    ensure_finite(m)?;
    if m.ncols() > m.nrows() || m.ncols() == 0 {
        return Err(Error::Shape {
            expected: (m.nrows(), m.nrows().min(m.ncols()).max(1)),
            got: m.shape(),
        });
    }
    let svd = m.clone().svd(true, true);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(sigma_min > 1e-12) {
        return Err(Error::RankDeficient { sigma_min });
    }
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    Ok(u * v_t)
}

/// The one-parameter group t ↦ e^{tX} of a fixed anti-Hermitian generator,
/// diagonalized once so that each evaluation costs two matrix products.
#[derive(Clone, Debug)]
pub struct UnitaryFlow {
    frequencies: Vec<f64>,
    modes: CMatrix,
}

impl UnitaryFlow {
    pub fn new(x: &AntiHermitian) -> Result<Self> {
        let h = x.as_matrix().map(|z| -I * z);
        let eig = hermitian_eig(&h)?;
        Ok(Self {
            frequencies: eig.values,
            modes: eig.vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// e^{tX}; exactly the identity at t = 0.
    pub fn at(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            return identity(self.dim());
        }
        let mut qd = self.modes.clone();
        for (j, &l) in self.frequencies.iter().enumerate() {
            let phase = C64::from_polar(1.0, l * t);
            qd.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        qd * self.modes.adjoint()
    }
}

/// Nearest orthonormal frame (in Frobenius distance) to a full-rank N×k matrix.
pub fn polar_retract(m: &CMatrix) -> Result<StiefelFrame> {
    let v = polar_factor(m)?;
    Ok(StiefelFrame::from_orthonormal_unchecked(v))
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    ensure_shape(b, a.nrows(), a.ncols())?;
    Ok(frobenius_norm(&(a - b)))
}
