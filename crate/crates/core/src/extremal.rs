//! Closed-form horizontal extremal curves V(t) = e^{tX} V₀ e^{−tΩ}.
//!
//! A [`Controller`] stores the gauge block Ω ∈ u(k) and the horizontal block
//! W separately; the generator X = [[Ω, W], [−W†, 0]] is assembled on demand,
//! so the lower-right block is zero by construction.

use crate::error::{Error, Result};
use crate::manifold::{FramePath, StiefelFrame};
use crate::matcore::{
    ensure_finite, frobenius_norm, identity, zeros, AntiHermitian, CMatrix, UnitaryFlow,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    omega: AntiHermitian,
    w: CMatrix,
}

impl Controller {
    /// Ω is k×k anti-Hermitian, W is k×(N−k).
    pub fn new(omega: AntiHermitian, w: CMatrix) -> Result<Self> {
        ensure_finite(&w)?;
        if w.nrows() != omega.dim() || w.ncols() == 0 {
            return Err(Error::Shape {
                expected: (omega.dim(), omega.dim()),
                got: w.shape(),
            });
        }
        Ok(Self { omega, w })
    }

    pub fn gate_dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.omega.dim() + self.w.ncols()
    }

    pub fn omega(&self) -> &AntiHermitian {
        &self.omega
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    /// X = [[Ω, W], [−W†, 0]].
    pub fn x(&self) -> AntiHermitian {
        let k = self.gate_dim();
        let n = self.ambient_dim();
        let mut x = zeros(n, n);
        x.view_mut((0, 0), (k, k)).copy_from(self.omega.as_matrix());
        x.view_mut((0, k), (k, n - k)).copy_from(&self.w);
        x.view_mut((k, 0), (n - k, k))
            .copy_from(&(-self.w.adjoint()));
        AntiHermitian::skew_part(&x)
    }

    /// Residual of the extremality constraint at the frame `v0`.
    pub fn constraint_residual(&self, v0: &StiefelFrame) -> f64 {
        constraint_residual(&self.x(), v0)
    }
}

/// ‖X − (PX + XP − PXP)‖_F with P = V₀V₀†.
///
/// Only the block of X acting on the complement of the frame survives the
/// combination, so the residual is ‖Z‖_F in adapted coordinates.
pub fn constraint_residual(x: &AntiHermitian, v0: &StiefelFrame) -> f64 {
    let p = v0.project();
    let p = p.matrix();
    let x = x.as_matrix();
    let px = p * x;
    frobenius_norm(&(x - (&px + x * p - &px * p)))
}

/// Analytic Stiefel length √tr(WW†)·T of e^{tX}V₀e^{−tΩ} over [0, T].
///
/// The speed is constant: V̇†V̇ = e^{tΩ} WW† e^{−tΩ}.
pub fn analytic_length(controller: &Controller, duration: f64) -> f64 {
    frobenius_norm(controller.w()) * duration
}

/// The extremal curve of a controller, traversed over [0, T].
///
/// With duration T the curve is V(t) = U e^{(t/T)X} V₀ e^{−(t/T)Ω}, where U is
/// an optional base-point rotation (identity by default) and V₀ = (I_k; 0).
#[derive(Clone, Debug)]
pub struct ExtremalCurve {
    controller: Controller,
    v0: StiefelFrame,
    base: Option<CMatrix>,
    duration: f64,
    x_flow: UnitaryFlow,
    omega_flow: UnitaryFlow,
}

impl ExtremalCurve {
    pub fn new(controller: Controller) -> Result<Self> {
        let x_flow = UnitaryFlow::new(&controller.x())?;
        let omega_flow = UnitaryFlow::new(controller.omega())?;
        let v0 = StiefelFrame::canonical(controller.ambient_dim(), controller.gate_dim());
        Ok(Self {
            controller,
            v0,
            base: None,
            duration: 1.0,
            x_flow,
            omega_flow,
        })
    }

    pub fn with_duration(mut self, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::BadParameter(format!(
                "duration must be positive, got {duration}"
            )));
        }
        self.duration = duration;
        Ok(self)
    }

    /// Moves the base point to U·V₀ by conjugating the whole curve.
    pub fn with_base_rotation(mut self, u: CMatrix) -> Result<Self> {
        let n = self.controller.ambient_dim();
        crate::matcore::ensure_shape(&u, n, n)?;
        let defect = crate::matcore::unitarity_defect(&u);
        if defect > 1e-10 {
            return Err(Error::NotUnitary { residual: defect });
        }
        self.v0 = StiefelFrame::new(&u * self.v0.matrix())?;
        self.base = Some(u);
        Ok(self)
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// V(0).
    pub fn start(&self) -> &StiefelFrame {
        &self.v0
    }

    /// The generator acting on the ambient space, including the base rotation
    /// and the 1/T time scaling.
    pub fn effective_x(&self) -> CMatrix {
        let x = self.controller.x().into_matrix().unscale(self.duration);
        match &self.base {
            Some(u) => u * x * u.adjoint(),
            None => x,
        }
    }

    pub fn effective_omega(&self) -> CMatrix {
        self.controller.omega().as_matrix().unscale(self.duration)
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(t / self.duration)
    }

    fn canonical_at(&self, s: f64) -> CMatrix {
        let k = self.controller.gate_dim();
        let e_x = self.x_flow.at(s);
        e_x.columns(0, k) * self.omega_flow.at(-s)
    }

    fn rotate(&self, m: CMatrix) -> CMatrix {
        match &self.base {
            Some(u) => u * m,
            None => m,
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<StiefelFrame> {
        let s = self.check_time(t)?;
        StiefelFrame::new(self.rotate(self.canonical_at(s)))
    }

    /// dV/dt = e^{sX}(XV₀ − V₀Ω)e^{−sΩ} / T with s = t/T.
    pub fn velocity(&self, t: f64) -> Result<CMatrix> {
        let s = self.check_time(t)?;
        let k = self.controller.gate_dim();
        let n = self.controller.ambient_dim();
        let mut tangent = zeros(n, k);
        tangent
            .view_mut((k, 0), (n - k, k))
            .copy_from(&(-self.controller.w().adjoint()));
        let v = self.x_flow.at(s) * tangent * self.omega_flow.at(-s);
        Ok(self.rotate(v).unscale(self.duration))
    }

    /// Uniform grid of `n_samples` points on [0, T].
    pub fn sample(&self, n_samples: usize) -> Result<FramePath> {
        if n_samples < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: n_samples,
            });
        }
        let last = (n_samples - 1) as f64;
        let samples = (0..n_samples)
            .map(|i| {
                let t = self.duration * (i as f64 / last);
                Ok((t, self.evaluate(t)?))
            })
            .collect::<Result<Vec<_>>>()?;
        FramePath::new(samples)
    }

    /// Analytic holonomy V(0)†V(T) of the (horizontal) extremal loop.
    pub fn endpoint_holonomy(&self) -> Result<CMatrix> {
        let v_end = self.evaluate(self.duration)?;
        Ok(self.v0.matrix().adjoint() * v_end.matrix())
    }
}

/// max over a uniform grid of ‖V(t)†XV(t) − Ω‖_F.
pub fn omega_drift(curve: &ExtremalCurve, n_samples: usize) -> Result<f64> {
    let path = curve.sample(n_samples)?;
    let x = curve.effective_x();
    let omega = curve.effective_omega();
    Ok(path
        .frames()
        .iter()
        .map(|v| frobenius_norm(&(v.matrix().adjoint() * &x * v.matrix() - &omega)))
        .fold(0.0, f64::max))
}

/// Controller whose curve is stationary: Ω = 2πi·I_k, W = 0.
pub fn stationary_controller(k: usize) -> Controller {
    let two_pi_i = crate::matcore::c(0.0, 2.0 * std::f64::consts::PI);
    let omega = AntiHermitian::skew_part(&identity(k).map(|z| z * two_pi_i));
    Controller::new(omega, zeros(k, k)).expect("shapes agree")
}
