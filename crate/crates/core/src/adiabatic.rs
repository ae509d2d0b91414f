//! Schrödinger-equation check of a synthesized loop (ħ = 1).
//!
//! The loop's projector P(s), s ∈ [0, 1], defines a two-band Hamiltonian
//! H(s) = ε₁(s)P(s) + ε₂(s)(I − P(s)) traversed in physical time T_total.
//! Starting in the lower band and going slowly, the final state returns to the
//! band as V(0)Γφ₀ up to the dynamical phase e^{−i∫ε₁}.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extremal::ExtremalCurve;
use crate::matcore::{
    expm_antihermitian, frobenius_norm, hermitian_eig, AntiHermitian, CMatrix, CVector,
    UnitaryFlow, C64, I,
};

/// Per-step bound on max‖H‖·Δt.
pub const STEP_GUARD: f64 = 0.1;
/// Leakage above this is a hard failure: the traversal was far too fast.
pub const LEAKAGE_FAILURE: f64 = 0.5;
pub const TOL_NORM: f64 = 1e-9;

const GAP_GRID: usize = 1001;
const PHASE_QUADRATURE: usize = 4096;

pub type BandEnergy = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn constant_energy(value: f64) -> BandEnergy {
    Arc::new(move |_| value)
}

#[derive(Clone)]
pub struct HamiltonianSchedule {
    curve: ExtremalCurve,
    eps1: BandEnergy,
    eps2: BandEnergy,
    t_total: f64,
    twist: Option<(AntiHermitian, UnitaryFlow)>,
    min_gap: f64,
    max_energy: f64,
}

impl fmt::Debug for HamiltonianSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSchedule")
            .field("t_total", &self.t_total)
            .field("min_gap", &self.min_gap)
            .field("max_energy", &self.max_energy)
            .field("twisted", &self.twist.is_some())
            .finish_non_exhaustive()
    }
}

impl HamiltonianSchedule {
    /// Checks ε₂ − ε₁ ≥ `gap_min` on a uniform grid of s. A `gap_min` of zero
    /// switches the check off.
    pub fn new(
        curve: ExtremalCurve,
        eps1: BandEnergy,
        eps2: BandEnergy,
        t_total: f64,
        gap_min: f64,
    ) -> Result<Self> {
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::BadParameter(format!(
                "T_total must be positive, got {t_total}"
            )));
        }
        if !(gap_min >= 0.0) {
            return Err(Error::BadParameter(format!(
                "gap_min must be >= 0, got {gap_min}"
            )));
        }
        let mut min_gap = f64::INFINITY;
        let mut max_energy: f64 = 0.0;
        for i in 0..GAP_GRID {
            let s = i as f64 / (GAP_GRID - 1) as f64;
            let (e1, e2) = (eps1(s), eps2(s));
            if !(e1.is_finite() && e2.is_finite()) {
                return Err(Error::BadParameter(format!(
                    "band energy not finite at s = {s}"
                )));
            }
            min_gap = min_gap.min(e2 - e1);
            max_energy = max_energy.max(e1.abs()).max(e2.abs());
        }
        if min_gap < gap_min {
            return Err(Error::GapTooSmall {
                gap: min_gap,
                gap_min,
            });
        }
        Ok(Self {
            curve,
            eps1,
            eps2,
            t_total,
            twist: None,
            min_gap,
            max_energy,
        })
    }

    /// ε₁ ≡ 0, ε₂ ≡ gap.
    pub fn with_gap(curve: ExtremalCurve, gap: f64, t_total: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::BadParameter(format!(
                "gap must be positive, got {gap}"
            )));
        }
        Self::new(
            curve,
            constant_energy(0.0),
            constant_energy(gap),
            t_total,
            gap,
        )
    }

    /// Uses the frame V(s)e^{sΩ̂} in the reduced picture. The Hamiltonian only
    /// sees P(s) and is unchanged.
    pub fn with_gauge_twist(mut self, omega_hat: AntiHermitian) -> Result<Self> {
        crate::matcore::ensure_shape(
            omega_hat.as_matrix(),
            self.curve.controller().gate_dim(),
            self.curve.controller().gate_dim(),
        )?;
        let flow = UnitaryFlow::new(&omega_hat)?;
        self.twist = Some((omega_hat, flow));
        Ok(self)
    }

    pub fn curve(&self) -> &ExtremalCurve {
        &self.curve
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// max over the grid of ‖H(s)‖₂ = max(|ε₁|, |ε₂|).
    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    pub fn eps1(&self, s: f64) -> f64 {
        (self.eps1)(s)
    }

    pub fn eps2(&self, s: f64) -> f64 {
        (self.eps2)(s)
    }

    pub fn ambient_dim(&self) -> usize {
        self.curve.controller().ambient_dim()
    }

    pub fn band_dim(&self) -> usize {
        self.curve.controller().gate_dim()
    }

    fn curve_time(&self, s: f64) -> f64 {
        (s * self.curve.duration()).clamp(0.0, self.curve.duration())
    }

    fn untwisted(&self, s: f64) -> Result<CMatrix> {
        Ok(self.curve.evaluate(self.curve_time(s))?.into_matrix())
    }

    /// Frame of the reduced picture at scaled time s.
    pub fn frame(&self, s: f64) -> Result<CMatrix> {
        let v = self.untwisted(s)?;
        Ok(match &self.twist {
            Some((_, flow)) => v * flow.at(s),
            None => v,
        })
    }

    pub fn projector(&self, s: f64) -> Result<CMatrix> {
        let v = self.untwisted(s)?;
        Ok(&v * v.adjoint())
    }

    /// dV/ds of the untwisted curve.
    fn untwisted_velocity(&self, s: f64) -> Result<CMatrix> {
        Ok(self
            .curve
            .velocity(self.curve_time(s))?
            .scale(self.curve.duration()))
    }

    /// dP/ds.
    pub fn projector_velocity(&self, s: f64) -> Result<CMatrix> {
        let v = self.untwisted(s)?;
        let d = self.untwisted_velocity(s)?;
        let a = &d * v.adjoint();
        Ok(&a + a.adjoint())
    }

    /// V†dV/ds of the (possibly twisted) frame.
    pub fn connection(&self, s: f64) -> Result<AntiHermitian> {
        let v = self.untwisted(s)?;
        let d = self.untwisted_velocity(s)?;
        let a = v.adjoint() * d;
        Ok(match &self.twist {
            Some((omega_hat, flow)) => {
                let e = flow.at(s);
                AntiHermitian::skew_part(&(e.adjoint() * a * e + omega_hat.as_matrix()))
            }
            None => AntiHermitian::skew_part(&a),
        })
    }

    pub fn hamiltonian(&self, s: f64) -> Result<CMatrix> {
        let p = self.projector(s)?;
        let (e1, e2) = (self.eps1(s), self.eps2(s));
        let n = p.nrows();
        Ok(CMatrix::identity(n, n).scale(e2) + p.scale(e1 - e2))
    }

    /// ∫₀^T ε₁ dt by composite Simpson on the scaled interval.
    pub fn dynamical_phase(&self) -> f64 {
        let m = PHASE_QUADRATURE;
        let h = 1.0 / m as f64;
        let mut sum = self.eps1(0.0) + self.eps1(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.eps1(i as f64 * h);
        }
        self.t_total * sum * h / 3.0
    }

    /// max‖H‖·T_total/n.
    pub fn step_ratio(&self, n_steps: usize) -> f64 {
        self.max_energy * self.t_total / n_steps.max(1) as f64
    }

    /// Smallest step count satisfying the step guard.
    pub fn required_steps(&self) -> usize {
        ((self.max_energy * self.t_total / STEP_GUARD).ceil() as usize).max(1)
    }

    fn check_steps(&self, n_steps: usize) -> Result<()> {
        let ratio = self.step_ratio(n_steps);
        if n_steps == 0 || ratio > STEP_GUARD {
            return Err(Error::StepSizeGuard { ratio });
        }
        Ok(())
    }

    /// max_s ‖dP/ds‖₂ / (gap·T_total) on a uniform grid: the rate at which
    /// the band turns, measured in units of the gap. Small values mean slow.
    pub fn adiabatic_parameter(&self, grid: usize) -> Result<f64> {
        let grid = grid.max(2);
        let mut speed: f64 = 0.0;
        for i in 0..grid {
            let s = i as f64 / (grid - 1) as f64;
            let eig = hermitian_eig(&self.projector_velocity(s)?)?;
            speed = eig.values.iter().fold(speed, |acc, l| acc.max(l.abs()));
        }
        Ok(speed / (self.min_gap * self.t_total))
    }

    /// exp(−i·H(s_mid)·Δt) for the step [s, s + Δs].
    fn propagator(&self, s_mid: f64, dt: f64) -> Result<CMatrix> {
        let h = self.hamiltonian(s_mid)?;
        expm_antihermitian(&AntiHermitian::skew_part(&h.map(|z| -I * z * dt)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    psi: CVector,
}

impl StateVector {
    pub fn new(psi: CVector) -> Result<Self> {
        let norm = psi.norm();
        if !((norm - 1.0).abs() <= TOL_NORM) {
            return Err(Error::BadParameter(format!(
                "state must be normalized, |psi| = {norm}"
            )));
        }
        Ok(Self { psi })
    }

    pub fn psi(&self) -> &CVector {
        &self.psi
    }

    pub fn into_vector(self) -> CVector {
        self.psi
    }

    pub fn dim(&self) -> usize {
        self.psi.len()
    }

    pub fn norm(&self) -> f64 {
        self.psi.norm()
    }
}

/// Propagates every column of `psi` through the schedule with the midpoint
/// exponential rule.
pub fn evolve_columns(
    schedule: &HamiltonianSchedule,
    psi: &CMatrix,
    n_steps: usize,
) -> Result<CMatrix> {
    schedule.check_steps(n_steps)?;
    crate::matcore::ensure_shape(psi, schedule.ambient_dim(), psi.ncols())?;
    let ds = 1.0 / n_steps as f64;
    let dt = schedule.t_total * ds;
    let mut state = psi.clone();
    for m in 0..n_steps {
        let s_mid = (m as f64 + 0.5) * ds;
        state = schedule.propagator(s_mid, dt)? * state;
    }
    Ok(state)
}

/// iψ' = H(t)ψ on [0, T_total].
pub fn evolve(
    schedule: &HamiltonianSchedule,
    psi0: &StateVector,
    n_steps: usize,
) -> Result<StateVector> {
    let column = CMatrix::from_column_slice(psi0.dim(), 1, psi0.psi.as_slice());
    let out = evolve_columns(schedule, &column, n_steps)?;
    Ok(StateVector {
        psi: out.column(0).into_owned(),
    })
}

/// φ' + (V†V')φ = −iε₁φ in physical time, integrated with midpoint
/// exponentials.
pub fn reduced_evolution(
    schedule: &HamiltonianSchedule,
    phi0: &CVector,
    n_steps: usize,
) -> Result<CVector> {
    schedule.check_steps(n_steps)?;
    let k = schedule.band_dim();
    if phi0.len() != k {
        return Err(Error::Shape {
            expected: (k, 1),
            got: (phi0.len(), 1),
        });
    }
    let ds = 1.0 / n_steps as f64;
    let mut phi = phi0.clone();
    for m in 0..n_steps {
        let s_mid = (m as f64 + 0.5) * ds;
        let a = schedule.connection(s_mid)?;
        let dynamical = -I * schedule.eps1(s_mid) * schedule.t_total;
        let generator =
            a.as_matrix().scale(-ds) + CMatrix::identity(k, k).map(|z| z * dynamical * ds);
        phi = expm_antihermitian(&AntiHermitian::skew_part(&generator))? * phi;
    }
    Ok(phi)
}

/// A final state read back in the V(0) band.
#[derive(Clone, Debug)]
pub struct BandReading {
    /// e^{i∫ε₁} V(0)†ψ(T), the implied action Γφ₀.
    pub action: CVector,
    /// ‖(I − P(0))ψ(T)‖.
    pub leakage: f64,
}

pub fn read_band(final_state: &CVector, schedule: &HamiltonianSchedule) -> Result<BandReading> {
    let v0 = schedule.frame(0.0)?;
    let unphase = C64::from_polar(1.0, schedule.dynamical_phase());
    let coefficients = v0.adjoint() * final_state;
    let leakage = (final_state - &v0 * &coefficients).norm();
    Ok(BandReading {
        action: coefficients.map(|z| z * unphase),
        leakage,
    })
}

/// Strips the dynamical phase and projects onto the starting band.
///
/// Errors when the leakage exceeds [`LEAKAGE_FAILURE`].
pub fn extract_holonomy(
    final_state: &StateVector,
    schedule: &HamiltonianSchedule,
    phi0: &CVector,
) -> Result<BandReading> {
    let k = schedule.band_dim();
    if phi0.len() != k {
        return Err(Error::Shape {
            expected: (k, 1),
            got: (phi0.len(), 1),
        });
    }
    let reading = read_band(final_state.psi(), schedule)?;
    if reading.leakage > LEAKAGE_FAILURE {
        return Err(Error::Adiabaticity {
            leakage: reading.leakage,
        });
    }
    Ok(reading)
}

/// Γ_sim from evolving each column of V(0).
#[derive(Clone, Debug)]
pub struct SimulatedHolonomy {
    pub gamma: CMatrix,
    /// Largest out-of-band norm over the columns.
    pub leakage: f64,
    pub steps: usize,
    pub t_total: f64,
}

impl SimulatedHolonomy {
    pub fn error_against(&self, expected: &CMatrix) -> f64 {
        frobenius_norm(&(&self.gamma - expected))
    }

    pub fn is_hard_failure(&self) -> bool {
        self.leakage > LEAKAGE_FAILURE
    }

    pub fn check(self) -> Result<Self> {
        if self.is_hard_failure() {
            return Err(Error::Adiabaticity {
                leakage: self.leakage,
            });
        }
        Ok(self)
    }
}

/// Evolves V(0) itself; no adiabaticity check is applied to the result.
pub fn simulate_holonomy(
    schedule: &HamiltonianSchedule,
    n_steps: usize,
) -> Result<SimulatedHolonomy> {
    let v0 = schedule.frame(0.0)?;
    let out = evolve_columns(schedule, &v0, n_steps)?;
    let unphase = C64::from_polar(1.0, schedule.dynamical_phase());
    let inside = v0.adjoint() * &out;
    let outside = &out - &v0 * &inside;
    let leakage = outside.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(SimulatedHolonomy {
        gamma: inside.map(|z| z * unphase),
        leakage,
        steps: n_steps,
        t_total: schedule.t_total,
    })
}
