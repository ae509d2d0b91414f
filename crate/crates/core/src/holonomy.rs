//! Numerical holonomy of sampled loops.
//!
//! Three independent routes to Γ ∈ U(k):
//! - [`analytic_holonomy`]: Γ = V(0)†V(T) read off a closed-form extremal curve;
//! - [`ordered_product_holonomy`]: Γ = V(0)†V(T)·T exp(−∫V†dV) for any sampled
//!   frame loop, horizontal or not;
//! - [`lifted_holonomy`]: transports a start frame horizontally over a sampled
//!   projector loop and reads Γ from the end frame.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremal::ExtremalCurve;
use crate::manifold::{connection_sample, is_horizontal, FramePath, ProjectorPath, StiefelFrame};
use crate::matcore::{
    expm_antihermitian, frobenius_norm, identity, polar_factor, polar_retract, unitarity_defect,
    AntiHermitian, CMatrix,
};

/// Default closure tolerance for accepting a sampled path as a loop.
pub const TOL_LOOP: f64 = 1e-6;

/// Largest admissible ‖ΔP‖_F between consecutive projector samples.
pub const MAX_PROJECTOR_STEP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HolonomyMethod {
    Analytic,
    OrderedProduct,
    LiftedOde,
}

impl HolonomyMethod {
    pub fn name(self) -> &'static str {
        match self {
            HolonomyMethod::Analytic => "analytic",
            HolonomyMethod::OrderedProduct => "ordered_product",
            HolonomyMethod::LiftedOde => "lifted_ode",
        }
    }

    /// Unitarity tolerance the method guarantees for `gamma`.
    pub fn unitarity_tolerance(self) -> f64 {
        match self {
            HolonomyMethod::Analytic => 1e-11,
            _ => 1e-8,
        }
    }
}

impl std::fmt::Display for HolonomyMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct HolonomyReport {
    /// Γ, projected to the nearest unitary.
    pub gamma: CMatrix,
    /// Γ before the unitary projection.
    pub raw_gamma: CMatrix,
    pub closure_error: f64,
    pub horizontal_violation: f64,
    pub method: HolonomyMethod,
}

impl HolonomyReport {
    fn from_raw(
        raw_gamma: CMatrix,
        closure_error: f64,
        horizontal_violation: f64,
        method: HolonomyMethod,
    ) -> Result<Self> {
        let gamma = polar_factor(&raw_gamma)?;
        Ok(Self {
            gamma,
            raw_gamma,
            closure_error,
            horizontal_violation,
            method,
        })
    }

    /// ‖Γ_raw†Γ_raw − I‖_F.
    pub fn raw_unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.raw_gamma)
    }

    pub fn error_against(&self, expected: &CMatrix) -> f64 {
        frobenius_norm(&(&self.gamma - expected))
    }
}

/// ‖P(T) − P(0)‖_F for the projectors of the end frames.
pub fn closure_error(path: &FramePath) -> f64 {
    let p0 = path.first().project();
    let p1 = path.last().project();
    frobenius_norm(&(p1.matrix() - p0.matrix()))
}

fn ensure_loop(closure_error: f64, tolerance: f64) -> Result<()> {
    if !(closure_error <= tolerance) {
        return Err(Error::NotALoop {
            closure_error,
            tolerance,
        });
    }
    Ok(())
}

/// Γ = V(0)†V(T) of a closed-form extremal curve.
pub fn analytic_holonomy(curve: &ExtremalCurve) -> Result<HolonomyReport> {
    let end = curve.evaluate(curve.duration())?;
    let start = curve.start();
    let closure = frobenius_norm(&(end.project().matrix() - start.project().matrix()));
    let raw = start.matrix().adjoint() * end.matrix();
    HolonomyReport::from_raw(raw, closure, 0.0, HolonomyMethod::Analytic)
}

#[derive(Clone, Copy, Debug)]
pub struct OrderedProductOptions {
    pub tol_loop: f64,
    /// Number of contiguous segments whose partial products are formed in
    /// parallel before being multiplied in order. 1 means fully sequential.
    pub segments: usize,
}

impl Default for OrderedProductOptions {
    fn default() -> Self {
        Self {
            tol_loop: TOL_LOOP,
            segments: 1,
        }
    }
}

/// Connection A at the midpoint of each sampling interval, from the centered
/// difference (V_{m+1} − V_m)/Δ and the midpoint frame polar(V_m + V_{m+1}).
pub fn midpoint_connections(path: &FramePath) -> Result<Vec<AntiHermitian>> {
    let times = path.times();
    let frames = path.frames();
    (0..path.len() - 1)
        .map(|m| {
            let (a, b) = (frames[m].matrix(), frames[m + 1].matrix());
            let dt = times[m + 1] - times[m];
            let mid = polar_retract(&(a + b))?;
            let vdot = (b - a).unscale(dt);
            connection_sample(&mid, &vdot)
        })
        .collect()
}

/// Γ = V(0)†V(T)·Π_m exp(−A_m Δ_m), later factors to the left.
pub fn ordered_product_holonomy(path: &FramePath) -> Result<HolonomyReport> {
    ordered_product_holonomy_with(path, OrderedProductOptions::default())
}

pub fn ordered_product_holonomy_with(
    path: &FramePath,
    options: OrderedProductOptions,
) -> Result<HolonomyReport> {
    let closure = closure_error(path);
    ensure_loop(closure, options.tol_loop)?;

    let connections = midpoint_connections(path)?;
    let times = path.times();
    let factors = connections
        .par_iter()
        .enumerate()
        .map(|(m, a)| expm_antihermitian(&a.scale(-(times[m + 1] - times[m]))))
        .collect::<Result<Vec<_>>>()?;
    let horizontal_violation = connections
        .iter()
        .map(|a| frobenius_norm(a.as_matrix()))
        .fold(0.0, f64::max);

    let k = path.rank();
    let ordered = time_ordered_product(&factors, k, options.segments.max(1));
    let raw = path.first().matrix().adjoint() * path.last().matrix() * ordered;
    HolonomyReport::from_raw(
        raw,
        closure,
        horizontal_violation,
        HolonomyMethod::OrderedProduct,
    )
}

/// F_{n−1} ⋯ F_1 F_0, optionally split into contiguous chunks whose partial
/// products are formed concurrently.
fn time_ordered_product(factors: &[CMatrix], k: usize, segments: usize) -> CMatrix {
    let fold = |chunk: &[CMatrix]| chunk.iter().fold(identity(k), |acc, f| f * acc);
    if segments <= 1 || factors.len() < 2 * segments {
        return fold(factors);
    }
    let chunk_len = factors.len().div_ceil(segments);
    let partials: Vec<CMatrix> = factors.par_chunks(chunk_len).map(fold).collect();
    partials.iter().fold(identity(k), |acc, p| p * acc)
}

/// Γ = V(0)†V(T) for a path that is already horizontal, after checking
/// horizontality and closure.
pub fn holonomy_of_horizontal_loop(
    path: &FramePath,
    horizontal_tol: f64,
    tol_loop: f64,
) -> Result<HolonomyReport> {
    let check = is_horizontal(path, horizontal_tol)?;
    let closure = closure_error(path);
    if !check.horizontal || !(closure <= tol_loop) {
        return Err(Error::NotHorizontalLoop {
            horizontal_violation: check.max_violation,
            horizontal_tol,
            closure_error: closure,
            closure_tol: tol_loop,
        });
    }
    let raw = path.first().matrix().adjoint() * path.last().matrix();
    HolonomyReport::from_raw(raw, closure, check.max_violation, HolonomyMethod::Analytic)
}

/// Horizontal lift of a sampled projector curve through `v_start`.
///
/// Integrates dV/dt = (ṖP − PṖ)V, whose solutions satisfy V†V̇ = 0 and stay
/// over P(t). Each step applies exp(Δ·[Ṗ, P]) evaluated at the interval
/// midpoint with Ṗ = ΔP/Δ and P = (P_m + P_{m+1})/2, followed by a polar
/// retraction.
pub fn horizontal_lift(projectors: &ProjectorPath, v_start: &StiefelFrame) -> Result<FramePath> {
    let points = projectors.points();
    let p0 = points[0].matrix();
    if v_start.ambient_dim() != p0.nrows() || v_start.rank() != points[0].rank() {
        return Err(Error::Shape {
            expected: (p0.nrows(), points[0].rank()),
            got: v_start.matrix().shape(),
        });
    }
    let distance = frobenius_norm(&(v_start.project().matrix() - p0));
    if distance > 1e-8 {
        return Err(Error::StartFrameMismatch { distance });
    }
    for (step, w) in points.windows(2).enumerate() {
        let norm = frobenius_norm(&(w[1].matrix() - w[0].matrix()));
        if norm >= MAX_PROJECTOR_STEP {
            return Err(Error::StepTooCoarse { step, norm });
        }
    }

    let mut frames = Vec::with_capacity(points.len());
    frames.push(v_start.clone());
    let mut v = v_start.matrix().clone();
    for w in points.windows(2) {
        let (a, b) = (w[0].matrix(), w[1].matrix());
        let dp = b - a;
        let mid = (a + b).scale(0.5);
        // Δ·(ṖP − PṖ) with Ṗ = ΔP/Δ.
        let generator = AntiHermitian::skew_part(&(&dp * &mid - &mid * &dp));
        let step = expm_antihermitian(&generator)?;
        let next = polar_retract(&(step * &v))?;
        v = next.matrix().clone();
        frames.push(next);
    }
    FramePath::from_parts(projectors.times().to_vec(), frames)
}

/// Holonomy of a projector loop via [`horizontal_lift`]: Γ = V(0)†V_lift(T).
pub fn lifted_holonomy(
    projectors: &ProjectorPath,
    v_start: &StiefelFrame,
    tol_loop: f64,
) -> Result<(HolonomyReport, FramePath)> {
    let closure = projectors.closure_error();
    ensure_loop(closure, tol_loop)?;
    let lifted = horizontal_lift(projectors, v_start)?;
    let violation = midpoint_connections(&lifted)?
        .iter()
        .map(|a| frobenius_norm(a.as_matrix()))
        .fold(0.0, f64::max);
    let raw = lifted.first().matrix().adjoint() * lifted.last().matrix();
    let report = HolonomyReport::from_raw(raw, closure, violation, HolonomyMethod::LiftedOde)?;
    Ok((report, lifted))
}

/// A fixed, generic gauge generator Ω̂ ∈ u(k) used to turn a horizontal loop
/// into a non-horizontal sampling of the same projector loop.
///
/// Diagonal i(0.5 + 0.25j), nearest off-diagonals ±0.3 + 0.1i.
pub fn reference_twist(k: usize) -> AntiHermitian {
    let mut m = CMatrix::zeros(k, k);
    for j in 0..k {
        m[(j, j)] = crate::matcore::c(0.0, 0.5 + 0.25 * j as f64);
        if j + 1 < k {
            m[(j, j + 1)] = crate::matcore::c(0.3, 0.1);
            m[(j + 1, j)] = crate::matcore::c(-0.3, 0.1);
        }
    }
    AntiHermitian::skew_part(&m)
}

/// The frame path t ↦ V(t)e^{(t/T)Ω̂}; same projectors, same holonomy.
pub fn twisted_path(path: &FramePath, omega_hat: &AntiHermitian) -> Result<FramePath> {
    let flow = crate::matcore::UnitaryFlow::new(omega_hat)?;
    let (t0, duration) = (path.times()[0], path.duration());
    path.gauge_transform(|t| Ok(flow.at((t - t0) / duration)))
}

/// ‖V(T) − V(0)Γ‖_F: how far the transported end frame is from the frame the
/// holonomy Γ predicts.
pub fn transport_error(path: &FramePath, gamma: &CMatrix) -> f64 {
    frobenius_norm(&(path.last().matrix() - path.first().matrix() * gamma))
}

/// Observed order log2(e_coarse / e_fine) for a step halving.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{stationary_controller, Controller};
    use crate::matcore::{c, expm_scaled, frobenius_distance, zeros};
    use crate::random::{ginibre, random_anti_hermitian, random_frame};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn phase_pi_curve() -> ExtremalCurve {
        let mut w = zeros(1, 1);
        w[(0, 0)] = c(0.0, PI);
        ExtremalCurve::new(Controller::new(AntiHermitian::zeros(1), w).unwrap()).unwrap()
    }

    fn random_curve(rng: &mut ChaCha8Rng, k: usize) -> ExtremalCurve {
        let ctrl = Controller::new(random_anti_hermitian(rng, k), ginibre(rng, k, k)).unwrap();
        ExtremalCurve::new(ctrl).unwrap()
    }

    fn constant_path(v: &StiefelFrame, n: usize) -> FramePath {
        FramePath::new((0..n).map(|i| (i as f64, v.clone())).collect()).unwrap()
    }

    #[test]
    fn constant_path_has_trivial_holonomy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_frame(&mut rng, 4, 2);
        let path = constant_path(&v, 5);
        assert_eq!(closure_error(&path), 0.0);
        for report in [
            ordered_product_holonomy(&path).unwrap(),
            holonomy_of_horizontal_loop(&path, 1e-12, 1e-12).unwrap(),
            lifted_holonomy(&path.projector_path(), &v, 1e-12)
                .unwrap()
                .0,
        ] {
            assert!(
                report.error_against(&identity(2)) < 1e-12,
                "{:?}",
                report.method
            );
        }
        let lifted = horizontal_lift(&path.projector_path(), &v).unwrap();
        for f in lifted.frames() {
            assert!(frobenius_distance(f.matrix(), v.matrix()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn closure_of_gauge_equivalent_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = random_frame(&mut rng, 4, 2);
        let h = crate::random::haar_unitary(&mut rng, 2);
        let path = FramePath::new(vec![(0.0, v.clone()), (1.0, v.gauge(&h).unwrap())]).unwrap();
        assert!(closure_error(&path) < 1e-12);
    }

    #[test]
    fn open_half_loop_closure_error() {
        let curve = phase_pi_curve();
        let path = FramePath::new(
            (0..=50)
                .map(|i| {
                    let t = 0.5 * i as f64 / 50.0;
                    (t, curve.evaluate(t).unwrap())
                })
                .collect(),
        )
        .unwrap();
        let expected = frobenius_norm(
            &(curve.evaluate(0.5).unwrap().project().matrix() - curve.start().project().matrix()),
        );
        let e = closure_error(&path);
        assert!(e > 0.0);
        assert!((e - expected).abs() < 1e-15);
        assert!(matches!(
            ordered_product_holonomy(&path),
            Err(Error::NotALoop { .. })
        ));
    }

    #[test]
    fn phase_gate_loop_ordered_product() {
        let path = phase_pi_curve().sample(4000).unwrap();
        let r = ordered_product_holonomy(&path).unwrap();
        assert!((r.gamma[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn gauge_twist_leaves_ordered_product_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let curve = phase_pi_curve();
        let path = curve.sample(4000).unwrap();
        let twist = random_anti_hermitian(&mut rng, 1);
        let twisted = path.gauge_transform(|t| expm_scaled(&twist, t)).unwrap();
        let a = ordered_product_holonomy(&path).unwrap();
        let b = ordered_product_holonomy(&twisted).unwrap();
        assert!(frobenius_distance(&a.gamma, &b.gamma).unwrap() < 1e-5);
        // The twisted path is not horizontal, so the direct reading fails.
        assert!(holonomy_of_horizontal_loop(&twisted, 1e-4, TOL_LOOP).is_err());
    }

    #[test]
    fn lift_of_phase_gate_loop() {
        let curve = phase_pi_curve();
        let path = curve.sample(4000).unwrap();
        let (report, lifted) =
            lifted_holonomy(&path.projector_path(), curve.start(), TOL_LOOP).unwrap();
        assert!((report.gamma[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-5);
        let end = curve.evaluate(1.0).unwrap();
        assert!(frobenius_distance(lifted.last().matrix(), end.matrix()).unwrap() < 1e-5);
        assert!(is_horizontal(&lifted, 1e-4).unwrap().horizontal);
    }

    #[test]
    fn lift_tracks_projectors_and_is_horizontal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let curve = random_curve(&mut rng, 2);
        let path = curve.sample(1001).unwrap();
        let lifted = horizontal_lift(&path.projector_path(), curve.start()).unwrap();
        let drift = lifted
            .frames()
            .iter()
            .zip(path.frames())
            .map(|(a, b)| frobenius_distance(a.project().matrix(), b.project().matrix()).unwrap())
            .fold(0.0, f64::max);
        assert!(drift < 1e-3, "projector drift {drift}");
        // The extremal curve is itself horizontal, so by uniqueness the lift
        // reproduces it.
        let frame_err = lifted
            .frames()
            .iter()
            .zip(path.frames())
            .map(|(a, b)| frobenius_distance(a.matrix(), b.matrix()).unwrap())
            .fold(0.0, f64::max);
        assert!(frame_err < 1e-3, "frame error {frame_err}");
    }

    #[test]
    fn lift_rejects_bad_inputs() {
        let curve = phase_pi_curve();
        let path = curve.sample(100).unwrap();
        let wrong = StiefelFrame::canonical(2, 1)
            .transform(&expm_scaled(&curve.controller().x(), 0.3).unwrap())
            .unwrap();
        assert!(matches!(
            horizontal_lift(&path.projector_path(), &wrong),
            Err(Error::StartFrameMismatch { .. })
        ));
        let coarse = curve.sample(4).unwrap();
        assert!(matches!(
            horizontal_lift(&coarse.projector_path(), curve.start()),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn horizontal_loop_reading_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=3 {
            let curve = random_curve(&mut rng, k);
            // Only loops close; a random controller generally does not.
            let analytic = analytic_holonomy(&curve).unwrap();
            let path = curve.sample(801).unwrap();
            let direct = path.first().matrix().adjoint() * path.last().matrix();
            assert!(frobenius_distance(&direct, &analytic.raw_gamma).unwrap() < 1e-12);
        }
        let stationary = ExtremalCurve::new(stationary_controller(2)).unwrap();
        let r = holonomy_of_horizontal_loop(&stationary.sample(50).unwrap(), 1e-10, 1e-10).unwrap();
        assert!(r.error_against(&identity(2)) < 1e-12);
    }

    #[test]
    fn parallel_segments_match_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let curve = phase_pi_curve();
        let twist = random_anti_hermitian(&mut rng, 1);
        let path = curve
            .sample(3001)
            .unwrap()
            .gauge_transform(|t| expm_scaled(&twist, t))
            .unwrap();
        let seq = ordered_product_holonomy(&path).unwrap();
        for segments in [2, 3, 8] {
            let par = ordered_product_holonomy_with(
                &path,
                OrderedProductOptions {
                    segments,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(frobenius_distance(&seq.raw_gamma, &par.raw_gamma).unwrap() < 1e-12);
        }
    }

    #[test]
    fn order_estimate() {
        assert!((convergence_order(4e-6, 1e-6) - 2.0).abs() < 1e-12);
    }
}
