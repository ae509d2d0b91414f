//! The Stiefel bundle S_{N,k}(C) → G_{N,k}(C): orthonormal frames, rank-k
//! projectors, sampled frame curves, and the metric quantities defined on them.
//!
//! Curves are represented by samples, so externally supplied curves go through
//! the same code as the closed-form extremals. Derivatives are centered finite
//! differences (one-sided at the ends) and integrals use the trapezoidal rule.

use crate::error::{Error, Result};
use crate::matcore::{
    ensure_finite, frobenius_norm, identity, unitarity_defect, AntiHermitian, CMatrix,
};

pub const TOL_STIEFEL: f64 = 1e-10;
pub const TOL_PROJECTOR: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-8;

/// An orthonormal k-frame in C^N (V†V = I_k).
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelFrame(CMatrix);

impl StiefelFrame {
    pub fn new(v: CMatrix) -> Result<Self> {
        ensure_finite(&v)?;
        let (n, k) = v.shape();
        if k == 0 || k > n {
            return Err(Error::Shape {
                expected: (n, n.min(k).max(1)),
                got: (n, k),
            });
        }
        let residual = unitarity_defect(&v);
        if residual > TOL_STIEFEL {
            return Err(Error::Structural {
                what: "frame columns are not orthonormal",
                residual,
            });
        }
        Ok(Self(v))
    }

    pub(crate) fn from_orthonormal_unchecked(v: CMatrix) -> Self {
        Self(v)
    }

    /// V₀ = (I_k; 0).
    pub fn canonical(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "canonical frame needs 1 <= k <= n");
        Self(CMatrix::identity(n, k))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rank(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Right action of the structure group, V ↦ Vh.
    pub fn gauge(&self, h: &CMatrix) -> Result<Self> {
        Self::new(&self.0 * h)
    }

    /// Left action of U(N), V ↦ UV.
    pub fn transform(&self, u: &CMatrix) -> Result<Self> {
        Self::new(u * &self.0)
    }

    pub fn project(&self) -> GrassmannPoint {
        GrassmannPoint {
            p: &self.0 * self.0.adjoint(),
            rank: self.rank(),
        }
    }
}

/// A rank-k orthogonal projector on C^N.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannPoint {
    p: CMatrix,
    rank: usize,
}

impl GrassmannPoint {
    pub fn new(p: CMatrix) -> Result<Self> {
        ensure_finite(&p)?;
        let n = p.nrows();
        if p.ncols() != n {
            return Err(Error::Shape {
                expected: (n, n),
                got: p.shape(),
            });
        }
        let herm = frobenius_norm(&(&p - p.adjoint()));
        if herm > TOL_PROJECTOR {
            return Err(Error::Structural {
                what: "projector is not Hermitian",
                residual: herm,
            });
        }
        let idem = frobenius_norm(&(&p * &p - &p));
        if idem > TOL_PROJECTOR {
            return Err(Error::Structural {
                what: "projector is not idempotent",
                residual: idem,
            });
        }
        let trace = p.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > TOL_TRACE || rank < 1.0 || rank as usize > n {
            return Err(Error::Structural {
                what: "projector trace is not an admissible rank",
                residual: (trace - rank).abs(),
            });
        }
        Ok(Self {
            p,
            rank: rank as usize,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// I − P.
    pub fn complement(&self) -> CMatrix {
        identity(self.ambient_dim()) - &self.p
    }
}

/// π: V ↦ VV†.
pub fn project(v: &StiefelFrame) -> GrassmannPoint {
    v.project()
}

/// A sampled frame curve t ↦ V(t) with strictly increasing sample times.
#[derive(Clone, Debug)]
pub struct FramePath {
    times: Vec<f64>,
    frames: Vec<StiefelFrame>,
}

impl FramePath {
    pub fn new(samples: Vec<(f64, StiefelFrame)>) -> Result<Self> {
        let (times, frames): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        Self::from_parts(times, frames)
    }

    pub fn from_parts(times: Vec<f64>, frames: Vec<StiefelFrame>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: times.len(),
            });
        }
        assert_eq!(
            times.len(),
            frames.len(),
            "times and frames differ in length"
        );
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotoneTime { index: i + 1 });
            }
        }
        let shape = frames[0].matrix().shape();
        for f in &frames[1..] {
            if f.matrix().shape() != shape {
                return Err(Error::Shape {
                    expected: shape,
                    got: f.matrix().shape(),
                });
            }
        }
        Ok(Self { times, frames })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[StiefelFrame] {
        &self.frames
    }

    pub fn first(&self) -> &StiefelFrame {
        &self.frames[0]
    }

    pub fn last(&self) -> &StiefelFrame {
        &self.frames[self.frames.len() - 1]
    }

    pub fn ambient_dim(&self) -> usize {
        self.frames[0].ambient_dim()
    }

    pub fn rank(&self) -> usize {
        self.frames[0].rank()
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn projectors(&self) -> Vec<GrassmannPoint> {
        self.frames.iter().map(StiefelFrame::project).collect()
    }

    /// Right-multiplies every sample by h(t).
    pub fn gauge_transform<F>(&self, mut h: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<CMatrix>,
    {
        let frames = self
            .times
            .iter()
            .zip(&self.frames)
            .map(|(&t, v)| v.gauge(&h(t)?))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(self.times.clone(), frames)
    }

    pub fn projector_path(&self) -> ProjectorPath {
        ProjectorPath {
            times: self.times.clone(),
            points: self.projectors(),
        }
    }
}

/// A sampled projector curve t ↦ P(t) on the Grassmannian.
#[derive(Clone, Debug)]
pub struct ProjectorPath {
    times: Vec<f64>,
    points: Vec<GrassmannPoint>,
}

impl ProjectorPath {
    pub fn new(times: Vec<f64>, points: Vec<GrassmannPoint>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: times.len(),
            });
        }
        if times.len() != points.len() {
            return Err(Error::BadParameter(format!(
                "{} sample times for {} projectors",
                times.len(),
                points.len()
            )));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotoneTime { index: i + 1 });
            }
        }
        check_same_shape(points.iter().map(GrassmannPoint::matrix))?;
        Ok(Self { times, points })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[GrassmannPoint] {
        &self.points
    }

    /// ‖P(T) − P(0)‖_F.
    pub fn closure_error(&self) -> f64 {
        frobenius_norm(&(self.points[self.len() - 1].matrix() - self.points[0].matrix()))
    }

    pub fn length(&self) -> Result<f64> {
        grassmann_path_length(&self.points)
    }
}

/// Finite-difference dV/dt at every sample: centered in the interior,
/// one-sided at the two ends.
pub fn frame_velocities(path: &FramePath) -> Vec<CMatrix> {
    sample_derivatives(path.times(), path.frames().iter().map(StiefelFrame::matrix))
}

pub(crate) fn sample_derivatives<'a, I>(times: &[f64], values: I) -> Vec<CMatrix>
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    let v: Vec<&CMatrix> = values.into_iter().collect();
    let n = v.len();
    (0..n)
        .map(|m| {
            let (lo, hi) = match m {
                0 => (0, 1),
                _ if m == n - 1 => (n - 2, n - 1),
                _ => (m - 1, m + 1),
            };
            (v[hi] - v[lo]).unscale(times[hi] - times[lo])
        })
        .collect()
}

/// A = V†V̇ projected onto u(k).
///
/// For a genuine Stiefel tangent V†V̇ is already anti-Hermitian; for
/// finite-difference velocities the discarded Hermitian part is a truncation
/// artefact.
pub fn connection_sample(v: &StiefelFrame, vdot: &CMatrix) -> Result<AntiHermitian> {
    crate::matcore::ensure_shape(vdot, v.ambient_dim(), v.rank())?;
    ensure_finite(vdot)?;
    Ok(AntiHermitian::skew_part(&(v.matrix().adjoint() * vdot)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalCheck {
    pub horizontal: bool,
    pub max_violation: f64,
}

/// Max over interior samples of ‖V†·(centered dV/dt)‖_F, compared with `tol`.
pub fn is_horizontal(path: &FramePath, tol: f64) -> Result<HorizontalCheck> {
    if path.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: path.len(),
        });
    }
    let vel = frame_velocities(path);
    let max_violation = (1..path.len() - 1)
        .map(|m| frobenius_norm(&(path.frames()[m].matrix().adjoint() * &vel[m])))
        .fold(0.0, f64::max);
    Ok(HorizontalCheck {
        horizontal: max_violation <= tol,
        max_violation,
    })
}

/// S[V, Ω] = ∫ tr(V̇†V̇) − tr(Ω V†V̇) dt by the trapezoidal rule.
///
/// An empty `omega_path` means Ω ≡ 0.
pub fn action_functional(path: &FramePath, omega_path: &[AntiHermitian]) -> Result<f64> {
    if !omega_path.is_empty() {
        if omega_path.len() != path.len() {
            return Err(Error::BadParameter(format!(
                "multiplier path has {} samples, frame path has {}",
                omega_path.len(),
                path.len()
            )));
        }
        let k = path.rank();
        if let Some(bad) = omega_path.iter().find(|o| o.dim() != k) {
            return Err(Error::Shape {
                expected: (k, k),
                got: (bad.dim(), bad.dim()),
            });
        }
    }
    let vel = frame_velocities(path);
    let integrand: Vec<f64> = vel
        .iter()
        .enumerate()
        .map(|(m, vdot)| {
            let kinetic = (vdot.adjoint() * vdot).trace().re;
            let constraint = omega_path.get(m).map_or(0.0, |omega| {
                (omega.as_matrix() * path.frames()[m].matrix().adjoint() * vdot)
                    .trace()
                    .re
            });
            kinetic - constraint
        })
        .collect();
    Ok(trapezoid(path.times(), &integrand))
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

fn check_same_shape<'a, I: IntoIterator<Item = &'a CMatrix>>(items: I) -> Result<()> {
    let mut it = items.into_iter();
    if let Some(first) = it.next() {
        for m in it {
            if m.shape() != first.shape() {
                return Err(Error::Shape {
                    expected: first.shape(),
                    got: m.shape(),
                });
            }
        }
    }
    Ok(())
}

/// Chordal length Σ √tr(ΔP ΔP) of a sampled projector curve.
pub fn grassmann_path_length(projectors: &[GrassmannPoint]) -> Result<f64> {
    if projectors.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: projectors.len(),
        });
    }
    check_same_shape(projectors.iter().map(GrassmannPoint::matrix))?;
    if let Some(p) = projectors.iter().find(|p| p.rank() != projectors[0].rank()) {
        return Err(Error::BadParameter(format!(
            "projector rank changes along the path ({} vs {})",
            projectors[0].rank(),
            p.rank()
        )));
    }
    Ok(projectors
        .windows(2)
        .map(|w| {
            let d = w[1].matrix() - w[0].matrix();
            (&d * &d).trace().re.max(0.0).sqrt()
        })
        .sum())
}

/// Chordal length Σ ‖ΔV‖_F of a sampled frame curve (the Stiefel metric
/// tr(dV†dV)).
pub fn stiefel_path_length(path: &FramePath) -> f64 {
    path.frames()
        .windows(2)
        .map(|w| frobenius_norm(&(w[1].matrix() - w[0].matrix())))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, expm_scaled, frobenius_distance, zeros};
    use crate::random::{haar_unitary, random_anti_hermitian, random_frame};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_path<F: Fn(f64) -> StiefelFrame>(n: usize, f: F) -> FramePath {
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (t, f(t))
            })
            .collect();
        FramePath::new(samples).unwrap()
    }

    #[test]
    fn canonical_projection_is_block_identity() {
        let p = StiefelFrame::canonical(4, 2).project();
        let mut expected = zeros(4, 4);
        expected[(0, 0)] = c(1., 0.);
        expected[(1, 1)] = c(1., 0.);
        assert_eq!(p.matrix(), &expected);
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn projection_is_gauge_invariant_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, k) in [(2, 1), (4, 2), (6, 3), (8, 4), (5, 2)] {
            let v = random_frame(&mut rng, n, k);
            let h = haar_unitary(&mut rng, k);
            let p = v.project();
            let ph = v.gauge(&h).unwrap().project();
            assert!(frobenius_distance(p.matrix(), ph.matrix()).unwrap() < 1e-12);
            assert!((p.matrix().trace().re - k as f64).abs() < 1e-10);
            GrassmannPoint::new(p.matrix().clone()).unwrap();
        }
    }

    #[test]
    fn frame_rejects_non_orthonormal() {
        let m = CMatrix::from_element(3, 2, c(1.0, 0.0));
        assert!(StiefelFrame::new(m).is_err());
        assert!(StiefelFrame::new(zeros(2, 3)).is_err());
    }

    #[test]
    fn grassmann_rejects_bad_projectors() {
        assert!(GrassmannPoint::new(identity(2).scale(0.5)).is_err());
        assert!(GrassmannPoint::new(zeros(2, 2)).is_err());
    }

    #[test]
    fn connection_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = StiefelFrame::canonical(4, 2);
        assert_eq!(
            connection_sample(&v, &zeros(4, 2)).unwrap().as_matrix(),
            &zeros(2, 2)
        );
        // Horizontal tangent: only the lower block moves.
        let mut vdot = zeros(4, 2);
        vdot[(2, 0)] = c(0.3, -1.0);
        vdot[(3, 1)] = c(2.0, 0.5);
        let a = connection_sample(&v, &vdot).unwrap();
        assert!(frobenius_norm(a.as_matrix()) < 1e-12);
        // Pure gauge motion V₀ e^{tΩ} has connection Ω at t = 0.
        let omega = random_anti_hermitian(&mut rng, 2);
        let vdot = v.matrix() * omega.as_matrix();
        let a = connection_sample(&v, &vdot).unwrap();
        assert!(frobenius_distance(a.as_matrix(), omega.as_matrix()).unwrap() < 1e-14);
        assert!(connection_sample(&v, &zeros(3, 2)).is_err());
    }

    #[test]
    fn horizontality_of_constant_and_gauge_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v0 = random_frame(&mut rng, 4, 2);
        let constant = uniform_path(10, |_| v0.clone());
        let check = is_horizontal(&constant, 1e-12).unwrap();
        assert!(check.horizontal);
        assert_eq!(check.max_violation, 0.0);

        let omega = random_anti_hermitian(&mut rng, 2);
        let gauge = uniform_path(2001, |t| {
            v0.gauge(&expm_scaled(&omega, t).unwrap()).unwrap()
        });
        let check = is_horizontal(&gauge, 1e-4).unwrap();
        assert!(!check.horizontal);
        let expected = frobenius_norm(omega.as_matrix());
        assert!((check.max_violation - expected).abs() < 1e-4 * expected.max(1.0));

        let short = uniform_path(2, |_| v0.clone());
        assert!(matches!(
            is_horizontal(&short, 1.0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn action_of_gauge_path_is_kinetic_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v0 = StiefelFrame::canonical(4, 2);
        let omega = random_anti_hermitian(&mut rng, 2);
        let path = uniform_path(2001, |t| {
            v0.gauge(&expm_scaled(&omega, t).unwrap()).unwrap()
        });
        let s = action_functional(&path, &[]).unwrap();
        let analytic = (omega.as_matrix().adjoint() * omega.as_matrix()).trace().re;
        assert!((s - analytic).abs() < 1e-4 * analytic, "{s} vs {analytic}");

        let constant = uniform_path(5, |_| v0.clone());
        assert_eq!(action_functional(&constant, &[]).unwrap(), 0.0);
        assert!(action_functional(&constant, &[AntiHermitian::zeros(2)]).is_err());
    }

    #[test]
    fn path_validation() {
        let v = StiefelFrame::canonical(2, 1);
        assert!(FramePath::new(vec![(0.0, v.clone())]).is_err());
        assert!(FramePath::new(vec![(0.0, v.clone()), (0.0, v.clone())]).is_err());
        assert!(
            FramePath::new(vec![(0.0, v.clone()), (1.0, StiefelFrame::canonical(3, 1))]).is_err()
        );
    }

    #[test]
    fn grassmann_length_trivial_cases() {
        let p = StiefelFrame::canonical(4, 2).project();
        assert_eq!(grassmann_path_length(&[p.clone(), p.clone()]).unwrap(), 0.0);
        assert_eq!(
            grassmann_path_length(&[p.clone(), p.clone(), p.clone()]).unwrap(),
            0.0
        );
        assert!(grassmann_path_length(std::slice::from_ref(&p)).is_err());
        let q = StiefelFrame::canonical(2, 1).project();
        assert!(grassmann_path_length(&[p, q]).is_err());
    }
}
