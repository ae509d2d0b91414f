use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural input violation: {what} (residual {residual:.3e})")]
    Structural { what: &'static str, residual: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("rank-deficient input: smallest singular value {sigma_min:.3e}")]
    RankDeficient { sigma_min: f64 },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample times must be strictly increasing (index {index})")]
    NonMonotoneTime { index: usize },

    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error(
        "path is not a closed loop: closure error {closure_error:.3e} exceeds {tolerance:.1e}"
    )]
    NotALoop { closure_error: f64, tolerance: f64 },

    #[error(
        "path rejected: horizontal violation {horizontal_violation:.3e} (tol {horizontal_tol:.1e}), \
         closure error {closure_error:.3e} (tol {closure_tol:.1e})"
    )]
    NotHorizontalLoop {
        horizontal_violation: f64,
        horizontal_tol: f64,
        closure_error: f64,
        closure_tol: f64,
    },

    #[error("start frame does not lie over the first projector (distance {distance:.3e})")]
    StartFrameMismatch { distance: f64 },

    #[error("projector step {step} has norm {norm:.3e} >= 0.5; refine the sampling")]
    StepTooCoarse { step: usize, norm: f64 },

    #[error("angle gamma[{index}] = {gamma} outside [0, 2pi)")]
    BranchViolation { index: usize, gamma: f64 },

    #[error("gate is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("diagonalization residual {residual:.3e} exceeds {tolerance:.1e}")]
    Diagonalization { residual: f64, tolerance: f64 },

    #[error("ambient dimension {n} unsupported; only N = 2k = {expected} is implemented")]
    AmbientDimension { n: usize, expected: usize },

    #[error("unknown gate '{0}'")]
    UnknownGate(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("step-size guard violated: max|H| * T / n = {ratio:.3e} > 0.1")]
    StepSizeGuard { ratio: f64 },

    #[error("spectral gap {gap:.3e} below required minimum {gap_min:.1e}")]
    GapTooSmall { gap: f64, gap_min: f64 },

    #[error("adiabaticity failure: leakage {leakage:.3e} > 0.5 (traversal too fast)")]
    Adiabaticity { leakage: f64 },

    #[error(
        "synthesis verification failed: closure error {closure_error:.3e}, \
         holonomy error {holonomy_error:.3e}, tolerance {tolerance:.1e}"
    )]
    Verification {
        closure_error: f64,
        holonomy_error: f64,
        tolerance: f64,
        report: Box<crate::synthesis::SynthesisReport>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
