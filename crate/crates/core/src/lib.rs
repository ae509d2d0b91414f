//! Minimum-length holonomic gate synthesis.
//!
//! A target gate U ∈ U(k) is realized as the holonomy of a closed horizontal
//! curve on the Stiefel bundle over the Grassmannian G(2k, k). The curve is the
//! extremal V(t) = e^{tX}V₀e^{−tΩ} with X built in closed form from the
//! spectrum of U; [`holonomy`] and [`adiabatic`] verify the result
//! independently.

// `!(x > y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod bloch;
pub mod error;
pub mod extremal;
pub mod holonomy;
pub mod manifold;
pub mod matcore;
pub mod random;
pub mod synthesis;

pub use adiabatic::{HamiltonianSchedule, SimulatedHolonomy, StateVector};
pub use error::{Error, Result};
pub use extremal::{Controller, ExtremalCurve};
pub use holonomy::{HolonomyMethod, HolonomyReport};
pub use manifold::{FramePath, GrassmannPoint, ProjectorPath, StiefelFrame};
pub use matcore::{AntiHermitian, CMatrix, CVector, C64};
pub use synthesis::{GateSpectrum, SynthesisOptions, SynthesisReport, UnitaryGate};
