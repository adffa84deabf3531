//! Quantum dynamics of a 2D isotropic harmonic oscillator constrained to a
//! sphere whose radius fluctuates in time.
//!
//! The crate assembles the curved-space (Higgs) oscillator Hamiltonian in a
//! truncated Fock basis, the perturbation operators induced by small radius
//! fluctuations, and provides spectra, first-order transition probabilities,
//! golden-rule rates and exact time-dependent propagation to validate them.

pub mod background;
pub mod basis;
pub mod dynamics;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod validate;

pub use background::{BackgroundModel, FluctuationMode};
pub use basis::{BasisIndex, BasisScope, BasisSpec, OperatorMatrix};
pub use dynamics::{
    diagonalize, golden_rule_rate, propagate, scan_resonances, DeltaKernel, Integrator,
    PropagationMode, PropagationResult, ResonanceScan, SpectrumResult, TransitionRecord,
};
pub use hamiltonian::HiggsOperatorSet;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("amplitude guard violated: sum(alpha)/r0 = {ratio:.3e} exceeds {guard:.3e}")]
    AmplitudeGuard { ratio: f64, guard: f64 },
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("quadrature order {order} below polynomial exactness floor {floor}")]
    QuadratureOrderTooLow { order: usize, floor: usize },
    #[error("operator `{label}` lost hermiticity: residual {residual:.3e} exceeds {tolerance:.3e}")]
    HermiticityViolation {
        label: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("degenerate cluster could not be rotated to the angular momentum basis: {0}")]
    ClusterRotation(String),
    #[error("norm drift {drift:.3e} exceeds budget {budget:.3e}; retry with dt <= {suggested_dt:.3e}")]
    NormDrift {
        drift: f64,
        budget: f64,
        suggested_dt: f64,
    },
    #[error("time step {dt:.3e} too coarse for the fastest period; need dt <= {required:.3e}")]
    StepTooLarge { dt: f64, required: f64 },
    #[error("resonance scan grid is empty")]
    EmptyScanGrid,
    #[error("first-order transition probability is undefined on the diagonal (i == j)")]
    DiagonalTransition,
    #[error("unknown delta kernel `{0}`")]
    UnknownKernel(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
