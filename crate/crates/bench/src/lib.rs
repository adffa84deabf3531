//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared setup helpers for the benchmarks live here so the bench target
//! stays minimal.

use sphosc_core::background::{BackgroundModel, FluctuationMode};
use sphosc_core::basis::BasisSpec;
use sphosc_core::dynamics::{diagonalize, SpectrumResult};
use sphosc_core::hamiltonian::HiggsOperatorSet;

/// Standard benchmark scene: curvature 0.04, one resonant-ish mode.
pub fn scene(n_max: usize) -> (BackgroundModel, BasisSpec, HiggsOperatorSet, SpectrumResult) {
    let model = BackgroundModel::new(
        5.0,
        vec![FluctuationMode {
            alpha: 1e-3,
            omega: 2.08,
        }],
        1.0,
    )
    .expect("valid model");
    let basis = BasisSpec::with_pad(n_max, 6);
    let set = HiggsOperatorSet::build(&basis, model.lambda0(), model.hbar()).expect("assembly");
    let spectrum = diagonalize(&set.h0, &set.lz, model.hbar()).expect("spectrum");
    (model, basis, set, spectrum)
}
