//! Spectrum analysis, first-order time-dependent perturbation theory,
//! golden-rule rates, exact propagation of the Schroedinger equation, and
//! resonance scans.

mod propagate;
mod scan;
mod spectrum;
mod tdpt;

pub use propagate::{
    propagate, Integrator, PropagationMode, PropagationResult, PropagationSettings,
};
pub use scan::{
    compare_first_order_vs_exact, fit_power_law, scan_resonances, DiscrepancyReport, Peak,
    ResonanceScan, ScanSettings,
};
pub use spectrum::{diagonalize, parity_label, SpectrumResult};
pub use tdpt::{
    golden_rule_from_record, golden_rule_rate, sinc, tdpt_probability_full, tdpt_probability_rw,
    transition_amplitude, transition_record, transition_table, Channel, ChannelEntry, DeltaKernel,
    RateEntry, RateTable, TransitionRecord,
};
