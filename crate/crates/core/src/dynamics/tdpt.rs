//! First-order time-dependent perturbation theory: finite-time transition
//! amplitudes, probabilities with and without interference terms, and
//! golden-rule rates against a normalized delta surrogate.

use num_complex::Complex64 as C64;

use crate::background::BackgroundModel;
use crate::dynamics::spectrum::SpectrumResult;
use crate::hamiltonian::HiggsOperatorSet;
use crate::{Error, Result};

/// Resonance channel of one fluctuation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// `E_j ~ E_i + hbar omega_n`; resonant when `omega_ji - omega_n ~ 0`.
    Absorption,
    /// `E_j ~ E_i - hbar omega_n`; resonant when `omega_ji + omega_n ~ 0`.
    Emission,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::Absorption => "absorption",
            Channel::Emission => "emission",
        }
    }

    /// Sign of `omega_n` in the detuning `omega_ji +/- omega_n`.
    fn sign(self) -> f64 {
        match self {
            Channel::Emission => 1.0,
            Channel::Absorption => -1.0,
        }
    }
}

/// Per-mode, per-channel kinematics of one transition.
#[derive(Debug, Clone, Copy)]
pub struct ChannelEntry {
    pub mode_index: usize,
    pub channel: Channel,
    /// `omega_ji + omega_n` (emission) or `omega_ji - omega_n` (absorption).
    pub detuning: f64,
    /// `|omega_n V1_ji - i V1~_ji|^2` (emission) or `|.. + i ..|^2` (absorption).
    pub weight: f64,
}

/// Matrix elements and channel table for one `i -> j` pair.
#[derive(Debug, Clone)]
pub struct TransitionRecord {
    pub i: usize,
    pub j: usize,
    pub omega_ji: f64,
    pub v1_ji: C64,
    pub v1t_ji: C64,
    pub channels: Vec<ChannelEntry>,
}

fn matrix_element(m: &crate::linalg::CMatrix, spectrum: &SpectrumResult, j: usize, i: usize) -> C64 {
    let bra = spectrum.states().column(j);
    let ket = spectrum.states().column(i);
    (bra.adjoint() * m * ket)[(0, 0)]
}

fn channel_weight(omega_n: f64, v1: C64, v1t: C64, channel: Channel) -> f64 {
    let i_unit = C64::new(0.0, 1.0);
    match channel {
        Channel::Emission => (v1 * omega_n - i_unit * v1t).norm_sqr(),
        Channel::Absorption => (v1 * omega_n + i_unit * v1t).norm_sqr(),
    }
}

/// Build the transition record for an ordered pair `(i, j)`.
pub fn transition_record(
    i: usize,
    j: usize,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
) -> TransitionRecord {
    let omega_ji = spectrum.omega(i, j);
    let v1_ji = matrix_element(ops.v1.matrix(), spectrum, j, i);
    let v1t_ji = matrix_element(ops.v1_tilde.matrix(), spectrum, j, i);
    let mut channels = Vec::with_capacity(2 * model.modes().len());
    for (n, mode) in model.modes().iter().enumerate() {
        for channel in [Channel::Emission, Channel::Absorption] {
            channels.push(ChannelEntry {
                mode_index: n,
                channel,
                detuning: omega_ji + channel.sign() * mode.omega,
                weight: channel_weight(mode.omega, v1_ji, v1t_ji, channel),
            });
        }
    }
    TransitionRecord {
        i,
        j,
        omega_ji,
        v1_ji,
        v1t_ji,
        channels,
    }
}

/// Records for every ordered pair whose largest coupling element exceeds
/// `threshold` (absolute).
pub fn transition_table(
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
    threshold: f64,
) -> Vec<TransitionRecord> {
    let d = spectrum.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let rec = transition_record(i, j, spectrum, ops, model);
            if rec.v1_ji.norm().max(rec.v1t_ji.norm()) > threshold {
                out.push(rec);
            }
        }
    }
    out
}

/// `sin(z)/z` with a series branch near zero.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Finite-time amplitude of one mode and channel,
/// `A_n(t) = alpha_n e^{i delta t / 2} sin(delta t / 2) / (delta / 2)`
/// with `delta = omega_ji +/- omega_n`; the removable singularity at zero
/// detuning evaluates to `alpha_n t`.
pub fn transition_amplitude(t: f64, omega_ji: f64, mode: &crate::background::FluctuationMode, channel: Channel) -> C64 {
    let delta = omega_ji + channel.sign() * mode.omega;
    let z = 0.5 * delta * t;
    let magnitude = if (delta * t).abs() < 1e-6 {
        mode.alpha * t * sinc(z)
    } else {
        mode.alpha * z.sin() / (0.5 * delta)
    };
    C64::from_polar(1.0, z) * magnitude
}

fn check_off_diagonal(i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::DiagonalTransition);
    }
    Ok(())
}

/// Transition probability with all interference terms retained:
/// `P = lambda0/(4 hbar^2) |sum_n A_n^+ (w_n V1 - i V1~) + A_n^- (w_n V1 + i V1~)|^2`.
pub fn tdpt_probability_full(
    i: usize,
    j: usize,
    t: f64,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
) -> Result<f64> {
    check_off_diagonal(i, j)?;
    model.warn_if_unresolved(t);
    let rec = transition_record(i, j, spectrum, ops, model);
    let i_unit = C64::new(0.0, 1.0);
    let mut sum = C64::new(0.0, 0.0);
    for (n, mode) in model.modes().iter().enumerate() {
        let _ = n;
        let a_plus = transition_amplitude(t, rec.omega_ji, mode, Channel::Emission);
        let a_minus = transition_amplitude(t, rec.omega_ji, mode, Channel::Absorption);
        sum += a_plus * (rec.v1_ji * mode.omega - i_unit * rec.v1t_ji);
        sum += a_minus * (rec.v1_ji * mode.omega + i_unit * rec.v1t_ji);
    }
    let hbar = model.hbar();
    Ok(model.lambda0() / (4.0 * hbar * hbar) * sum.norm_sqr())
}

/// Transition probability with the interference terms dropped (valid for
/// well-separated resonances at long times).
pub fn tdpt_probability_rw(
    i: usize,
    j: usize,
    t: f64,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
) -> Result<f64> {
    check_off_diagonal(i, j)?;
    let rec = transition_record(i, j, spectrum, ops, model);
    let mut sum = 0.0;
    for mode in model.modes() {
        for channel in [Channel::Emission, Channel::Absorption] {
            let a = transition_amplitude(t, rec.omega_ji, mode, channel);
            sum += a.norm_sqr() * channel_weight(mode.omega, rec.v1_ji, rec.v1t_ji, channel);
        }
    }
    let hbar = model.hbar();
    Ok(model.lambda0() / (4.0 * hbar * hbar) * sum)
}

/// Normalized replacement for the energy delta function; `int K(E) dE = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaKernel {
    /// Finite-time sinc-squared kernel, the pre-limit form of the golden rule.
    Sinc2 { t_probe: f64 },
    Lorentzian { eta: f64 },
    Gaussian { sigma: f64 },
}

impl DeltaKernel {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match self {
            DeltaKernel::Sinc2 { t_probe } => ("t_probe", *t_probe),
            DeltaKernel::Lorentzian { eta } => ("eta", *eta),
            DeltaKernel::Gaussian { sigma } => ("sigma", *sigma),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kernel_param",
                message: format!("{name} must be finite and > 0, got {v}"),
            });
        }
        Ok(())
    }

    /// Kernel value at energy mismatch `e`.
    pub fn eval(&self, e: f64, hbar: f64) -> f64 {
        match self {
            DeltaKernel::Sinc2 { t_probe } => {
                let s = sinc(0.5 * e * t_probe / hbar);
                t_probe / (std::f64::consts::TAU * hbar) * s * s
            }
            DeltaKernel::Lorentzian { eta } => {
                eta / (std::f64::consts::PI * (e * e + eta * eta))
            }
            DeltaKernel::Gaussian { sigma } => {
                (-0.5 * (e / sigma).powi(2)).exp() / (sigma * (std::f64::consts::TAU).sqrt())
            }
        }
    }

    /// Width over which the kernel resolves energies, used for warnings.
    pub fn energy_width(&self, hbar: f64) -> f64 {
        match self {
            DeltaKernel::Sinc2 { t_probe } => std::f64::consts::TAU * hbar / t_probe,
            DeltaKernel::Lorentzian { eta } => *eta,
            DeltaKernel::Gaussian { sigma } => *sigma,
        }
    }
}

/// One mode/channel contribution to the rate.
#[derive(Debug, Clone, Copy)]
pub struct RateEntry {
    pub mode_index: usize,
    pub channel: Channel,
    pub detuning: f64,
    pub gamma: f64,
}

/// Golden-rule rate table for a pair `i -> j`.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub i: usize,
    pub j: usize,
    pub total: f64,
    pub entries: Vec<RateEntry>,
}

/// Golden-rule transition rate
/// `Gamma = (2 pi / hbar)(lambda0 / 4) sum_n alpha_n^2 [ w+ K(E_j - E_i + hbar w_n)
///  + w- K(E_j - E_i - hbar w_n) ]` with a per-mode, per-channel breakdown.
pub fn golden_rule_rate(
    i: usize,
    j: usize,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
    kernel: DeltaKernel,
) -> Result<RateTable> {
    check_off_diagonal(i, j)?;
    let rec = transition_record(i, j, spectrum, ops, model);
    golden_rule_from_record(&rec, spectrum, model, kernel)
}

/// Rate table from an already-computed transition record.
pub fn golden_rule_from_record(
    rec: &TransitionRecord,
    spectrum: &SpectrumResult,
    model: &BackgroundModel,
    kernel: DeltaKernel,
) -> Result<RateTable> {
    check_off_diagonal(rec.i, rec.j)?;
    kernel.validate()?;
    let hbar = model.hbar();
    model.warn_if_unresolved(std::f64::consts::TAU * hbar / kernel.energy_width(hbar));
    let de = spectrum.energy(rec.j) - spectrum.energy(rec.i);
    let prefactor = std::f64::consts::TAU / hbar * model.lambda0() / 4.0;
    let mut entries = Vec::with_capacity(2 * model.modes().len());
    let mut total = 0.0;
    for (n, mode) in model.modes().iter().enumerate() {
        for channel in [Channel::Emission, Channel::Absorption] {
            let weight = channel_weight(mode.omega, rec.v1_ji, rec.v1t_ji, channel);
            let e_arg = de + channel.sign() * hbar * mode.omega;
            let gamma = prefactor * mode.alpha * mode.alpha * weight * kernel.eval(e_arg, hbar);
            entries.push(RateEntry {
                mode_index: n,
                channel,
                detuning: rec.omega_ji + channel.sign() * mode.omega,
                gamma,
            });
            total += gamma;
        }
    }
    Ok(RateTable {
        i: rec.i,
        j: rec.j,
        total,
        entries,
    })
}
