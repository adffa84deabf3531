//! Fluctuating spherical background: radius law, first-order curvature
//! expansion and the scalar signals that multiply the perturbation operators.

use crate::{Error, Result};

/// One sinusoidal fluctuation mode of the sphere radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationMode {
    /// Amplitude, same units as the mean radius.
    pub alpha: f64,
    /// Angular frequency, strictly positive.
    pub omega: f64,
}

/// Sphere with radius `R(t) = R0 + sum_n alpha_n sin(omega_n t)`.
///
/// The static curvature `lambda0 = 1/R0^2` is always derived from `R0`; it is
/// never configured independently. All methods are pure functions of
/// `(self, t)` and safe to call concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    r0: f64,
    modes: Vec<FluctuationMode>,
    hbar: f64,
    small_amplitude_guard: f64,
}

impl BackgroundModel {
    /// Default bound on `sum_n alpha_n / R0`.
    pub const DEFAULT_GUARD: f64 = 0.1;

    /// Static sphere of radius `r0` with `hbar = 1`.
    pub fn staticsphere(r0: f64) -> Result<Self> {
        Self::new(r0, Vec::new(), 1.0)
    }

    /// Build a model, enforcing the small-amplitude regime.
    pub fn new(r0: f64, modes: Vec<FluctuationMode>, hbar: f64) -> Result<Self> {
        Self::with_guard(r0, modes, hbar, Self::DEFAULT_GUARD)
    }

    /// Build a model with an explicit amplitude guard.
    pub fn with_guard(
        r0: f64,
        modes: Vec<FluctuationMode>,
        hbar: f64,
        small_amplitude_guard: f64,
    ) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r0",
                message: format!("must be finite and > 0, got {r0}"),
            });
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter {
                name: "hbar",
                message: format!("must be finite and > 0, got {hbar}"),
            });
        }
        if !(small_amplitude_guard > 0.0) {
            return Err(Error::InvalidParameter {
                name: "small_amplitude_guard",
                message: format!("must be > 0, got {small_amplitude_guard}"),
            });
        }
        for (k, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "modes.omega",
                    message: format!("mode {k}: omega must be finite and > 0, got {}", m.omega),
                });
            }
            if m.alpha < 0.0 || !m.alpha.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "modes.alpha",
                    message: format!("mode {k}: alpha must be finite and >= 0, got {}", m.alpha),
                });
            }
        }
        let ratio = modes.iter().map(|m| m.alpha).sum::<f64>() / r0;
        if ratio > small_amplitude_guard {
            return Err(Error::AmplitudeGuard {
                ratio,
                guard: small_amplitude_guard,
            });
        }
        Ok(Self {
            r0,
            modes,
            hbar,
            small_amplitude_guard,
        })
    }

    /// Same model with every mode amplitude multiplied by `factor`.
    pub fn scaled_amplitudes(&self, factor: f64) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .map(|m| FluctuationMode {
                alpha: m.alpha * factor,
                omega: m.omega,
            })
            .collect();
        Self::with_guard(self.r0, modes, self.hbar, self.small_amplitude_guard)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn modes(&self) -> &[FluctuationMode] {
        &self.modes
    }

    /// Static curvature `lambda0 = 1/R0^2`.
    pub fn lambda0(&self) -> f64 {
        1.0 / (self.r0 * self.r0)
    }

    /// `R(t) = R0 + sum alpha_n sin(omega_n t)`.
    pub fn radius_at(&self, t: f64) -> f64 {
        self.r0
            + self
                .modes
                .iter()
                .map(|m| m.alpha * (m.omega * t).sin())
                .sum::<f64>()
    }

    /// `dR/dt = sum alpha_n omega_n cos(omega_n t)`.
    pub fn radius_rate(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| m.alpha * m.omega * (m.omega * t).cos())
            .sum()
    }

    /// Exact curvature `1/R(t)^2`.
    pub fn curvature_exact(&self, t: f64) -> f64 {
        let r = self.radius_at(t);
        1.0 / (r * r)
    }

    /// First-order curvature `lambda0 [1 - 2 sqrt(lambda0) sum alpha_n sin(omega_n t)]`.
    ///
    /// The truncation error is of order `lambda0^2 alpha_n^2`.
    pub fn curvature_first_order(&self, t: f64) -> f64 {
        let l0 = self.lambda0();
        let s: f64 = self
            .modes
            .iter()
            .map(|m| m.alpha * (m.omega * t).sin())
            .sum();
        l0 * (1.0 - 2.0 * l0.sqrt() * s)
    }

    /// Signal multiplying the momentum-coupling operator:
    /// `V0(t) = sqrt(lambda0) sum alpha_n omega_n cos(omega_n t)`.
    ///
    /// Equals `-f(t)` where `f` is the first-order vector-potential amplitude.
    pub fn v0(&self, t: f64) -> f64 {
        self.lambda0().sqrt() * self.radius_rate(t)
    }

    /// Signal multiplying the curvature-coupling operator:
    /// `V0~(t) = sqrt(lambda0) sum alpha_n sin(omega_n t)`.
    pub fn v0_tilde(&self, t: f64) -> f64 {
        let s: f64 = self
            .modes
            .iter()
            .map(|m| m.alpha * (m.omega * t).sin())
            .sum();
        self.lambda0().sqrt() * s
    }

    /// First-order vector-potential amplitude `f(t) = -V0(t)`.
    pub fn vector_potential_amplitude(&self, t: f64) -> f64 {
        -self.v0(t)
    }

    /// Smallest gap between mode frequencies, if two or more modes exist.
    pub fn min_mode_spacing(&self) -> Option<f64> {
        if self.modes.len() < 2 {
            return None;
        }
        let mut omegas: Vec<f64> = self.modes.iter().map(|m| m.omega).collect();
        omegas.sort_by(f64::total_cmp);
        omegas
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(f64::total_cmp)
    }

    /// Log a warning when two mode frequencies are closer than the resolution
    /// `2 pi / t_window` of a probe of duration `t_window`; the non-interference
    /// approximation assumes well-separated resonances.
    pub fn warn_if_unresolved(&self, t_window: f64) {
        if let Some(gap) = self.min_mode_spacing() {
            let resolution = std::f64::consts::TAU / t_window;
            if gap < resolution {
                log::warn!(
                    "mode frequencies only {gap:.3e} apart but the probe resolves {resolution:.3e}; \
                     resonances overlap and interference terms need not be small"
                );
            }
        }
    }
}
