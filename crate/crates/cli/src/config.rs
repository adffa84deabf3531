//! Run configuration: strict JSON schema with early, field-naming validation.

use serde::Deserialize;
use sphosc_core::background::{BackgroundModel, FluctuationMode};
use sphosc_core::basis::BasisSpec;
use sphosc_core::dynamics::{DeltaKernel, Integrator, PropagationMode};

/// Raised for malformed or out-of-range configuration; exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {message}"))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hbar: f64,
    pub background: BackgroundSection,
    pub basis: BasisSection,
    pub propagation: PropagationSection,
    pub scan: ScanSection,
    pub goldenrule: GoldenRuleSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSection {
    pub r0: f64,
    pub modes: Vec<ModeSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub alpha: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub n_max: usize,
    #[serde(default)]
    pub pad: Option<usize>,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub t_final: f64,
    pub dt: f64,
    pub integrator: String,
    pub initial_state_index: usize,
    pub mode: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub t_probe: f64,
    pub alpha_probe: f64,
    pub source_state: usize,
    pub target_states: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenRuleSection {
    pub kernel: String,
    pub kernel_param: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub format: String,
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Validated configuration ready for the core library.
pub struct Validated {
    pub model: BackgroundModel,
    pub basis: BasisSpec,
    pub integrator: Integrator,
    pub propagation_mode: PropagationMode,
    pub kernel: DeltaKernel,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    /// Check every numeric field against the module invariants before any
    /// computation starts; failures name the offending field.
    pub fn validate(&self) -> Result<Validated, ConfigError> {
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(bad("hbar", "must be finite and > 0"));
        }
        if !(self.background.r0 > 0.0) || !self.background.r0.is_finite() {
            return Err(bad("background.r0", "must be finite and > 0"));
        }
        for (k, m) in self.background.modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(bad(&format!("background.modes[{k}].omega"), "must be finite and > 0"));
            }
            if m.alpha < 0.0 || !m.alpha.is_finite() {
                return Err(bad(&format!("background.modes[{k}].alpha"), "must be finite and >= 0"));
            }
        }
        let modes: Vec<FluctuationMode> = self
            .background
            .modes
            .iter()
            .map(|m| FluctuationMode {
                alpha: m.alpha,
                omega: m.omega,
            })
            .collect();
        let model = BackgroundModel::new(self.background.r0, modes, self.hbar)
            .map_err(|e| bad("background.modes", e))?;

        let pad = self.basis.pad.unwrap_or(BasisSpec::DEFAULT_PAD);
        let mut basis = BasisSpec::with_pad(self.basis.n_max, pad);
        if let Some(q) = self.basis.quad_order {
            if q < basis.quad_floor() {
                return Err(bad(
                    "basis.quad_order",
                    format!("must be at least n_max + pad + 1 = {}", basis.quad_floor()),
                ));
            }
            basis = basis.with_quad_order(q);
        }
        let dim = basis.core_dim();

        if !(self.propagation.t_final > 0.0) {
            return Err(bad("propagation.t_final", "must be > 0"));
        }
        if !(self.propagation.dt > 0.0) {
            return Err(bad("propagation.dt", "must be > 0"));
        }
        let integrator = match self.propagation.integrator.as_str() {
            "rk4" => Integrator::Rk4,
            "expm_midpoint" => Integrator::ExpmMidpoint,
            other => return Err(bad("propagation.integrator", format!("unknown integrator `{other}` (rk4 | expm_midpoint)"))),
        };
        let propagation_mode = match self.propagation.mode.as_str() {
            "first_order" => PropagationMode::FirstOrder,
            "exact" => PropagationMode::Exact,
            other => return Err(bad("propagation.mode", format!("unknown mode `{other}` (first_order | exact)"))),
        };
        if self.propagation.initial_state_index >= dim {
            return Err(bad(
                "propagation.initial_state_index",
                format!("outside the eigenbasis (dimension {dim})"),
            ));
        }

        if !(self.scan.omega_min > 0.0) {
            return Err(bad("scan.omega_min", "must be > 0"));
        }
        if !(self.scan.omega_max > self.scan.omega_min) {
            return Err(bad("scan.omega_max", "must exceed scan.omega_min"));
        }
        if self.scan.points < 2 {
            return Err(bad("scan.points", "need at least two grid points"));
        }
        if !(self.scan.t_probe > 0.0) {
            return Err(bad("scan.t_probe", "must be > 0"));
        }
        if self.scan.alpha_probe < 0.0 || self.scan.alpha_probe > 0.1 * self.background.r0 {
            return Err(bad(
                "scan.alpha_probe",
                "must lie in [0, 0.1 r0] (small-amplitude regime)",
            ));
        }
        if self.scan.source_state >= dim {
            return Err(bad("scan.source_state", format!("outside the eigenbasis (dimension {dim})")));
        }
        if self.scan.target_states.is_empty() {
            return Err(bad("scan.target_states", "must not be empty"));
        }
        for &t in &self.scan.target_states {
            if t >= dim {
                return Err(bad("scan.target_states", format!("state {t} outside the eigenbasis (dimension {dim})")));
            }
            if t == self.scan.source_state {
                return Err(bad("scan.target_states", "must differ from scan.source_state"));
            }
        }

        if !(self.goldenrule.kernel_param > 0.0) || !self.goldenrule.kernel_param.is_finite() {
            return Err(bad("goldenrule.kernel_param", "must be finite and > 0"));
        }
        let kernel = match self.goldenrule.kernel.as_str() {
            "sinc2" => DeltaKernel::Sinc2 {
                t_probe: self.goldenrule.kernel_param,
            },
            "lorentzian" => DeltaKernel::Lorentzian {
                eta: self.goldenrule.kernel_param,
            },
            "gaussian" => DeltaKernel::Gaussian {
                sigma: self.goldenrule.kernel_param,
            },
            other => return Err(bad("goldenrule.kernel", format!("unknown kernel `{other}` (sinc2 | lorentzian | gaussian)"))),
        };

        let format = match self.output.format.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(bad("output.format", format!("unknown format `{other}` (csv | json)"))),
        };

        Ok(Validated {
            model,
            basis,
            integrator,
            propagation_mode,
            kernel,
            format,
        })
    }
}
