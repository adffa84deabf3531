//! Numerical integration of the time-dependent Schroedinger equation for the
//! first-order and exact Hamiltonians.

use num_complex::Complex64 as C64;

use crate::background::BackgroundModel;
use crate::dynamics::spectrum::SpectrumResult;
use crate::hamiltonian::{first_order_matrix, ExactHamiltonian, HiggsOperatorSet};
use crate::linalg::{eigh, CMatrix, CVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Classical fixed-step Runge-Kutta; norm decays slowly with step size.
    Rk4,
    /// Exponential midpoint rule; unitary per step, second order in time.
    ExpmMidpoint,
}

impl Integrator {
    pub fn label(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::ExpmMidpoint => "expm_midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMode {
    /// `H(t) = H0 + V0(t) V1 + V0~(t) V1~`.
    FirstOrder,
    /// Exact minimal-coupling Hamiltonian, quadrature-assembled per step.
    Exact,
}

impl PropagationMode {
    pub fn label(self) -> &'static str {
        match self {
            PropagationMode::FirstOrder => "first_order",
            PropagationMode::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PropagationSettings {
    pub t_final: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub mode: PropagationMode,
    /// Record every `sample_stride`-th step; default keeps roughly 2000 rows.
    pub sample_stride: Option<usize>,
    /// Abort when `max | ||psi|| - 1 |` exceeds this.
    pub norm_budget: f64,
}

impl PropagationSettings {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            integrator: Integrator::Rk4,
            mode: PropagationMode::FirstOrder,
            sample_stride: None,
            norm_budget: 1e-8,
        }
    }

    pub fn integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn mode(mut self, mode: PropagationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn sample_stride(mut self, stride: usize) -> Self {
        self.sample_stride = Some(stride);
        self
    }
}

/// Populations per eigenstate over the sampled time grid.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    /// `populations[row][j] = |<j|psi(t_row)>|^2` in the eigenbasis.
    pub populations: Vec<Vec<f64>>,
    /// Running `max | ||psi|| - 1 |` up to each sampled time.
    pub drifts: Vec<f64>,
    pub norm_drift: f64,
    pub integrator: Integrator,
    pub mode: PropagationMode,
    /// Actual step used (the requested step rounded to divide `t_final`).
    pub dt: f64,
    pub steps: usize,
    /// State at `t_final`, Fock basis.
    pub final_state: CVector,
}

impl PropagationResult {
    /// Population time series of one eigenstate.
    pub fn population_of(&self, j: usize) -> Vec<f64> {
        self.populations.iter().map(|row| row[j]).collect()
    }
}

enum Supplier<'a> {
    FirstOrder(&'a HiggsOperatorSet, &'a BackgroundModel),
    Exact(ExactHamiltonian, &'a BackgroundModel),
}

impl Supplier<'_> {
    fn at(&self, t: f64) -> CMatrix {
        match self {
            Supplier::FirstOrder(ops, model) => first_order_matrix(ops, model, t),
            Supplier::Exact(builder, model) => builder.matrix_at(model, t),
        }
    }
}

/// Integrate `i hbar dpsi/dt = H(t) psi` from `psi0` (Fock basis, unit norm).
///
/// The step must resolve the fastest scale (twenty steps per period of
/// `max(omega_n, spectral radius / hbar)`); norm drift beyond the budget
/// aborts with a suggested step.
pub fn propagate(
    psi0: &CVector,
    settings: &PropagationSettings,
    model: &BackgroundModel,
    ops: &HiggsOperatorSet,
    spectrum: &SpectrumResult,
) -> Result<PropagationResult> {
    let d = spectrum.dim();
    if psi0.len() != d {
        return Err(Error::InvalidParameter {
            name: "psi0",
            message: format!("length {} does not match basis dimension {d}", psi0.len()),
        });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter {
            name: "psi0",
            message: format!("must be normalized, got |psi0| = {:.12}", psi0.norm()),
        });
    }
    if !(settings.t_final > 0.0) || !(settings.dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "propagation",
            message: "t_final and dt must be > 0".into(),
        });
    }
    let hbar = model.hbar();
    let omega_fast = model
        .modes()
        .iter()
        .map(|m| m.omega)
        .fold(spectrum.spectral_radius() / hbar, f64::max);
    let required = std::f64::consts::TAU / (20.0 * omega_fast);
    if settings.dt > required {
        return Err(Error::StepTooLarge {
            dt: settings.dt,
            required,
        });
    }

    let steps = (settings.t_final / settings.dt).round().max(1.0) as usize;
    let dt = settings.t_final / steps as f64;
    let stride = settings
        .sample_stride
        .unwrap_or_else(|| (steps / 2000).max(1));

    let supplier = match settings.mode {
        PropagationMode::FirstOrder => Supplier::FirstOrder(ops, model),
        PropagationMode::Exact => Supplier::Exact(ExactHamiltonian::new(ops.basis(), hbar)?, model),
    };

    let mut psi = psi0.clone();
    let mut times = Vec::new();
    let mut populations = Vec::new();
    let mut drifts = Vec::new();
    let record = |t: f64,
                  psi: &CVector,
                  drift: f64,
                  times: &mut Vec<f64>,
                  pops: &mut Vec<Vec<f64>>,
                  drifts: &mut Vec<f64>| {
        let coeffs = spectrum.to_eigenbasis(psi);
        pops.push(coeffs.iter().map(|c| c.norm_sqr()).collect());
        times.push(t);
        drifts.push(drift);
    };
    record(0.0, &psi, 0.0, &mut times, &mut populations, &mut drifts);

    let minus_i_over_hbar = C64::new(0.0, -1.0 / hbar);
    let mut norm_drift = 0.0f64;
    let mut h_start = match settings.integrator {
        Integrator::Rk4 => Some(supplier.at(0.0)),
        Integrator::ExpmMidpoint => None,
    };

    for step in 0..steps {
        let t = step as f64 * dt;
        match settings.integrator {
            Integrator::Rk4 => {
                let h0t = h_start.take().expect("h_start maintained per step");
                let h_mid = supplier.at(t + 0.5 * dt);
                let h_end = supplier.at(t + dt);
                let deriv = |h: &CMatrix, v: &CVector| -> CVector { (h * v) * minus_i_over_hbar };
                let k1 = deriv(&h0t, &psi);
                let k2 = deriv(&h_mid, &(&psi + &k1 * C64::from(0.5 * dt)));
                let k3 = deriv(&h_mid, &(&psi + &k2 * C64::from(0.5 * dt)));
                let k4 = deriv(&h_end, &(&psi + &k3 * C64::from(dt)));
                psi += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4)
                    * C64::from(dt / 6.0);
                h_start = Some(h_end);
            }
            Integrator::ExpmMidpoint => {
                let h_mid = supplier.at(t + 0.5 * dt);
                let (evals, evecs) = eigh(&h_mid)?;
                let mut coeffs = evecs.adjoint() * &psi;
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c *= C64::from_polar(1.0, -evals[k] * dt / hbar);
                }
                psi = &evecs * coeffs;
            }
        }
        let drift = (psi.norm() - 1.0).abs();
        norm_drift = norm_drift.max(drift);
        if norm_drift > settings.norm_budget {
            let suggested_dt = match settings.integrator {
                Integrator::Rk4 => dt * (0.5 * settings.norm_budget / norm_drift).powf(0.2),
                Integrator::ExpmMidpoint => dt * 0.5,
            };
            return Err(Error::NormDrift {
                drift: norm_drift,
                budget: settings.norm_budget,
                suggested_dt,
            });
        }
        if (step + 1) % stride == 0 || step + 1 == steps {
            record(
                (step + 1) as f64 * dt,
                &psi,
                norm_drift,
                &mut times,
                &mut populations,
                &mut drifts,
            );
        }
    }

    Ok(PropagationResult {
        times,
        populations,
        drifts,
        norm_drift,
        integrator: settings.integrator,
        mode: settings.mode,
        dt,
        steps,
        final_state: psi,
    })
}
