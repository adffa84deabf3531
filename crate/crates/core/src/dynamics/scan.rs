//! Resonance scans over a probe frequency grid and the propagation-level
//! comparison between the first-order and exact Hamiltonians.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::background::{BackgroundModel, FluctuationMode};
use crate::dynamics::propagate::{
    propagate, Integrator, PropagationMode, PropagationSettings,
};
use crate::dynamics::spectrum::SpectrumResult;
use crate::dynamics::tdpt::{transition_amplitude, transition_record, Channel};
use crate::hamiltonian::HiggsOperatorSet;
use crate::{Error, Result};

/// Parameters for a single-mode probe scan.
#[derive(Debug, Clone)]
pub struct ScanSettings {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub t_probe: f64,
    pub alpha_probe: f64,
    pub source: usize,
    pub targets: Vec<usize>,
}

/// Detected resonance peak of one target state.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub target: usize,
    pub center: f64,
    pub height: f64,
    /// Full width at half maximum, linearly interpolated; `None` when a
    /// half-max crossing leaves the grid.
    pub fwhm: Option<f64>,
}

/// `P(omega, t_probe)/t_probe` per target over the frequency grid.
#[derive(Debug, Clone)]
pub struct ResonanceScan {
    pub omegas: Vec<f64>,
    pub targets: Vec<usize>,
    /// `values[target_idx][omega_idx]`.
    pub values: Vec<Vec<f64>>,
    pub peaks: Vec<Peak>,
    pub t_probe: f64,
    pub alpha_probe: f64,
}

impl ResonanceScan {
    /// Trapezoid integral of one target's curve over `[center - halfspan,
    /// center + halfspan]`.
    pub fn integrate_around(&self, target_idx: usize, center: f64, halfspan: f64) -> f64 {
        let v = &self.values[target_idx];
        let mut acc = 0.0;
        for k in 1..self.omegas.len() {
            let (a, b) = (self.omegas[k - 1], self.omegas[k]);
            if b < center - halfspan || a > center + halfspan {
                continue;
            }
            acc += 0.5 * (v[k - 1] + v[k]) * (b - a);
        }
        acc
    }
}

/// Sweep a single probe mode `(alpha_probe, omega)` over the grid and record
/// the non-interference transition probability per unit time for each target.
pub fn scan_resonances(
    settings: &ScanSettings,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    r0: f64,
    hbar: f64,
) -> Result<ResonanceScan> {
    if settings.points == 0 {
        return Err(Error::EmptyScanGrid);
    }
    if !(settings.omega_max > settings.omega_min) {
        return Err(Error::InvalidParameter {
            name: "scan.omega_max",
            message: "must exceed omega_min".into(),
        });
    }
    if settings.points < 2 {
        return Err(Error::InvalidParameter {
            name: "scan.points",
            message: "need at least two grid points".into(),
        });
    }
    for &j in &settings.targets {
        if j == settings.source {
            return Err(Error::DiagonalTransition);
        }
        if j >= spectrum.dim() {
            return Err(Error::InvalidParameter {
                name: "scan.target_states",
                message: format!("state {j} outside the basis (dim {})", spectrum.dim()),
            });
        }
    }
    // matrix elements do not depend on the probe frequency; compute them once
    let probe = BackgroundModel::new(r0, Vec::new(), hbar)?;
    let recs: Vec<_> = settings
        .targets
        .iter()
        .map(|&j| transition_record(settings.source, j, spectrum, ops, &probe))
        .collect();
    let lambda0 = probe.lambda0();
    let step = (settings.omega_max - settings.omega_min) / (settings.points - 1) as f64;
    let omegas: Vec<f64> = (0..settings.points)
        .map(|k| settings.omega_min + step * k as f64)
        .collect();

    let values: Vec<Vec<f64>> = recs
        .par_iter()
        .map(|rec| {
            omegas
                .iter()
                .map(|&omega| {
                    let mode = FluctuationMode {
                        alpha: settings.alpha_probe,
                        omega,
                    };
                    let i_unit = num_complex::Complex64::new(0.0, 1.0);
                    let w_emi = (rec.v1_ji * omega - i_unit * rec.v1t_ji).norm_sqr();
                    let w_abs = (rec.v1_ji * omega + i_unit * rec.v1t_ji).norm_sqr();
                    let a_emi =
                        transition_amplitude(settings.t_probe, rec.omega_ji, &mode, Channel::Emission);
                    let a_abs = transition_amplitude(
                        settings.t_probe,
                        rec.omega_ji,
                        &mode,
                        Channel::Absorption,
                    );
                    let p = lambda0 / (4.0 * hbar * hbar)
                        * (a_emi.norm_sqr() * w_emi + a_abs.norm_sqr() * w_abs);
                    p / settings.t_probe
                })
                .collect()
        })
        .collect();

    let mut peaks = Vec::new();
    for (ti, v) in values.iter().enumerate() {
        let global_max = v.iter().cloned().fold(0.0f64, f64::max);
        let floor = 1e-6 * global_max;
        for k in 1..v.len() - 1 {
            if v[k] > v[k - 1] && v[k] > v[k + 1] && v[k] > floor {
                peaks.push(Peak {
                    target: settings.targets[ti],
                    center: omegas[k],
                    height: v[k],
                    fwhm: fwhm_around(&omegas, v, k),
                });
            }
        }
    }

    Ok(ResonanceScan {
        omegas,
        targets: settings.targets.clone(),
        values,
        peaks,
        t_probe: settings.t_probe,
        alpha_probe: settings.alpha_probe,
    })
}

fn fwhm_around(omegas: &[f64], v: &[f64], k: usize) -> Option<f64> {
    let half = 0.5 * v[k];
    let mut left = None;
    for i in (1..=k).rev() {
        if v[i - 1] <= half {
            let f = (half - v[i - 1]) / (v[i] - v[i - 1]);
            left = Some(omegas[i - 1] + f * (omegas[i] - omegas[i - 1]));
            break;
        }
    }
    let mut right = None;
    for i in k..v.len() - 1 {
        if v[i + 1] <= half {
            let f = (v[i] - half) / (v[i] - v[i + 1]);
            right = Some(omegas[i] + f * (omegas[i + 1] - omegas[i]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    }
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = num / den;
    (slope, my - slope * mx)
}

/// Measured gap between exact-geometry and first-order propagation.
#[derive(Debug, Clone)]
pub struct DiscrepancyReport {
    /// Total fluctuation amplitude per sweep entry.
    pub alphas: Vec<f64>,
    /// Worst-over-time population difference per sweep entry.
    pub max_diffs: Vec<f64>,
    /// Fitted scaling exponent of the difference in the amplitude.
    pub exponent: f64,
    /// 95% bootstrap interval of the exponent over the time grid.
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_abs_diff: f64,
}

/// Propagate `|i>` under both the first-order and exact Hamiltonians while
/// scaling the fluctuation amplitudes down by factors of two, and fit how the
/// worst population difference on the target `j` scales with amplitude.
pub fn compare_first_order_vs_exact(
    i: usize,
    j: usize,
    spectrum: &SpectrumResult,
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
    t_final: f64,
    dt: f64,
) -> Result<DiscrepancyReport> {
    if model.modes().is_empty() {
        return Err(Error::InvalidParameter {
            name: "background.modes",
            message: "the comparison needs at least one fluctuation mode".into(),
        });
    }
    let scales = [1.0, 0.5, 0.25];
    let psi0 = spectrum.eigenstate(i);
    let mut alphas = Vec::new();
    let mut series: Vec<Vec<f64>> = Vec::new();
    for scale in scales {
        let scaled = model.scaled_amplitudes(scale)?;
        let base = PropagationSettings::new(t_final, dt).integrator(Integrator::ExpmMidpoint);
        let first = propagate(
            &psi0,
            &base.mode(PropagationMode::FirstOrder),
            &scaled,
            ops,
            spectrum,
        )?;
        let exact = propagate(
            &psi0,
            &base.mode(PropagationMode::Exact),
            &scaled,
            ops,
            spectrum,
        )?;
        let diffs: Vec<f64> = first
            .populations
            .iter()
            .zip(&exact.populations)
            .map(|(a, b)| (a[j] - b[j]).abs())
            .collect();
        alphas.push(scaled.modes().iter().map(|m| m.alpha).sum());
        series.push(diffs);
    }
    let max_diffs: Vec<f64> = series
        .iter()
        .map(|d| d.iter().cloned().fold(0.0f64, f64::max))
        .collect();
    let (exponent, _) = fit_power_law(&alphas, &max_diffs);
    let max_abs_diff = max_diffs.iter().cloned().fold(0.0f64, f64::max);

    // bootstrap the exponent over the time grid
    let n_times = series[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
    let mut slopes = Vec::with_capacity(200);
    for _ in 0..200 {
        let picks: Vec<usize> = (0..n_times).map(|_| rng.gen_range(0..n_times)).collect();
        let resampled: Vec<f64> = series
            .iter()
            .map(|d| picks.iter().map(|&k| d[k]).fold(0.0f64, f64::max))
            .collect();
        let (s, _) = fit_power_law(&alphas, &resampled);
        slopes.push(s);
    }
    slopes.sort_by(f64::total_cmp);
    let ci_low = slopes[(0.025_f64 * 199.0).round() as usize];
    let ci_high = slopes[(0.975_f64 * 199.0).round() as usize];

    Ok(DiscrepancyReport {
        alphas,
        max_diffs,
        exponent,
        ci_low,
        ci_high,
        max_abs_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::dynamics::spectrum::diagonalize;
    use crate::dynamics::tdpt::transition_record;
    use approx::assert_abs_diff_eq;

    fn setup() -> (HiggsOperatorSet, SpectrumResult) {
        let spec = BasisSpec::with_pad(8, 6);
        let set = HiggsOperatorSet::build(&spec, 0.04, 1.0).unwrap();
        let sp = diagonalize(&set.h0, &set.lz, 1.0).unwrap();
        (set, sp)
    }

    fn first_allowed(sp: &SpectrumResult, set: &HiggsOperatorSet) -> usize {
        let probe = BackgroundModel::staticsphere(5.0).unwrap();
        (1..sp.dim())
            .find(|&j| {
                let rec = transition_record(0, j, sp, set, &probe);
                rec.v1_ji.norm().max(rec.v1t_ji.norm()) > 1e-8
            })
            .expect("allowed transition")
    }

    #[test]
    fn scan_peaks_align_with_spectral_gaps() {
        let (set, sp) = setup();
        let j = first_allowed(&sp, &set);
        let omega_ji = sp.omega(0, j);
        let settings = ScanSettings {
            omega_min: omega_ji - 0.5,
            omega_max: omega_ji + 0.5,
            points: 801,
            t_probe: 120.0,
            alpha_probe: 1e-3,
            source: 0,
            targets: vec![j],
        };
        let scan = scan_resonances(&settings, &sp, &set, 5.0, 1.0).unwrap();
        let step = (settings.omega_max - settings.omega_min) / 800.0;
        let main = scan
            .peaks
            .iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
            .unwrap();
        assert!(
            (main.center - omega_ji).abs() <= step,
            "peak at {} vs gap {omega_ji}",
            main.center
        );
        // sinc main lobe: full width at half maximum ~ 2 pi / t_probe within 20%
        let fwhm = main.fwhm.unwrap();
        let expect = std::f64::consts::TAU / settings.t_probe;
        assert!(
            (fwhm - expect).abs() / expect < 0.2,
            "fwhm {fwhm} vs {expect}"
        );
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let (set, sp) = setup();
        let mut settings = ScanSettings {
            omega_min: 1.0,
            omega_max: 2.0,
            points: 0,
            t_probe: 10.0,
            alpha_probe: 1e-3,
            source: 0,
            targets: vec![3],
        };
        assert!(matches!(
            scan_resonances(&settings, &sp, &set, 5.0, 1.0),
            Err(Error::EmptyScanGrid)
        ));
        settings.points = 100;
        settings.targets = vec![0];
        assert!(matches!(
            scan_resonances(&settings, &sp, &set, 5.0, 1.0),
            Err(Error::DiagonalTransition)
        ));
    }

    #[test]
    fn power_law_fit_recovers_exponents() {
        let xs = [1.0_f64, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        let (slope, intercept) = fit_power_law(&xs, &ys);
        assert_abs_diff_eq!(slope, 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept.exp(), 3.0, epsilon = 1e-12);
    }
}
