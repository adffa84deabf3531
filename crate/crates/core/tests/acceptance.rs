//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities. Tolerances are pinned here, not configured.
//!
//! Run with `cargo test -p sphosc-core --test acceptance -- --nocapture`.

mod common;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphosc_core::background::{BackgroundModel, FluctuationMode};
use sphosc_core::basis::BasisSpec;
use sphosc_core::dynamics::{
    diagonalize, fit_power_law, parity_label, propagate, scan_resonances, tdpt_probability_full,
    tdpt_probability_rw, transition_record, PropagationSettings, ScanSettings,
};
use sphosc_core::geometry::{
    embed, exact_vector_potential, first_order_vector_potential, geometry_derivatives, ChartPoint,
};
use sphosc_core::hamiltonian::{
    build_h_exact, build_h_first_order, relative_hermiticity, HiggsOperatorSet,
};
use sphosc_core::linalg::max_abs;
use sphosc_core::SpectrumResult;

const R0: f64 = 5.0; // lambda0 = 0.04
const HBAR: f64 = 1.0;

fn report(criterion: u32, name: &str, passed: bool, details: &str) {
    println!(
        "CRITERION {criterion:02} {name}: {} ({details})",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion:02} {name} failed: {details}");
}

fn build(lambda0: f64, n_max: usize, pad: usize) -> (HiggsOperatorSet, SpectrumResult) {
    let spec = BasisSpec::with_pad(n_max, pad);
    let set = HiggsOperatorSet::build(&spec, lambda0, HBAR).unwrap();
    let sp = diagonalize(&set.h0, &set.lz, HBAR).unwrap();
    (set, sp)
}

fn first_allowed(sp: &SpectrumResult, set: &HiggsOperatorSet) -> usize {
    let probe = BackgroundModel::staticsphere(R0).unwrap();
    (1..sp.dim())
        .find(|&j| {
            let rec = transition_record(0, j, sp, set, &probe);
            rec.v1_ji.norm().max(rec.v1t_ji.norm()) > 1e-8
        })
        .expect("allowed transition")
}

#[test]
fn criterion_01_flat_limit() {
    let (_, sp) = build(0.0, 12, 4);
    let mut worst = 0.0_f64;
    let mut k = 0usize;
    for level in 0..4u32 {
        for _ in 0..=level {
            worst = worst.max((sp.energy(k) - HBAR * (level as f64 + 1.0)).abs());
            k += 1;
        }
    }
    report(
        1,
        "flat_limit",
        worst <= 1e-10,
        &format!("max |E - hbar(n+1)| = {worst:.3e} over the 10 lowest states"),
    );
}

#[test]
fn criterion_02_curved_degeneracy() {
    // lambda0 = 0.1: the Higgs degeneracy survives curvature but the basis
    // converges only algebraically here; the measured spreads are printed
    let (_, sp16) = build(0.1, 16, 8);
    let (_, sp20) = build(0.1, 20, 8);

    // physical clustering at the criterion's own spread scale
    let cluster_sizes = |sp: &SpectrumResult| -> Vec<usize> {
        let mut sizes = vec![1usize];
        for k in 1..10 {
            if (sp.energy(k) - sp.energy(k - 1)).abs() <= 1e-6 * sp.energy(k).abs() {
                *sizes.last_mut().unwrap() += 1;
            } else {
                sizes.push(1);
            }
        }
        sizes
    };
    let sizes = cluster_sizes(&sp16);
    let sizes_ok = sizes.len() >= 4 && sizes[0] == 1 && sizes[1] == 2 && sizes[2] == 3 && sizes[3] == 4;

    let mut spreads = Vec::new();
    let mut k = 0usize;
    for sz in [1usize, 2, 3, 4] {
        let es: Vec<f64> = (k..k + sz).map(|i| sp16.energy(i)).collect();
        let spread = (es.iter().cloned().fold(f64::MIN, f64::max)
            - es.iter().cloned().fold(f64::MAX, f64::min))
            / es[0];
        spreads.push(spread);
        k += sz;
    }
    let max_spread = spreads.iter().cloned().fold(0.0_f64, f64::max);
    let max_shift = (0..10)
        .map(|i| (sp16.energy(i) - sp20.energy(i)).abs())
        .fold(0.0_f64, f64::max);

    report(
        2,
        "curved_degeneracy",
        sizes_ok && max_spread < 1e-6 && max_shift < 1e-8,
        &format!(
            "cluster sizes at 1e-6 grouping {sizes:?}; intra-cluster spreads {:?}; \
             max |E(16) - E(20)| = {max_shift:.3e} (need sizes [1,2,3,4], spread < 1e-6, shift < 1e-8)",
            spreads
                .iter()
                .map(|s| format!("{s:.3e}"))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_03_hermiticity_suite() {
    let (set, _) = build(0.04, 12, 6);
    let mut worst = 0.0_f64;
    for op in [&set.h0, &set.pi2, &set.l2, &set.v1, &set.v1_tilde] {
        worst = worst.max(relative_hermiticity(op.matrix()));
    }
    let model = BackgroundModel::new(
        R0,
        vec![FluctuationMode {
            alpha: 5e-3,
            omega: 2.0,
        }],
        HBAR,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = BasisSpec::with_pad(12, 6);
    for _ in 0..5 {
        let t = rng.gen_range(0.0..20.0);
        let h = build_h_exact(&spec, &model, t, HBAR).unwrap();
        worst = worst.max(relative_hermiticity(h.matrix()));
    }
    report(
        3,
        "hermiticity_suite",
        worst <= 1e-12,
        &format!("max relative |A - A^dagger| = {worst:.3e} over H0, Pi2, L2, V1, V1~, H_exact(5 t's)"),
    );
}

#[test]
fn criterion_04_selection_rules() {
    let (set, sp) = build(0.04, 10, 6);
    let idx = set.h0.index();
    let v = sp.states();
    let v1 = v.adjoint() * set.v1.matrix() * v;
    let v1t = v.adjoint() * set.v1_tilde.matrix() * v;
    let scale = max_abs(&v1).max(max_abs(&v1t));
    let mut leak = 0.0_f64;
    for i in 0..sp.dim() {
        let pi = parity_label(&sp, i, &idx).unwrap();
        for j in 0..sp.dim() {
            let pj = parity_label(&sp, j, &idx).unwrap();
            if sp.m_label(i) != sp.m_label(j) || pi != pj {
                leak = leak.max(v1[(j, i)].norm()).max(v1t[(j, i)].norm());
            }
        }
    }
    report(
        4,
        "selection_rules",
        leak <= 1e-10 * scale,
        &format!("forbidden-element leak {leak:.3e} vs 1e-10 * largest element {:.3e}", 1e-10 * scale),
    );
}

#[test]
fn criterion_05_geometry_oracle() {
    let model = BackgroundModel::new(
        R0,
        vec![FluctuationMode {
            alpha: 0.05,
            omega: 2.0,
        }],
        HBAR,
    )
    .unwrap();
    let rate_scale: f64 = model.modes().iter().map(|m| m.alpha * m.omega).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-6;
    let mut fd_rel = 0.0_f64;
    let mut sphere_rel = 0.0_f64;
    for _ in 0..100 {
        let p = ChartPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let t = rng.gen_range(0.0..12.0);
        let lam = model.curvature_exact(t);
        let r = embed(&p, lam).unwrap();
        let radius2 = model.radius_at(t).powi(2);
        sphere_rel = sphere_rel.max((r.norm_squared() - radius2).abs() / radius2);
        let d = geometry_derivatives(&p, &model, t);
        let fd_x = (embed(&ChartPoint::new(p.x + h, p.y), lam).unwrap()
            - embed(&ChartPoint::new(p.x - h, p.y), lam).unwrap())
            / (2.0 * h);
        let fd_y = (embed(&ChartPoint::new(p.x, p.y + h), lam).unwrap()
            - embed(&ChartPoint::new(p.x, p.y - h), lam).unwrap())
            / (2.0 * h);
        let fd_t = (embed(&p, model.curvature_exact(t + h)).unwrap()
            - embed(&p, model.curvature_exact(t - h)).unwrap())
            / (2.0 * h);
        fd_rel = fd_rel.max((d.r_x - fd_x).norm() / d.r_x.norm().max(1.0));
        fd_rel = fd_rel.max((d.r_y - fd_y).norm() / d.r_y.norm().max(1.0));
        fd_rel = fd_rel.max((d.r_t - fd_t).norm() / d.r_t.norm().max(rate_scale));
    }
    report(
        5,
        "geometry_oracle",
        fd_rel <= 1e-7 && sphere_rel <= 1e-12,
        &format!("finite-difference residual {fd_rel:.3e} (<= 1e-7); sphere constraint {sphere_rel:.3e} (<= 1e-12)"),
    );
}

#[test]
fn criterion_06_first_order_faithfulness() {
    // ||H_exact - H_first_order|| against the amplitude sweep {4e-3, 2e-3, 1e-3}
    let spec = BasisSpec::with_pad(8, 6);
    let set = HiggsOperatorSet::build(&spec, 0.04, HBAR).unwrap();
    let alphas = [4e-3, 2e-3, 1e-3];
    let times = [0.3, 0.9, 1.7, 2.6];
    let mut residuals = Vec::new();
    for &alpha in &alphas {
        let model = BackgroundModel::new(
            R0,
            vec![FluctuationMode { alpha, omega: 2.0 }],
            HBAR,
        )
        .unwrap();
        let mut worst = 0.0_f64;
        for &t in &times {
            let he = build_h_exact(&spec, &model, t, HBAR).unwrap();
            let hf = build_h_first_order(&set, &model, t);
            worst = worst.max(max_abs(&(he.matrix() - hf.matrix())));
        }
        residuals.push(worst);
    }
    let (p, _) = fit_power_law(&alphas, &residuals);
    report(
        6,
        "first_order_faithfulness",
        (1.8..=2.2).contains(&p),
        &format!(
            "fitted exponent p = {p:.3} (need within [1.8, 2.2]); residuals {:?} at alpha {:?}",
            residuals
                .iter()
                .map(|r| format!("{r:.3e}"))
                .collect::<Vec<_>>(),
            alphas
        ),
    );
}

#[test]
fn criterion_07_tdpt_vs_exact_propagation() {
    // single mode on the lowest allowed gap, alpha = 1e-3, lambda0 = 0.04;
    // exact (non-perturbative) propagation of the perturbed Hamiltonian
    // against first-order perturbation theory while P <= 1e-3
    let (set, sp) = build(0.04, 8, 6);
    let j = first_allowed(&sp, &set);
    let omega_ji = sp.omega(0, j);
    let alpha = 1e-3;
    let model = BackgroundModel::new(
        R0,
        vec![FluctuationMode {
            alpha,
            omega: omega_ji,
        }],
        HBAR,
    )
    .unwrap();
    // propagate until P reaches 1e-3 (resonant closed form sets the time cap)
    let rec = transition_record(0, j, &sp, &set, &model);
    let weight = (rec.v1_ji * omega_ji + C64::new(0.0, 1.0) * rec.v1t_ji).norm_sqr();
    let p_rate = model.lambda0() / (4.0 * HBAR * HBAR) * alpha * alpha * weight;
    let t_cap = (1e-3 / p_rate).sqrt();
    let psi0 = sp.eigenstate(0);
    let run = propagate(
        &psi0,
        &PropagationSettings::new(t_cap, 1.5e-3),
        &model,
        &set,
        &sp,
    )
    .unwrap();
    let mut worst_rel = 0.0_f64;
    let mut compared = 0usize;
    for (row, &t) in run.times.iter().enumerate() {
        let p_theory = tdpt_probability_full(0, j, t, &sp, &set, &model).unwrap();
        if p_theory < 1e-6 || p_theory > 1e-3 {
            continue; // below the noise floor or beyond the perturbative window
        }
        worst_rel = worst_rel.max((run.populations[row][j] - p_theory).abs() / p_theory);
        compared += 1;
    }

    // rk4 order: successive halvings of dt shrink the population change 16x
    let refine = |dt: f64| -> f64 {
        let mut s = PropagationSettings::new(10.0, dt).sample_stride(usize::MAX);
        s.norm_budget = 1e-5;
        propagate(&psi0, &s, &model, &set, &sp)
            .unwrap()
            .populations
            .last()
            .unwrap()[j]
    };
    let (p1, p2, p3) = (refine(4e-3), refine(2e-3), refine(1e-3));
    let ratio = (p1 - p2).abs() / (p2 - p3).abs();

    report(
        7,
        "tdpt_vs_exact_propagation",
        worst_rel <= 0.05 && compared > 50 && (11.2..=20.8).contains(&ratio),
        &format!(
            "max relative gap {worst_rel:.3e} over {compared} samples with 1e-6 <= P <= 1e-3 \
             (norm drift {:.3e}); rk4 refinement ratio {ratio:.1} (need 16 +/- 30%)",
            run.norm_drift
        ),
    );
}

#[test]
fn criterion_08_golden_rule_normalization() {
    // integral of the resonance-scan curve over one isolated peak against the
    // closed form (pi lambda0 / 2 hbar^2) alpha^2 |omega V1 + i V1~|^2
    let (set, sp) = build(0.04, 8, 6);
    let j = first_allowed(&sp, &set);
    let omega_ji = sp.omega(0, j);
    let alpha = 1e-3;
    let t_probe = 120.0; // t_probe * omega_gap ~ 250 >= 200
    let half_span = 0.6;
    let settings = ScanSettings {
        omega_min: omega_ji - half_span,
        omega_max: omega_ji + half_span,
        points: 1201,
        t_probe,
        alpha_probe: alpha,
        source: 0,
        targets: vec![j],
    };
    let scan = scan_resonances(&settings, &sp, &set, R0, HBAR).unwrap();
    let integral = scan.integrate_around(0, omega_ji, half_span);

    let probe = BackgroundModel::staticsphere(R0).unwrap();
    let rec = transition_record(0, j, &sp, &set, &probe);
    let weight = (rec.v1_ji * omega_ji + C64::new(0.0, 1.0) * rec.v1t_ji).norm_sqr();
    let closed_form =
        std::f64::consts::PI * probe.lambda0() / (2.0 * HBAR * HBAR) * alpha * alpha * weight;
    let rel = (integral - closed_form).abs() / closed_form;
    report(
        8,
        "golden_rule_normalization",
        rel <= 0.02,
        &format!(
            "peak integral {integral:.6e} vs closed form {closed_form:.6e}: relative gap {rel:.3e} \
             (t_probe * gap = {:.0})",
            t_probe * omega_ji
        ),
    );
}

#[test]
fn criterion_09_interference_neglect() {
    // two well-separated modes, the first on resonance; the interference
    // terms must decay like 10/(omega_min t)
    let (set, sp) = build(0.04, 8, 6);
    let j = first_allowed(&sp, &set);
    let omega_ji = sp.omega(0, j);
    let model = BackgroundModel::new(
        R0,
        vec![
            FluctuationMode {
                alpha: 1e-3,
                omega: omega_ji,
            },
            FluctuationMode {
                alpha: 1e-3,
                omega: 4.3,
            },
        ],
        HBAR,
    )
    .unwrap();
    let omega_min = omega_ji.min(4.3);
    let mut worst_margin = f64::MIN;
    let mut details = String::new();
    for t in [40.0, 80.0, 160.0, 320.0, 400.0] {
        let full = tdpt_probability_full(0, j, t, &sp, &set, &model).unwrap();
        let rw = tdpt_probability_rw(0, j, t, &sp, &set, &model).unwrap();
        let gap = (full - rw).abs() / rw;
        let bound = 10.0 / (omega_min * t);
        worst_margin = worst_margin.max(gap / bound);
        details = format!("{details}t={t}: gap {gap:.2e} bound {bound:.2e}; ");
    }
    report(
        9,
        "interference_neglect",
        worst_margin <= 1.0,
        &format!("worst gap/bound = {worst_margin:.3}; {details}"),
    );
}
