//! Subcommand implementations; each builds the operator set, computes its
//! table and writes one output file with the exact header contract.

use std::path::PathBuf;

use sphosc_core::dynamics::{
    diagonalize, golden_rule_from_record, propagate, scan_resonances, PropagationSettings,
    ScanSettings, SpectrumResult, TransitionRecord,
};
use sphosc_core::hamiltonian::HiggsOperatorSet;
use sphosc_core::linalg::CMatrix;
use sphosc_core::validate::run_suite;

use crate::config::{OutputFormat, RunConfig, Validated};
use crate::output::{Cell, Table};

/// Absolute floor below which elements are omitted from the melem and rates
/// tables; symmetry-forbidden pairs additionally carry truncation residue up
/// to 1e-10 of the largest element, so the floor scales with that too.
const ELEMENT_FLOOR: f64 = 1e-14;

pub struct Ctx {
    pub cfg: RunConfig,
    pub v: Validated,
    pub dir: PathBuf,
    pub format: OutputFormat,
    pub config_sha256: String,
}

impl Ctx {
    fn build_operators(&self) -> anyhow::Result<(HiggsOperatorSet, SpectrumResult)> {
        let set = HiggsOperatorSet::build(&self.v.basis, self.v.model.lambda0(), self.v.model.hbar())?;
        let spectrum = diagonalize(&set.h0, &set.lz, self.v.model.hbar())?;
        Ok((set, spectrum))
    }

    fn write(&self, table: &Table) -> anyhow::Result<PathBuf> {
        let path = table.write(&self.dir, self.format, &self.config_sha256)?;
        log::info!("wrote {} rows to {}", table.rows.len(), path.display());
        Ok(path)
    }
}

/// Rotated coupling matrices plus the records above the element floor, in
/// deterministic (i, j) order.
fn records_above_floor(
    set: &HiggsOperatorSet,
    spectrum: &SpectrumResult,
) -> Vec<TransitionRecord> {
    let v = spectrum.states();
    let v1: CMatrix = v.adjoint() * set.v1.matrix() * v;
    let v1t: CMatrix = v.adjoint() * set.v1_tilde.matrix() * v;
    let d = spectrum.dim();
    let scale = v1
        .iter()
        .chain(v1t.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let floor = ELEMENT_FLOOR.max(1e-10 * scale);
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let (a, b) = (v1[(j, i)], v1t[(j, i)]);
            if a.norm().max(b.norm()) > floor {
                out.push(TransitionRecord {
                    i,
                    j,
                    omega_ji: spectrum.omega(i, j),
                    v1_ji: a,
                    v1t_ji: b,
                    channels: Vec::new(),
                });
            }
        }
    }
    out
}

pub fn cmd_spectrum(ctx: &Ctx) -> anyhow::Result<()> {
    let (_, spectrum) = ctx.build_operators()?;
    let mut table = Table::new(
        "spectrum",
        ["index", "energy", "m_label", "cluster_id"]
            .map(String::from)
            .to_vec(),
    );
    for k in 0..spectrum.dim() {
        table.push(vec![
            Cell::Int(k as i64),
            Cell::Float(spectrum.energy(k)),
            Cell::Int(spectrum.m_label(k)),
            Cell::Int(spectrum.cluster_of(k) as i64),
        ]);
    }
    ctx.write(&table)?;
    Ok(())
}

pub fn cmd_melem(ctx: &Ctx) -> anyhow::Result<()> {
    let (set, spectrum) = ctx.build_operators()?;
    let mut table = Table::new(
        "melem",
        ["i", "j", "omega_ji", "re_v1", "im_v1", "re_v1t", "im_v1t"]
            .map(String::from)
            .to_vec(),
    );
    for rec in records_above_floor(&set, &spectrum) {
        table.push(vec![
            Cell::Int(rec.i as i64),
            Cell::Int(rec.j as i64),
            Cell::Float(rec.omega_ji),
            Cell::Float(rec.v1_ji.re),
            Cell::Float(rec.v1_ji.im),
            Cell::Float(rec.v1t_ji.re),
            Cell::Float(rec.v1t_ji.im),
        ]);
    }
    ctx.write(&table)?;
    Ok(())
}

pub fn cmd_rates(ctx: &Ctx) -> anyhow::Result<()> {
    let (set, spectrum) = ctx.build_operators()?;
    let mut table = Table::new(
        "rates",
        ["i", "j", "mode", "channel", "detuning", "gamma"]
            .map(String::from)
            .to_vec(),
    );
    for rec in records_above_floor(&set, &spectrum) {
        let rates = golden_rule_from_record(&rec, &spectrum, &ctx.v.model, ctx.v.kernel)?;
        for e in rates.entries {
            table.push(vec![
                Cell::Int(rec.i as i64),
                Cell::Int(rec.j as i64),
                Cell::Int(e.mode_index as i64),
                Cell::Text(e.channel.label().to_string()),
                Cell::Float(e.detuning),
                Cell::Float(e.gamma),
            ]);
        }
    }
    ctx.write(&table)?;
    Ok(())
}

pub fn cmd_propagate(ctx: &Ctx) -> anyhow::Result<()> {
    let (set, spectrum) = ctx.build_operators()?;
    let settings = PropagationSettings::new(ctx.cfg.propagation.t_final, ctx.cfg.propagation.dt)
        .integrator(ctx.v.integrator)
        .mode(ctx.v.propagation_mode);
    let psi0 = spectrum.eigenstate(ctx.cfg.propagation.initial_state_index);
    let run = propagate(&psi0, &settings, &ctx.v.model, &set, &spectrum)?;

    let mut columns = vec!["t".to_string()];
    columns.extend((0..spectrum.dim()).map(|j| format!("pop_{j}")));
    columns.push("norm_drift".to_string());
    let mut table = Table::new("propagate", columns);
    for (row, &t) in run.times.iter().enumerate() {
        let mut cells = Vec::with_capacity(spectrum.dim() + 2);
        cells.push(Cell::Float(t));
        cells.extend(run.populations[row].iter().map(|&p| Cell::Float(p)));
        cells.push(Cell::Float(run.drifts[row]));
        table.push(cells);
    }
    ctx.write(&table)?;
    Ok(())
}

pub fn cmd_scan(ctx: &Ctx) -> anyhow::Result<()> {
    let (set, spectrum) = ctx.build_operators()?;
    let settings = ScanSettings {
        omega_min: ctx.cfg.scan.omega_min,
        omega_max: ctx.cfg.scan.omega_max,
        points: ctx.cfg.scan.points,
        t_probe: ctx.cfg.scan.t_probe,
        alpha_probe: ctx.cfg.scan.alpha_probe,
        source: ctx.cfg.scan.source_state,
        targets: ctx.cfg.scan.target_states.clone(),
    };
    let scan = scan_resonances(
        &settings,
        &spectrum,
        &set,
        ctx.v.model.r0(),
        ctx.v.model.hbar(),
    )?;
    let mut columns = vec!["omega".to_string()];
    columns.extend(scan.targets.iter().map(|j| format!("p_over_t_{j}")));
    let mut table = Table::new("scan", columns);
    for (k, &omega) in scan.omegas.iter().enumerate() {
        let mut cells = vec![Cell::Float(omega)];
        cells.extend(scan.values.iter().map(|v| Cell::Float(v[k])));
        table.push(cells);
    }
    ctx.write(&table)?;
    for p in &scan.peaks {
        log::info!(
            "peak: target {} center {:.6} height {:.3e} fwhm {:?}",
            p.target,
            p.center,
            p.height,
            p.fwhm
        );
    }
    Ok(())
}

/// Returns false when any invariant failed; the caller maps that to a
/// nonzero exit code.
pub fn cmd_validate(ctx: &Ctx) -> anyhow::Result<bool> {
    let results = run_suite(&ctx.v.model, &ctx.v.basis)?;
    let mut table = Table::new(
        "validate",
        ["check", "status", "residual", "tolerance", "note"]
            .map(String::from)
            .to_vec(),
    );
    let mut all_passed = true;
    for r in &results {
        println!(
            "{:<44} {:>4}  residual {:>12.3e}  tolerance {:>12.3e}  {}",
            r.name,
            if r.passed { "ok" } else { "FAIL" },
            r.residual,
            r.tolerance,
            r.note
        );
        all_passed &= r.passed;
        table.push(vec![
            Cell::Text(r.name.clone()),
            Cell::Text(if r.passed { "pass" } else { "fail" }.to_string()),
            Cell::Float(r.residual),
            Cell::Float(r.tolerance),
            Cell::Text(r.note.clone()),
        ]);
    }
    ctx.write(&table)?;
    Ok(all_passed)
}
