//! Quantum operators of the curved oscillator as dense matrices: the Higgs
//! Hamiltonian `H0`, symmetrized momenta, angular momentum, the fluctuation
//! coupling operators `V1` and `V1~`, the first-order time-dependent
//! Hamiltonian and the exact minimal-coupling Hamiltonian.
//!
//! Every operator is assembled in the padded basis and projected to the core
//! at the end. Products of a position function with a momentum are written in
//! the symmetrized form `(AB + BA)/2` wherever the classical expression is
//! ambiguous, matching the symmetric forms used for the momentum and angular
//! momentum themselves; each term group is hermiticity-checked so a
//! transcription slip is localizable.

use num_complex::Complex64 as C64;

use crate::background::BackgroundModel;
use crate::basis::{
    build_xy_ops, core_block, BasisScope, BasisSpec, OperatorMatrix, QuadratureEngine,
};
use crate::geometry::{exact_phi, exact_vector_potential, ChartPoint};
use crate::linalg::{hermiticity_residual, max_abs, CMatrix};
use crate::Result;

/// Hermiticity residual (relative) of one assembled term group.
#[derive(Debug, Clone)]
pub struct GroupResidual {
    pub label: String,
    pub relative_residual: f64,
}

/// Shift of core matrix elements when the padding is doubled, restricted to
/// states with total quanta `<= n_max - 2`.
#[derive(Debug, Clone)]
pub struct PadConvergence {
    pub pad: usize,
    pub pad_doubled: usize,
    /// Worst relative shift over all exported operators.
    pub max_relative_shift: f64,
    /// Per-operator relative shifts, in export order.
    pub per_operator: Vec<(String, f64)>,
}

/// Assembly metadata carried by a built operator set.
#[derive(Debug, Clone, Default)]
pub struct AssemblyReport {
    pub group_residuals: Vec<GroupResidual>,
    pub pad_convergence: Option<PadConvergence>,
}

/// All static operators of the model over the core basis.
pub struct HiggsOperatorSet {
    lambda0: f64,
    hbar: f64,
    basis: BasisSpec,
    pub h0: OperatorMatrix,
    pub pi2: OperatorMatrix,
    pub l2: OperatorMatrix,
    pub lz: OperatorMatrix,
    pub mx: OperatorMatrix,
    pub my: OperatorMatrix,
    pub v1: OperatorMatrix,
    pub v1_tilde: OperatorMatrix,
    pub assembly_report: AssemblyReport,
}

impl HiggsOperatorSet {
    /// Assemble every operator at curvature `lambda0`.
    pub fn build(basis: &BasisSpec, lambda0: f64, hbar: f64) -> Result<Self> {
        let ws = Workspace::new(basis, hbar)?;
        Self::from_workspace(&ws, lambda0)
    }

    /// Assemble and additionally measure the pad-doubling shift of every
    /// exported operator.
    pub fn build_with_pad_check(basis: &BasisSpec, lambda0: f64, hbar: f64) -> Result<Self> {
        let mut set = Self::build(basis, lambda0, hbar)?;
        let doubled = BasisSpec::with_pad(basis.n_max, basis.pad * 2)
            .with_quad_order(basis.quad_order + basis.pad);
        let wide = Self::build(&doubled, lambda0, hbar)?;
        set.assembly_report.pad_convergence = Some(set.compare_with(&wide));
        Ok(set)
    }

    fn from_workspace(ws: &Workspace, lambda0: f64) -> Result<Self> {
        let mut residuals = Vec::new();
        let lz_pad = ws.lz();
        let l2_pad = &lz_pad * &lz_pad;
        let (sx, sy) = ws.s_vector(&ws.px, &ws.py);
        let (pix, piy) = ws.pi_components(lambda0, &ws.px, &ws.py, &sx, &sy);
        let pi2_pad = &pix * &pix + &piy * &piy;
        let h0_pad = ws.h0_from_parts(lambda0, &pi2_pad, &l2_pad);
        let (mx_pad, my_pad) = ws.m_components(lambda0);
        let v1_pad = ws.v1(lambda0, &mx_pad, &my_pad, &sx, &sy, &lz_pad, &mut residuals)?;
        let v1t_pad = ws.v1_tilde(lambda0, &l2_pad, &sx, &sy, &mut residuals)?;

        let spec = ws.spec;
        let wrap = |label: &str, m: &CMatrix| -> Result<OperatorMatrix> {
            OperatorMatrix::new(label, core_block(&spec, m), spec, BasisScope::Core, true)
        };
        Ok(Self {
            lambda0,
            hbar: ws.hbar,
            basis: spec,
            h0: wrap("H0", &h0_pad)?,
            pi2: wrap("Pi2", &pi2_pad)?,
            l2: wrap("L2", &l2_pad)?,
            lz: wrap("Lz", &lz_pad)?,
            mx: wrap("Mx", &mx_pad)?,
            my: wrap("My", &my_pad)?,
            v1: wrap("V1", &v1_pad)?,
            v1_tilde: wrap("V1~", &v1t_pad)?,
            assembly_report: AssemblyReport {
                group_residuals: residuals,
                pad_convergence: None,
            },
        })
    }

    fn compare_with(&self, wide: &Self) -> PadConvergence {
        let idx = self.h0.index();
        let limit = self.basis.n_max.saturating_sub(2) as u32;
        let mut per_operator = Vec::new();
        let mut worst = 0.0_f64;
        let pairs: [(&str, &OperatorMatrix, &OperatorMatrix); 8] = [
            ("H0", &self.h0, &wide.h0),
            ("Pi2", &self.pi2, &wide.pi2),
            ("L2", &self.l2, &wide.l2),
            ("Lz", &self.lz, &wide.lz),
            ("Mx", &self.mx, &wide.mx),
            ("My", &self.my, &wide.my),
            ("V1", &self.v1, &wide.v1),
            ("V1~", &self.v1_tilde, &wide.v1_tilde),
        ];
        for (label, a, b) in pairs {
            let scale = max_abs(a.matrix()).max(f64::MIN_POSITIVE);
            let mut shift = 0.0_f64;
            for (i, _) in idx.iter() {
                if idx.total_quanta(i) > limit {
                    continue;
                }
                for (j, _) in idx.iter() {
                    if idx.total_quanta(j) > limit {
                        continue;
                    }
                    shift = shift.max((a.matrix()[(i, j)] - b.matrix()[(i, j)]).norm());
                }
            }
            let rel = shift / scale;
            worst = worst.max(rel);
            per_operator.push((label.to_string(), rel));
        }
        PadConvergence {
            pad: self.basis.pad,
            pad_doubled: self.basis.pad * 2,
            max_relative_shift: worst,
            per_operator,
        }
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }
}

/// Shared padded-basis ladder matrices plus the quadrature engine.
pub(crate) struct Workspace {
    spec: BasisSpec,
    hbar: f64,
    x: CMatrix,
    y: CMatrix,
    px: CMatrix,
    py: CMatrix,
    engine: QuadratureEngine,
}

impl Workspace {
    pub(crate) fn new(spec: &BasisSpec, hbar: f64) -> Result<Self> {
        let ops = build_xy_ops(spec, hbar)?;
        let engine = QuadratureEngine::new(spec, hbar)?;
        Ok(Self {
            spec: *spec,
            hbar,
            x: ops.x.into_matrix(),
            y: ops.y.into_matrix(),
            px: ops.px.into_matrix(),
            py: ops.py.into_matrix(),
            engine,
        })
    }

    fn lz(&self) -> CMatrix {
        &self.x * &self.py - &self.y * &self.px
    }

    /// `S_i = x_i (x.q) + (q.x) x_i` for a momentum-like vector `q`.
    fn s_vector(&self, qx: &CMatrix, qy: &CMatrix) -> (CMatrix, CMatrix) {
        let d = &self.x * qx + &self.y * qy;
        let d_bar = qx * &self.x + qy * &self.y;
        let sx = &self.x * &d + &d_bar * &self.x;
        let sy = &self.y * &d + &d_bar * &self.y;
        (sx, sy)
    }

    /// Symmetrized momentum `pi_i = q_i + (lambda/2) S_i(q)`.
    fn pi_components(
        &self,
        lambda: f64,
        qx: &CMatrix,
        qy: &CMatrix,
        sx: &CMatrix,
        sy: &CMatrix,
    ) -> (CMatrix, CMatrix) {
        (qx + sx.scale(0.5 * lambda), qy + sy.scale(0.5 * lambda))
    }

    fn h0_from_parts(&self, lambda: f64, pi2: &CMatrix, l2: &CMatrix) -> CMatrix {
        let r2 = &self.x * &self.x + &self.y * &self.y;
        (pi2 + l2.scale(lambda) + r2).scale(0.5)
    }

    /// `m_i = (x_i g(r^2) + g(r^2) x_i)/2` with `g = (1 + lambda0 r^2)^-2`.
    fn m_components(&self, lambda0: f64) -> (CMatrix, CMatrix) {
        let g = crate::basis::real_to_complex(
            &self
                .engine
                .scalar_r2_function(|r2| (1.0 + lambda0 * r2).powi(-2)),
        );
        let mx = (&self.x * &g + &g * &self.x).scale(0.5);
        let my = (&self.y * &g + &g * &self.y).scale(0.5);
        (mx, my)
    }

    /// Fluctuation coupling paired with `V0(t)`, four term groups.
    #[allow(clippy::too_many_arguments)]
    fn v1(
        &self,
        lambda0: f64,
        mx: &CMatrix,
        my: &CMatrix,
        sx: &CMatrix,
        sy: &CMatrix,
        lz: &CMatrix,
        residuals: &mut Vec<GroupResidual>,
    ) -> Result<CMatrix> {
        let spec = self.spec;
        let mut checked = |label: &str, m: CMatrix| -> Result<CMatrix> {
            let op = OperatorMatrix::new(label, m, spec, BasisScope::Padded, true)?;
            residuals.push(GroupResidual {
                label: label.to_string(),
                relative_residual: op.hermiticity_residual()
                    / max_abs(op.matrix()).max(f64::MIN_POSITIVE),
            });
            Ok(op.into_matrix())
        };

        // p.m + m.p
        let g1 = checked(
            "V1 {p,m}",
            &self.px * mx + mx * &self.px + &self.py * my + my * &self.py,
        )?;

        // (lambda0/2) [p.S_m + m.S], each dot product symmetrized
        let (smx, smy) = self.s_vector(mx, my);
        let p_dot_sm = &self.px * &smx + &self.py * &smy;
        let sm_dot_p = &smx * &self.px + &smy * &self.py;
        let m_dot_s = mx * sx + my * sy;
        let s_dot_m = sx * mx + sy * my;
        let g2 = checked(
            "V1 triple products",
            (p_dot_sm + sm_dot_p + m_dot_s + s_dot_m).scale(0.25 * lambda0),
        )?;

        // lambda0 [(x p_y - y p_x)(x m_y - y m_x) + h.c.]; the second factor
        // vanishes identically because m is radial, so this term only carries
        // truncation residue
        let mz = ((&self.x * my + my * &self.x) - (&self.y * mx + mx * &self.y)).scale(0.5);
        let g3 = checked(
            "V1 angular cross terms",
            (lz * &mz + &mz * lz).scale(lambda0),
        )?;

        // (lambda0^2/2) [S.S_m + S_m.S]
        let g4 = checked(
            "V1 quartic products",
            (sx * &smx + sy * &smy + &smx * sx + &smy * sy).scale(0.5 * lambda0 * lambda0),
        )?;

        checked("V1", g1 + g2 + g3 + g4)
    }

    /// Fluctuation coupling paired with `V0~(t)`, two term groups.
    fn v1_tilde(
        &self,
        lambda0: f64,
        l2: &CMatrix,
        sx: &CMatrix,
        sy: &CMatrix,
        residuals: &mut Vec<GroupResidual>,
    ) -> Result<CMatrix> {
        let spec = self.spec;
        let mut checked = |label: &str, m: CMatrix| -> Result<CMatrix> {
            let op = OperatorMatrix::new(label, m, spec, BasisScope::Padded, true)?;
            residuals.push(GroupResidual {
                label: label.to_string(),
                relative_residual: op.hermiticity_residual()
                    / max_abs(op.matrix()).max(f64::MIN_POSITIVE),
            });
            Ok(op.into_matrix())
        };

        let p_dot_s = &self.px * sx + &self.py * sy;
        let s_dot_p = sx * &self.px + sy * &self.py;
        let g1 = checked(
            "V1~ {L2 + p.S}",
            (l2 + (p_dot_s + s_dot_p).scale(0.5)).scale(-1.0),
        )?;
        let g2 = checked(
            "V1~ quartic",
            (sx * sx + sy * sy).scale(-0.5 * lambda0),
        )?;
        checked("V1~", g1 + g2)
    }

    /// Exact minimal-coupling Hamiltonian at time `t`:
    /// `H0(x, p - A(t); lambda(t)) + phi(t)` with the exact vector and scalar
    /// potentials assembled as position-function operators.
    fn h_exact(&self, model: &BackgroundModel, t: f64) -> CMatrix {
        let lambda = model.curvature_exact(t);
        let ax = crate::basis::real_to_complex(&self.engine.position_function(|x, y| {
            exact_vector_potential(&ChartPoint::new(x, y), model, t).x
        }));
        let ay = crate::basis::real_to_complex(&self.engine.position_function(|x, y| {
            exact_vector_potential(&ChartPoint::new(x, y), model, t).y
        }));
        let phi = crate::basis::real_to_complex(
            &self
                .engine
                .position_function(|x, y| exact_phi(&ChartPoint::new(x, y), model, t)),
        );
        let pax = &self.px - &ax;
        let pay = &self.py - &ay;
        let (sax, say) = self.s_vector(&pax, &pay);
        let (pix, piy) = self.pi_components(lambda, &pax, &pay, &sax, &say);
        let pi2 = &pix * &pix + &piy * &piy;
        let lz_a = ((&self.x * &pay + &pay * &self.x) - (&self.y * &pax + &pax * &self.y))
            .scale(0.5);
        let l2_a = &lz_a * &lz_a;
        self.h0_from_parts(lambda, &pi2, &l2_a) + phi
    }
}

/// Squared angular momentum over the core basis; in 2D this is `Lz^2`.
pub fn build_l2(spec: &BasisSpec, hbar: f64) -> Result<OperatorMatrix> {
    let ws = Workspace::new(spec, hbar)?;
    let lz = ws.lz();
    OperatorMatrix::new(
        "L2",
        core_block(spec, &(&lz * &lz)),
        *spec,
        BasisScope::Core,
        true,
    )
}

/// Angular momentum `Lz = X Py - Y Px` over the core basis.
pub fn build_lz(spec: &BasisSpec, hbar: f64) -> Result<OperatorMatrix> {
    let ws = Workspace::new(spec, hbar)?;
    OperatorMatrix::new(
        "Lz",
        core_block(spec, &ws.lz()),
        *spec,
        BasisScope::Core,
        true,
    )
}

/// Symmetrized momentum components `pi = p + (lambda/2)[x(x.p) + (p.x)x]`
/// over the core basis.
pub fn build_pi(
    spec: &BasisSpec,
    lambda: f64,
    hbar: f64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let ws = Workspace::new(spec, hbar)?;
    let (sx, sy) = ws.s_vector(&ws.px, &ws.py);
    let (pix, piy) = ws.pi_components(lambda, &ws.px, &ws.py, &sx, &sy);
    Ok((
        OperatorMatrix::new("Pix", core_block(spec, &pix), *spec, BasisScope::Core, true)?,
        OperatorMatrix::new("Piy", core_block(spec, &piy), *spec, BasisScope::Core, true)?,
    ))
}

/// Higgs Hamiltonian `H0 = (pi^2 + lambda L^2)/2 + r^2/2` over the core basis.
pub fn build_h0(spec: &BasisSpec, lambda: f64, hbar: f64) -> Result<OperatorMatrix> {
    let ws = Workspace::new(spec, hbar)?;
    let lz = ws.lz();
    let l2 = &lz * &lz;
    let (sx, sy) = ws.s_vector(&ws.px, &ws.py);
    let (pix, piy) = ws.pi_components(lambda, &ws.px, &ws.py, &sx, &sy);
    let pi2 = &pix * &pix + &piy * &piy;
    let h0 = ws.h0_from_parts(lambda, &pi2, &l2);
    OperatorMatrix::new("H0", core_block(spec, &h0), *spec, BasisScope::Core, true)
}

/// Radial coupling vector `m = x / (1 + lambda0 r^2)^2` over the core basis.
pub fn build_m(
    spec: &BasisSpec,
    lambda0: f64,
    hbar: f64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let ws = Workspace::new(spec, hbar)?;
    let (mx, my) = ws.m_components(lambda0);
    Ok((
        OperatorMatrix::new("Mx", core_block(spec, &mx), *spec, BasisScope::Core, true)?,
        OperatorMatrix::new("My", core_block(spec, &my), *spec, BasisScope::Core, true)?,
    ))
}

/// Momentum-type fluctuation coupling `V1` over the core basis.
pub fn build_v1(spec: &BasisSpec, lambda0: f64, hbar: f64) -> Result<OperatorMatrix> {
    let set = HiggsOperatorSet::build(spec, lambda0, hbar)?;
    Ok(set.v1)
}

/// Curvature-type fluctuation coupling `V1~` over the core basis.
pub fn build_v1_tilde(spec: &BasisSpec, lambda0: f64, hbar: f64) -> Result<OperatorMatrix> {
    let set = HiggsOperatorSet::build(spec, lambda0, hbar)?;
    Ok(set.v1_tilde)
}

/// First-order time-dependent Hamiltonian
/// `H(t) = H0 + V0(t) V1 + V0~(t) V1~` over the core basis.
pub fn build_h_first_order(
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
    t: f64,
) -> OperatorMatrix {
    let m = first_order_matrix(ops, model, t);
    OperatorMatrix::new("H(t) first order", m, *ops.basis(), BasisScope::Core, true)
        .expect("sum of hermitian operators stays hermitian")
}

/// Raw first-order Hamiltonian matrix, for hot propagation loops.
pub(crate) fn first_order_matrix(
    ops: &HiggsOperatorSet,
    model: &BackgroundModel,
    t: f64,
) -> CMatrix {
    let v0 = C64::new(model.v0(t), 0.0);
    let v0t = C64::new(model.v0_tilde(t), 0.0);
    let mut m = ops.h0.matrix().clone();
    m.zip_apply(ops.v1.matrix(), |h, v| *h += v0 * v);
    m.zip_apply(ops.v1_tilde.matrix(), |h, v| *h += v0t * v);
    m
}

/// Exact minimal-coupling Hamiltonian at time `t` over the core basis, with
/// `lambda = 1/R(t)^2` exact and the exact vector and scalar potentials.
pub fn build_h_exact(
    spec: &BasisSpec,
    model: &BackgroundModel,
    t: f64,
    hbar: f64,
) -> Result<OperatorMatrix> {
    ExactHamiltonian::new(spec, hbar)?.at(model, t)
}

/// Cached assembler for the exact Hamiltonian, reused across a time grid.
pub struct ExactHamiltonian {
    ws: Workspace,
}

impl ExactHamiltonian {
    pub fn new(spec: &BasisSpec, hbar: f64) -> Result<Self> {
        Ok(Self {
            ws: Workspace::new(spec, hbar)?,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.ws.spec
    }

    /// Core-basis exact Hamiltonian at time `t`.
    pub fn at(&self, model: &BackgroundModel, t: f64) -> Result<OperatorMatrix> {
        OperatorMatrix::new(
            "H(t) exact",
            self.matrix_at(model, t),
            self.ws.spec,
            BasisScope::Core,
            true,
        )
    }

    /// Raw core matrix, for hot propagation loops.
    pub(crate) fn matrix_at(&self, model: &BackgroundModel, t: f64) -> CMatrix {
        core_block(&self.ws.spec, &self.ws.h_exact(model, t))
    }
}

/// Relative hermiticity residual of a raw matrix; helper for validation.
pub fn relative_hermiticity(m: &CMatrix) -> f64 {
    hermiticity_residual(m) / max_abs(m).max(f64::MIN_POSITIVE)
}
