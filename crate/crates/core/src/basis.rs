//! Truncated two-dimensional oscillator product basis and the generic
//! operator-assembly primitives built on it: ladder matrices, quadrature-built
//! position functions, and padding/projection.
//!
//! States are truncated by *total* quanta, `nx + ny <= n_max`, so rotations
//! map the truncated space to itself exactly. Operator products are formed in
//! a padded basis (`n_max + pad`) and projected back to the core basis at the
//! end; padding controls the product-truncation error.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg::{gauss_hermite_modified, hermite_functions, hermiticity_residual, max_abs, CMatrix};
use crate::{Error, Result};

/// Basis truncation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    /// Core total-quanta cutoff: states with `nx + ny <= n_max`.
    pub n_max: usize,
    /// Extra quanta available while forming operator products.
    pub pad: usize,
    /// Gauss-Hermite nodes per axis for quadrature-built operators.
    pub quad_order: usize,
}

impl BasisSpec {
    pub const DEFAULT_PAD: usize = 4;

    /// Spec with default padding and quadrature order `n_max + pad + 12`.
    pub fn new(n_max: usize) -> Self {
        Self::with_pad(n_max, Self::DEFAULT_PAD)
    }

    pub fn with_pad(n_max: usize, pad: usize) -> Self {
        Self {
            n_max,
            pad,
            quad_order: n_max + pad + 12,
        }
    }

    pub fn with_quad_order(mut self, quad_order: usize) -> Self {
        self.quad_order = quad_order;
        self
    }

    /// Number of core states, `(n_max+1)(n_max+2)/2`.
    pub fn core_dim(&self) -> usize {
        dimension(self.n_max)
    }

    /// Total-quanta cutoff of the padded basis.
    pub fn padded_n_max(&self) -> usize {
        self.n_max + self.pad
    }

    /// Number of padded states.
    pub fn padded_dim(&self) -> usize {
        dimension(self.padded_n_max())
    }

    /// Smallest quadrature order that retains polynomial exactness for the
    /// padded basis itself.
    pub fn quad_floor(&self) -> usize {
        self.padded_n_max() + 1
    }

    fn check_quadrature(&self) -> Result<()> {
        if self.quad_order < self.quad_floor() {
            return Err(Error::QuadratureOrderTooLow {
                order: self.quad_order,
                floor: self.quad_floor(),
            });
        }
        Ok(())
    }
}

fn dimension(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 2) / 2
}

/// Which truncation an operator matrix lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisScope {
    Core,
    Padded,
}

/// Bijection between `(nx, ny)` and a linear index, ordered by total quanta
/// and then by `nx`. Index 0 is the ground state `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisIndex {
    n_max: usize,
    states: Vec<(u32, u32)>,
}

impl BasisIndex {
    pub fn new(n_max: usize) -> Self {
        let mut states = Vec::with_capacity(dimension(n_max));
        for n in 0..=n_max as u32 {
            for nx in 0..=n {
                states.push((nx, n - nx));
            }
        }
        Self { n_max, states }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Linear index of `(nx, ny)`, or `None` beyond the cutoff.
    pub fn index_of(&self, nx: u32, ny: u32) -> Option<usize> {
        let n = (nx + ny) as usize;
        if n > self.n_max {
            return None;
        }
        Some(n * (n + 1) / 2 + nx as usize)
    }

    pub fn state_of(&self, index: usize) -> (u32, u32) {
        self.states[index]
    }

    pub fn total_quanta(&self, index: usize) -> u32 {
        let (nx, ny) = self.states[index];
        nx + ny
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, (u32, u32))> + '_ {
        self.states.iter().copied().enumerate()
    }
}

/// Enumerate the core basis of `spec`.
pub fn enumerate_basis(spec: &BasisSpec) -> BasisIndex {
    BasisIndex::new(spec.n_max)
}

/// Dense complex operator over the core or padded basis, with hermiticity
/// metadata.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    label: String,
    matrix: CMatrix,
    spec: BasisSpec,
    scope: BasisScope,
    hermitian: bool,
    herm_tol: f64,
}

impl OperatorMatrix {
    pub const DEFAULT_HERM_TOL: f64 = 1e-12;

    /// Wrap an assembled matrix; when `hermitian` is set the matrix must pass
    /// `max|A - A^dagger| <= herm_tol * max|A|` or the build fails.
    pub fn new(
        label: impl Into<String>,
        matrix: CMatrix,
        spec: BasisSpec,
        scope: BasisScope,
        hermitian: bool,
    ) -> Result<Self> {
        let op = Self {
            label: label.into(),
            matrix,
            spec,
            scope,
            hermitian,
            herm_tol: Self::DEFAULT_HERM_TOL,
        };
        if hermitian {
            op.check_hermitian()?;
        }
        Ok(op)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn scope(&self) -> BasisScope {
        self.scope
    }

    pub fn hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn herm_tol(&self) -> f64 {
        self.herm_tol
    }

    /// Measured `max|A - A^dagger|`, in absolute units.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    /// Error if the relative hermiticity residual exceeds `herm_tol`.
    pub fn check_hermitian(&self) -> Result<()> {
        let scale = max_abs(&self.matrix).max(f64::MIN_POSITIVE);
        let residual = self.hermiticity_residual();
        if residual > self.herm_tol * scale {
            return Err(Error::HermiticityViolation {
                label: self.label.clone(),
                residual,
                tolerance: self.herm_tol * scale,
            });
        }
        Ok(())
    }

    /// Matrix element in the Fock basis, `None` outside the cutoff.
    pub fn element(&self, bra: (u32, u32), ket: (u32, u32)) -> Option<C64> {
        let idx = self.index();
        let i = idx.index_of(bra.0, bra.1)?;
        let j = idx.index_of(ket.0, ket.1)?;
        Some(self.matrix[(i, j)])
    }

    /// Basis enumeration matching this operator's scope.
    pub fn index(&self) -> BasisIndex {
        match self.scope {
            BasisScope::Core => BasisIndex::new(self.spec.n_max),
            BasisScope::Padded => BasisIndex::new(self.spec.padded_n_max()),
        }
    }
}

/// Restriction of a padded operator to the core basis.
///
/// Core states are the leading block of the padded ordering, so this is the
/// top-left submatrix; hermiticity survives exactly.
pub fn project_to_core(op: &OperatorMatrix) -> OperatorMatrix {
    assert_eq!(
        op.scope(),
        BasisScope::Padded,
        "project_to_core expects a padded operator"
    );
    let d = op.spec.core_dim();
    OperatorMatrix {
        label: op.label.clone(),
        matrix: op.matrix.view((0, 0), (d, d)).into_owned(),
        spec: op.spec,
        scope: BasisScope::Core,
        hermitian: op.hermitian,
        herm_tol: op.herm_tol,
    }
}

/// Raw core-block extraction for internal assembly.
pub(crate) fn core_block(spec: &BasisSpec, m: &CMatrix) -> CMatrix {
    let d = spec.core_dim();
    m.view((0, 0), (d, d)).into_owned()
}

/// Position and momentum ladder matrices over the padded basis.
pub struct XyOps {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub px: OperatorMatrix,
    pub py: OperatorMatrix,
}

/// Build `X, Y, Px, Py` over the padded basis from ladder algebra,
/// `X = sqrt(hbar/2) (a + a^dagger)` and `Px = i sqrt(hbar/2) (a^dagger - a)`.
pub fn build_xy_ops(spec: &BasisSpec, hbar: f64) -> Result<XyOps> {
    let idx = BasisIndex::new(spec.padded_n_max());
    let d = idx.dim();
    let c = (hbar / 2.0).sqrt();
    let mut x = CMatrix::zeros(d, d);
    let mut y = CMatrix::zeros(d, d);
    let mut px = CMatrix::zeros(d, d);
    let mut py = CMatrix::zeros(d, d);
    for (j, (nx, ny)) in idx.iter() {
        // raising entries; the matching lowering entries are set symmetrically
        if let Some(i) = idx.index_of(nx + 1, ny) {
            let amp = ((nx + 1) as f64).sqrt();
            x[(i, j)] = C64::new(c * amp, 0.0);
            x[(j, i)] = C64::new(c * amp, 0.0);
            px[(i, j)] = C64::new(0.0, c * amp);
            px[(j, i)] = C64::new(0.0, -c * amp);
        }
        if let Some(i) = idx.index_of(nx, ny + 1) {
            let amp = ((ny + 1) as f64).sqrt();
            y[(i, j)] = C64::new(c * amp, 0.0);
            y[(j, i)] = C64::new(c * amp, 0.0);
            py[(i, j)] = C64::new(0.0, c * amp);
            py[(j, i)] = C64::new(0.0, -c * amp);
        }
    }
    Ok(XyOps {
        x: OperatorMatrix::new("X", x, *spec, BasisScope::Padded, true)?,
        y: OperatorMatrix::new("Y", y, *spec, BasisScope::Padded, true)?,
        px: OperatorMatrix::new("Px", px, *spec, BasisScope::Padded, true)?,
        py: OperatorMatrix::new("Py", py, *spec, BasisScope::Padded, true)?,
    })
}

/// Cached Gauss-Hermite machinery for one `(spec, hbar)` pair.
///
/// Holds the node/basis-value matrix `B` with the oscillator weight absorbed,
/// so each position-function operator costs one diagonal scaling and one
/// `B^T (g B)` product.
pub struct QuadratureEngine {
    spec: BasisSpec,
    hbar: f64,
    /// Physical coordinates of the tensor node `(k, l)`, row-major in `k`.
    points: Vec<(f64, f64)>,
    b: DMatrix<f64>,
}

impl QuadratureEngine {
    pub fn new(spec: &BasisSpec, hbar: f64) -> Result<Self> {
        spec.check_quadrature()?;
        let q = spec.quad_order;
        let n_pad = spec.padded_n_max();
        let idx = BasisIndex::new(n_pad);
        let d = idx.dim();
        let (nodes, modified) = gauss_hermite_modified(q)?;
        // per-axis table of sqrt(w_k e^{u_k^2}) h_n(u_k)
        let mut axis = DMatrix::<f64>::zeros(q, n_pad + 1);
        for k in 0..q {
            let scale = modified[k].sqrt();
            let h = hermite_functions(nodes[k], n_pad);
            for n in 0..=n_pad {
                axis[(k, n)] = scale * h[n];
            }
        }
        let scale_len = hbar.sqrt();
        let mut points = Vec::with_capacity(q * q);
        for k in 0..q {
            for l in 0..q {
                points.push((scale_len * nodes[k], scale_len * nodes[l]));
            }
        }
        // column-major buffer: one contiguous chunk per basis state
        let mut buf = vec![0.0_f64; q * q * d];
        buf.par_chunks_mut(q * q).enumerate().for_each(|(col, out)| {
            let (nx, ny) = idx.state_of(col);
            for k in 0..q {
                let hx = axis[(k, nx as usize)];
                for l in 0..q {
                    out[k * q + l] = hx * axis[(l, ny as usize)];
                }
            }
        });
        let b = DMatrix::from_vec(q * q, d, buf);
        Ok(Self {
            spec: *spec,
            hbar,
            points,
            b,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Padded-basis matrix of a multiplication operator `f(x, y)`, with `x, y`
    /// in physical units.
    pub fn position_function<F>(&self, f: F) -> DMatrix<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let nodes = self.points.len();
        let g: Vec<f64> = self.points.par_iter().map(|&(x, y)| f(x, y)).collect();
        let mut sbuf = self.b.as_slice().to_vec();
        sbuf.par_chunks_mut(nodes).for_each(|chunk| {
            for (v, gk) in chunk.iter_mut().zip(&g) {
                *v *= gk;
            }
        });
        let scaled = DMatrix::from_vec(nodes, self.b.ncols(), sbuf);
        self.b.tr_mul(&scaled)
    }

    /// Padded-basis matrix of `g(x^2 + y^2)`.
    ///
    /// Functions of `r^2` are even in each coordinate, so the odd-parity
    /// blocks vanish identically; they are zeroed rather than left at
    /// quadrature roundoff.
    pub fn scalar_r2_function<G>(&self, g: G) -> DMatrix<f64>
    where
        G: Fn(f64) -> f64 + Sync,
    {
        let mut m = self.position_function(|x, y| g(x * x + y * y));
        let idx = BasisIndex::new(self.spec.padded_n_max());
        for (i, (ax, ay)) in idx.iter() {
            for (j, (bx, by)) in idx.iter() {
                if (ax + bx) % 2 == 1 || (ay + by) % 2 == 1 {
                    m[(i, j)] = 0.0;
                }
            }
        }
        m
    }
}

/// Matrix of `g(x^2 + y^2)` over the padded basis by tensor-product
/// Gauss-Hermite quadrature with the oscillator weight absorbed.
///
/// Exact to roundoff when `g` is a polynomial of low enough degree for the
/// configured quadrature order; errors out below the exactness floor.
pub fn build_scalar_r2_function<G>(spec: &BasisSpec, hbar: f64, g: G) -> Result<OperatorMatrix>
where
    G: Fn(f64) -> f64 + Sync,
{
    let engine = QuadratureEngine::new(spec, hbar)?;
    let m = engine.scalar_r2_function(g);
    OperatorMatrix::new(
        "g(r^2)",
        m.map(|v| C64::new(v, 0.0)),
        *spec,
        BasisScope::Padded,
        true,
    )
}

pub(crate) fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}
