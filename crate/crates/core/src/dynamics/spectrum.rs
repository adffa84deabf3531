//! Hermitian eigendecomposition of the static Hamiltonian with degenerate
//! clusters rotated to the angular-momentum eigenbasis.

use num_complex::Complex64 as C64;

use crate::linalg::{commutator_max_abs, eigh, max_abs, CMatrix, CVector};
use crate::basis::OperatorMatrix;
use crate::{Error, Result};

/// Eigenvalues and eigenvectors of `H0`, ordered by energy and, within each
/// degenerate cluster, by the angular-momentum label `m`.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    energies: Vec<f64>,
    /// Columns are eigenvectors in the Fock basis.
    states: CMatrix,
    m_labels: Vec<i64>,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    cluster_tol: f64,
    hbar: f64,
    orthonormality_residual: f64,
    eigen_residual: f64,
}

/// Relative tolerance (times the spectral range) used to group eigenvalues
/// into degenerate clusters.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Diagonalize `H0` and rotate each degenerate cluster to the `Lz` eigenbasis.
///
/// Ordering is deterministic: ascending energy, then ascending `m` within a
/// cluster; each state's globally largest component is made real positive.
pub fn diagonalize(
    h0: &OperatorMatrix,
    lz: &OperatorMatrix,
    hbar: f64,
) -> Result<SpectrumResult> {
    let d = h0.dim();
    let comm = commutator_max_abs(h0.matrix(), lz.matrix());
    let comm_tol = 1e-9 * max_abs(h0.matrix()).max(f64::MIN_POSITIVE);
    if comm > comm_tol {
        return Err(Error::ClusterRotation(format!(
            "[H0, Lz] residual {comm:.3e} exceeds {comm_tol:.3e}; the truncation broke the symmetry"
        )));
    }

    let (energies_vec, mut states) = eigh(h0.matrix())?;
    let energies: Vec<f64> = energies_vec.iter().copied().collect();
    let range = (energies[d - 1] - energies[0]).max(f64::MIN_POSITIVE);
    let cluster_tol = DEFAULT_CLUSTER_TOL * range;

    // certify the raw decomposition before any cluster rotation: rotating a
    // cluster mixes members across their (sub-tolerance) energy splitting, so
    // the rotated states satisfy the eigenproblem only to the cluster width
    let h_norm = energies[0].abs().max(energies[d - 1].abs());
    let mut eigen_residual = 0.0f64;
    for k in 0..d {
        let psi = states.column(k);
        let r = h0.matrix() * psi - psi.scale(energies[k]);
        eigen_residual = eigen_residual.max(r.norm());
    }
    if eigen_residual > 1e-10 * h_norm {
        return Err(Error::Eigensolver(format!(
            "eigenpair residual {eigen_residual:.3e} exceeds 1e-10 * |H0|"
        )));
    }

    // group consecutive eigenvalues
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match clusters.last_mut() {
            Some(c) if energies[k] - energies[*c.last().unwrap()] <= cluster_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    // rotate each cluster to the Lz eigenbasis
    let mut m_labels = vec![0_i64; d];
    for cluster in &clusters {
        let k0 = cluster[0];
        let nc = cluster.len();
        let sub = states.columns(k0, nc).into_owned();
        let lz_sub = sub.adjoint() * lz.matrix() * &sub;
        let (m_vals, u) = eigh(&lz_sub)?;
        let rotated = &sub * &u;
        for (c, &k) in cluster.iter().enumerate() {
            states.set_column(k, &rotated.column(c));
            let m = m_vals[c] / hbar;
            let m_int = m.round();
            if (m - m_int).abs() > 1e-8 {
                return Err(Error::ClusterRotation(format!(
                    "state {k}: Lz eigenvalue {m:.12} (in hbar units) is not an integer"
                )));
            }
            m_labels[k] = m_int as i64;
        }
    }

    // deterministic phase: largest-magnitude component real positive
    for k in 0..d {
        let col = states.column(k);
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (row, z) in col.iter().enumerate() {
            let mag = z.norm();
            if mag > best_mag {
                best_mag = mag;
                best = row;
            }
        }
        let pivot = states[(best, k)];
        if pivot.norm() > 0.0 {
            let phase = pivot / C64::new(pivot.norm(), 0.0);
            let fix = phase.conj();
            for row in 0..d {
                states[(row, k)] *= fix;
            }
        }
    }

    // orthonormality survives the (unitary) rotation and phase fixing
    let gram = states.adjoint() * &states;
    let eye = CMatrix::identity(d, d);
    let orthonormality_residual = max_abs(&(gram - eye));
    if orthonormality_residual > 1e-10 {
        return Err(Error::Eigensolver(format!(
            "eigenvector orthonormality residual {orthonormality_residual:.3e} exceeds 1e-10"
        )));
    }

    let mut cluster_of = vec![0usize; d];
    for (ci, c) in clusters.iter().enumerate() {
        for &k in c {
            cluster_of[k] = ci;
        }
    }

    Ok(SpectrumResult {
        energies,
        states,
        m_labels,
        clusters,
        cluster_of,
        cluster_tol,
        hbar,
        orthonormality_residual,
        eigen_residual,
    })
}

impl SpectrumResult {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    /// Eigenvectors as columns, Fock basis.
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    pub fn eigenstate(&self, k: usize) -> CVector {
        self.states.column(k).into_owned()
    }

    /// Angular-momentum label in units of `hbar`.
    pub fn m_label(&self, k: usize) -> i64 {
        self.m_labels[k]
    }

    pub fn m_labels(&self) -> &[i64] {
        &self.m_labels
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, k: usize) -> usize {
        self.cluster_of[k]
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn orthonormality_residual(&self) -> f64 {
        self.orthonormality_residual
    }

    pub fn eigen_residual(&self) -> f64 {
        self.eigen_residual
    }

    /// Transition angular frequency `(E_j - E_i)/hbar`.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        (self.energies[j] - self.energies[i]) / self.hbar
    }

    /// Coefficients of `psi` in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &CVector) -> CVector {
        self.states.adjoint() * psi
    }

    /// Largest absolute energy, used as the spectral radius of `H0`.
    pub fn spectral_radius(&self) -> f64 {
        self.energies[0]
            .abs()
            .max(self.energies[self.dim() - 1].abs())
    }
}

/// Spatial parity `(-1)^(nx+ny)` of an eigenstate.
///
/// The Hamiltonian is parity even, so each eigenstate has support on a single
/// total-quanta parity; mixed support signals a broken assembly.
pub fn parity_label(spectrum: &SpectrumResult, k: usize, index: &crate::basis::BasisIndex) -> Result<i8> {
    let col = spectrum.states.column(k);
    let mut even = 0.0f64;
    let mut odd = 0.0f64;
    for (row, z) in col.iter().enumerate() {
        let w = z.norm_sqr();
        if index.total_quanta(row) % 2 == 0 {
            even += w;
        } else {
            odd += w;
        }
    }
    if even.min(odd) > 1e-10 {
        return Err(Error::ClusterRotation(format!(
            "state {k} mixes parities: even weight {even:.3e}, odd weight {odd:.3e}"
        )));
    }
    Ok(if even >= odd { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::hamiltonian::HiggsOperatorSet;
    use approx::assert_abs_diff_eq;

    fn flat_spectrum(n_max: usize) -> (HiggsOperatorSet, SpectrumResult) {
        let spec = BasisSpec::new(n_max);
        let set = HiggsOperatorSet::build(&spec, 0.0, 1.0).unwrap();
        let sp = diagonalize(&set.h0, &set.lz, 1.0).unwrap();
        (set, sp)
    }

    #[test]
    fn flat_energies_and_clusters() {
        let (_, sp) = flat_spectrum(6);
        let expect = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0];
        for (k, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(sp.energy(k), *e, epsilon = 1e-12);
        }
        assert_eq!(sp.clusters()[0].len(), 1);
        assert_eq!(sp.clusters()[1].len(), 2);
        assert_eq!(sp.clusters()[2].len(), 3);
        assert_eq!(sp.clusters()[3].len(), 4);
    }

    #[test]
    fn flat_m_labels_follow_the_circular_basis() {
        let (_, sp) = flat_spectrum(6);
        // level n carries m = -n, -n+2, ..., n
        let mut k = 0usize;
        for n in 0..=4i64 {
            let expect: Vec<i64> = (0..=n).map(|j| 2 * j - n).collect();
            let got: Vec<i64> = (0..expect.len()).map(|j| sp.m_label(k + j)).collect();
            assert_eq!(got, expect, "level {n}");
            k += expect.len();
        }
    }

    #[test]
    fn lz_is_diagonal_within_clusters() {
        let spec = BasisSpec::with_pad(8, 6);
        let set = HiggsOperatorSet::build(&spec, 0.1, 1.0).unwrap();
        let sp = diagonalize(&set.h0, &set.lz, 1.0).unwrap();
        let lz_rot = sp.states().adjoint() * set.lz.matrix() * sp.states();
        for c in sp.clusters() {
            for &a in c {
                for &b in c {
                    if a != b {
                        assert!(lz_rot[(a, b)].norm() < 1e-8, "off-diagonal {:?}", (a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn phases_are_deterministic() {
        let (_, sp1) = flat_spectrum(5);
        let (_, sp2) = flat_spectrum(5);
        assert_eq!(max_abs(&(sp1.states() - sp2.states())), 0.0);
        // largest component real positive (first index wins ties)
        for k in 0..sp1.dim() {
            let col = sp1.states().column(k);
            let mut best = 0usize;
            let mut best_mag = 0.0f64;
            for (row, z) in col.iter().enumerate() {
                if z.norm() > best_mag {
                    best_mag = z.norm();
                    best = row;
                }
            }
            let pivot = col[best];
            assert!(pivot.re > 0.0 && pivot.im.abs() < 1e-13, "pivot {pivot}");
        }
    }

    #[test]
    fn parity_labels_match_total_quanta() {
        let spec = BasisSpec::new(6);
        let set = HiggsOperatorSet::build(&spec, 0.04, 1.0).unwrap();
        let sp = diagonalize(&set.h0, &set.lz, 1.0).unwrap();
        let idx = set.h0.index();
        // lowest state even, first excited level odd
        assert_eq!(parity_label(&sp, 0, &idx).unwrap(), 1);
        assert_eq!(parity_label(&sp, 1, &idx).unwrap(), -1);
        assert_eq!(parity_label(&sp, 2, &idx).unwrap(), -1);
        assert_eq!(parity_label(&sp, 3, &idx).unwrap(), 1);
    }
}
