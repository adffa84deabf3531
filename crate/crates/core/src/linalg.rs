//! Dense linear-algebra helpers: Hermitian eigendecomposition with a
//! deterministic ordering, Gauss-Hermite rules and matrix norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Dense complex matrix used for all operators.
pub type CMatrix = DMatrix<C64>;
/// Dense complex vector (states).
pub type CVector = DVector<C64>;

/// Largest absolute entry of a complex matrix.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Largest absolute entry of `A - A^dagger`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Frobenius norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry of the commutator `AB - BA`.
pub fn commutator_max_abs(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// Columns of the returned matrix are the eigenvectors in the same order.
/// The input is assumed Hermitian; only the structurally symmetrized part
/// `(A + A^dagger)/2` enters the solver so roundoff asymmetry cannot leak in.
///
/// Implemented as unitary Householder reduction to a real symmetric
/// tridiagonal followed by the implicit-shift QL iteration with accumulated
/// rotations (the EISPACK `htridi`/`tql2` lineage); fully deterministic.
pub fn eigh(a: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Eigensolver(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((DVector::zeros(0), CMatrix::zeros(0, 0)));
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let (mut d, mut e, mut z) = hermitian_tridiagonalize(&sym);
    tql2(&mut d, &mut e, &mut z)?;
    // ascending order with stable index tie-break
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| d[k]));
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &z.column(k));
    }
    Ok((values, vectors))
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form `A = Q T Q^dagger`; returns the diagonal, subdiagonal and `Q`.
fn hermitian_tridiagonalize(a: &CMatrix) -> (Vec<f64>, Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut e = vec![0.0_f64; n.saturating_sub(1)];
    let mut taus: Vec<C64> = Vec::with_capacity(n.saturating_sub(1));
    let mut vs: Vec<CVector> = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n.saturating_sub(1) {
        let alpha = a[(k + 1, k)];
        let mut tail2 = 0.0_f64;
        for i in k + 2..n {
            tail2 += a[(i, k)].norm_sqr();
        }
        if tail2 == 0.0 && alpha.im == 0.0 {
            // already in real tridiagonal form for this column
            e[k] = alpha.re;
            taus.push(C64::new(0.0, 0.0));
            vs.push(CVector::zeros(0));
            continue;
        }
        let norm = (alpha.norm_sqr() + tail2).sqrt();
        let beta = if alpha.re >= 0.0 { -norm } else { norm };
        let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
        let denom = alpha - C64::new(beta, 0.0);
        let mut v = CVector::zeros(n);
        v[k + 1] = C64::new(1.0, 0.0);
        for i in k + 2..n {
            v[i] = a[(i, k)] / denom;
        }
        // two-sided update of the trailing block: A <- H^dagger A H with
        // H = I - tau v v^dagger, via x = tau A v, w = x - (tau (x^dagger v)/2) v
        let mut x = CVector::zeros(n);
        for i in k + 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in k + 1..n {
                acc += a[(i, j)] * v[j];
            }
            x[i] = tau * acc;
        }
        let mut xhv = C64::new(0.0, 0.0);
        for i in k + 1..n {
            xhv += x[i].conj() * v[i];
        }
        let corr = tau * xhv * 0.5;
        let mut w = CVector::zeros(n);
        for i in k + 1..n {
            w[i] = x[i] - corr * v[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(i, j)] -= upd;
            }
        }
        e[k] = beta;
        taus.push(tau);
        vs.push(v);
    }

    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();

    // accumulate Q = H_0 H_1 ... H_{n-2} against the identity
    let mut q = CMatrix::identity(n, n);
    for k in (0..taus.len()).rev() {
        if taus[k] == C64::new(0.0, 0.0) {
            continue;
        }
        let v = &vs[k];
        // q <- q - tau v (v^dagger q), v supported on rows k+1..
        for col in 0..n {
            let mut vq = C64::new(0.0, 0.0);
            for i in k + 1..n {
                vq += v[i].conj() * q[(i, col)];
            }
            let f = taus[k] * vq;
            for i in k + 1..n {
                let upd = f * v[i];
                q[(i, col)] -= upd;
            }
        }
    }
    (d, e, q)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal, rotations
/// accumulated into the (complex) column basis `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut CMatrix) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    // internal subdiagonal buffer with a trailing zero
    let mut sub = vec![0.0_f64; n];
    sub[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Eigensolver(
                    "tridiagonal QL iteration did not converge in 50 sweeps".into(),
                ));
            }
            // Wilkinson-style shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + sub[l] / (g + r.copysign(g));
            let mut s = 1.0_f64;
            let mut c = 1.0_f64;
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    // recover from underflow: skip this transformation
                    d[i + 1] -= p;
                    sub[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // accumulate the real rotation into the complex basis columns
                for row in 0..z.nrows() {
                    f = z[(row, i + 1)].re;
                    let fi = z[(row, i + 1)].im;
                    let zr = z[(row, i)].re;
                    let zi = z[(row, i)].im;
                    z[(row, i + 1)] = C64::new(s * zr + c * f, s * zi + c * fi);
                    z[(row, i)] = C64::new(c * zr - s * f, c * zi - s * fi);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    e[..n - 1].copy_from_slice(&sub[..n - 1]);
    Ok(())
}

/// Gauss-Hermite rule: nodes and weights for `int f(u) exp(-u^2) du`.
///
/// Nodes start from the Golub-Welsch eigenvalues and are Newton-polished on
/// the Hermite function; weights come from the Christoffel function. The rule
/// is exactly symmetric under `u -> -u`.
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (nodes, modified) = gauss_hermite_modified(order)?;
    let weights = nodes
        .iter()
        .zip(&modified)
        .map(|(&u, &m)| m * (-u * u).exp())
        .collect();
    Ok((nodes, weights))
}

/// Gauss-Hermite nodes with the *modified* weights `w_k exp(u_k^2)`, the form
/// used when the Gaussian is absorbed into the basis functions. Weights are
/// the reciprocal Christoffel sums, so no large exponentials appear.
///
/// Roots are found by Newton iteration on the Hermite function, seeded with
/// the classical asymptotic guesses and walking inward from the largest root.
pub fn gauss_hermite_modified(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidParameter {
            name: "quad_order",
            message: "must be positive".into(),
        });
    }
    let q = order;
    let polish = |mut u: f64| -> Result<f64> {
        for _ in 0..100 {
            let h = hermite_functions(u, q);
            let deriv = (2.0 * q as f64).sqrt() * h[q - 1] - u * h[q];
            let step = h[q] / deriv;
            u -= step;
            if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                return Ok(u);
            }
        }
        Err(Error::Eigensolver(format!(
            "Gauss-Hermite Newton iteration stalled near u = {u}"
        )))
    };

    let qf = q as f64;
    let mut upper: Vec<f64> = Vec::with_capacity(q / 2 + 1);
    for i in 0..(q + 1) / 2 {
        let guess = match i {
            0 => (2.0 * qf + 1.0).sqrt() - 1.85575 * (2.0 * qf + 1.0).powf(-1.0 / 6.0),
            1 => upper[0] - 1.14 * qf.powf(0.426) / upper[0],
            2 => 1.86 * upper[1] - 0.86 * upper[0],
            3 => 1.91 * upper[2] - 0.91 * upper[1],
            _ => 2.0 * upper[i - 1] - upper[i - 2],
        };
        upper.push(polish(guess)?);
    }
    // the guesses walk from the largest root towards zero; for odd q the last
    // refined root is the center one at exactly zero
    if q % 2 == 1 {
        let last = upper.last_mut().unwrap();
        *last = 0.0;
    }
    // sanity: roots must be distinct and ordered (descending)
    for w in upper.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Eigensolver(
                "Gauss-Hermite roots collided; initial guesses failed".into(),
            ));
        }
    }
    let mut nodes = vec![0.0_f64; q];
    for (i, &u) in upper.iter().enumerate() {
        nodes[q - 1 - i] = u;
        nodes[i] = -u;
    }
    let modified: Vec<f64> = nodes
        .iter()
        .map(|&u| {
            let h = hermite_functions(u, q - 1);
            1.0 / h.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    Ok((nodes, modified))
}

/// Values of the orthonormal Hermite functions `h_0..=h_max` at `u`,
/// including the Gaussian factor `exp(-u^2/2)`.
///
/// These satisfy `int h_m(u) h_n(u) du = delta_mn` and are generated by the
/// stable three-term recurrence.
pub fn hermite_functions(u: f64, n_max: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n_max + 1);
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp();
    h.push(h0);
    if n_max == 0 {
        return h;
    }
    h.push(std::f64::consts::SQRT_2 * u * h0);
    for n in 1..n_max {
        let np1 = (n + 1) as f64;
        let next = u * (2.0 / np1).sqrt() * h[n] - (n as f64 / np1).sqrt() * h[n - 1];
        h.push(next);
    }
    h
}
