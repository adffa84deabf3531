// Shared test oracles: adaptive quadrature independent of the Gauss-Hermite
// machinery, and a radial shooting solver independent of the matrix path.

/// Adaptive Simpson integration on `[a, b]`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(f, a, b, simpson(f, a, m, b), tol, 40)
}

/// Adaptive 2D integration over `[-l, l]^2` by nesting adaptive Simpson rules.
pub fn adaptive_integral_2d<F>(f: &F, l: f64, tol: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    adaptive_simpson(
        &|x: f64| adaptive_simpson(&|y: f64| f(x, y), -l, l, tol * 0.1),
        -l,
        l,
        tol,
    )
}

/// Normalized 1D oscillator eigenfunction `phi_n(x)` for `m = omega = 1`.
pub fn oscillator_wavefunction(n: u32, x: f64, hbar: f64) -> f64 {
    let u = x / hbar.sqrt();
    // orthonormal Hermite functions in u, then the Jacobian factor
    let mut h = vec![0.0; (n + 1) as usize];
    h[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp();
    if n >= 1 {
        h[1] = std::f64::consts::SQRT_2 * u * h[0];
    }
    for k in 1..n as usize {
        let kp1 = (k + 1) as f64;
        h[k + 1] = u * (2.0 / kp1).sqrt() * h[k] - (k as f64 / kp1).sqrt() * h[k - 1];
    }
    h[n as usize] / hbar.powf(0.25)
}

/// Ground eigenvalue of the curved oscillator in the `m = 0` radial sector by
/// shooting: integrate the radial equation outward and bisect on the sign of
/// the solution at `r_max`.
///
/// The radial equation for `u(r)` (flat measure, `m = omega = 1`) is
/// `u'' = [ (r^2 - 2E) u / hbar^2 - u' ((2 L^2 - L^4)/r + 6 lambda r L^2)
///          - u (3 lambda + 15 lambda^2 r^2 / 4) ] / L^4`
/// with `L^2 = 1 + lambda r^2`, regular at the origin.
pub fn shoot_ground_energy(lambda: f64, hbar: f64, e_lo: f64, e_hi: f64) -> f64 {
    let tail = |energy: f64| -> f64 {
        let rhs = |r: f64, u: f64, up: f64| -> f64 {
            let cap2 = 1.0 + lambda * r * r;
            let cap4 = cap2 * cap2;
            ((r * r - 2.0 * energy) * u / (hbar * hbar)
                - up * ((2.0 * cap2 - cap4) / r + 6.0 * lambda * r * cap2)
                - u * (3.0 * lambda + 3.75 * lambda * lambda * r * r))
                / cap4
        };
        // series start: u = 1 + a r^2 with a = -(E/hbar^2 + 3 lambda/2)/2
        let a = -(energy / (hbar * hbar) + 1.5 * lambda) / 2.0;
        let r0 = 1e-3;
        let mut r = r0;
        let mut u = 1.0 + a * r0 * r0;
        let mut up = 2.0 * a * r0;
        let dr = 5e-4;
        let r_max = 25.0;
        while r < r_max {
            // classical RK4 on (u, u')
            let k1u = up;
            let k1p = rhs(r, u, up);
            let k2u = up + 0.5 * dr * k1p;
            let k2p = rhs(r + 0.5 * dr, u + 0.5 * dr * k1u, up + 0.5 * dr * k1p);
            let k3u = up + 0.5 * dr * k2p;
            let k3p = rhs(r + 0.5 * dr, u + 0.5 * dr * k2u, up + 0.5 * dr * k2p);
            let k4u = up + dr * k3p;
            let k4p = rhs(r + dr, u + dr * k3u, up + dr * k3p);
            u += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            up += dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += dr;
            // renormalize to avoid overflow in the growing solution
            let scale = u.abs().max(up.abs());
            if scale > 1e12 {
                u /= scale;
                up /= scale;
            }
        }
        u
    };
    let mut lo = e_lo;
    let mut hi = e_hi;
    let f_lo = tail(lo);
    assert!(
        f_lo * tail(hi) < 0.0,
        "shooting bracket does not straddle an eigenvalue"
    );
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) * f_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
