//! Exact gnomonic-chart geometry of the time-dependent sphere: embedding map,
//! partial derivatives, and the exact vector and scalar potentials induced by
//! the moving surface.
//!
//! Everything here uses the exact curvature `lambda(t) = 1/R(t)^2`, not its
//! first-order expansion; this module is the ground truth the expansion is
//! tested against.

use nalgebra::{Vector2, Vector3};

use crate::background::BackgroundModel;
use crate::{Error, Result};

/// Hemisphere selector for the chart; the sign enters only through the third
/// embedding component and squares away in every implemented observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hemisphere {
    #[default]
    Upper,
    Lower,
}

impl Hemisphere {
    pub fn sign(self) -> f64 {
        match self {
            Hemisphere::Upper => 1.0,
            Hemisphere::Lower => -1.0,
        }
    }
}

/// Point on the tangent-plane chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
    pub hemisphere: Hemisphere,
}

impl ChartPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            hemisphere: Hemisphere::Upper,
        }
    }

    pub fn with_hemisphere(mut self, hemisphere: Hemisphere) -> Self {
        self.hemisphere = hemisphere;
        self
    }

    fn r2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Partial derivatives of the embedding with respect to `x`, `y` and `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryDerivatives {
    pub r_x: Vector3<f64>,
    pub r_y: Vector3<f64>,
    pub r_t: Vector3<f64>,
}

/// Embedding of a chart point on the sphere of curvature `lambda`,
/// `r = (x/L, y/L, s/(sqrt(lambda) L))` with `L = sqrt(1 + lambda r^2)`.
pub fn embed(p: &ChartPoint, lambda: f64) -> Result<Vector3<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            message: format!("embedding requires lambda > 0, got {lambda}"),
        });
    }
    let cap = (1.0 + lambda * p.r2()).sqrt();
    Ok(Vector3::new(
        p.x / cap,
        p.y / cap,
        p.hemisphere.sign() / (lambda.sqrt() * cap),
    ))
}

/// Analytic chart derivatives at time `t` for a fluctuating background.
///
/// `r_t` is taken at fixed `(x, y)`: the embedding depends on time only
/// through `lambda(t)`, so `r_t = (dlambda/dt) * dr/dlambda`.
pub fn geometry_derivatives(
    p: &ChartPoint,
    model: &BackgroundModel,
    t: f64,
) -> GeometryDerivatives {
    let lambda = model.curvature_exact(t);
    let s = p.hemisphere.sign();
    let r2 = p.r2();
    let cap2 = 1.0 + lambda * r2;
    let cap3 = cap2.powf(1.5);
    let (x, y) = (p.x, p.y);

    let r_x = Vector3::new(1.0 + lambda * y * y, -lambda * x * y, -s * lambda.sqrt() * x) / cap3;
    let r_y = Vector3::new(-lambda * x * y, 1.0 + lambda * x * x, -s * lambda.sqrt() * y) / cap3;

    // dlambda/dt = -2 Rdot / R^3
    let radius = model.radius_at(t);
    let lambda_dot = -2.0 * model.radius_rate(t) / radius.powi(3);
    let dr_dlambda = Vector3::new(
        x * r2,
        y * r2,
        s * (1.0 + 2.0 * lambda * r2) / lambda.powf(1.5),
    ) * (-0.5 / cap3);
    let r_t = dr_dlambda * lambda_dot;

    GeometryDerivatives { r_x, r_y, r_t }
}

/// Exact vector potential `A = (r_t . r_x, r_t . r_y)`.
pub fn exact_vector_potential(p: &ChartPoint, model: &BackgroundModel, t: f64) -> Vector2<f64> {
    let d = geometry_derivatives(p, model, t);
    Vector2::new(d.r_t.dot(&d.r_x), d.r_t.dot(&d.r_y))
}

/// Exact scalar potential `phi = -(r_t . r_t)`; non-positive, second order in
/// the fluctuation amplitudes.
pub fn exact_phi(p: &ChartPoint, model: &BackgroundModel, t: f64) -> f64 {
    let d = geometry_derivatives(p, model, t);
    -d.r_t.dot(&d.r_t)
}

/// First-order approximation `A ~ f(t) m(x)` with
/// `m(x) = x / (1 + lambda0 r^2)^2`; used to quantify the expansion error.
pub fn first_order_vector_potential(
    p: &ChartPoint,
    model: &BackgroundModel,
    t: f64,
) -> Vector2<f64> {
    let f = model.vector_potential_amplitude(t);
    let denom = (1.0 + model.lambda0() * p.r2()).powi(2);
    Vector2::new(f * p.x / denom, f * p.y / denom)
}
