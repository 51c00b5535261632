//! The zero-dimensional λφ⁴ action and its partition function.
//!
//! With a source `h` coupled linearly to the field,
//!
//! ```text
//! S(h, φ) = ½ m₀² φ² + (λ/4!) φ⁴ + h φ,     Z(h) = ∫ dφ exp(−S(h, φ))
//! ```
//!
//! and the disorder-dependent free energy is `F(h) = ln Z(h)` (sign as
//! written, without the conventional minus).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_real_line_scaled, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bare mass squared, `m₀² > 0`.
    pub m0_sq: f64,
    /// Quartic coupling, `λ ≥ 0`.
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(m0_sq: f64, lambda: f64) -> Result<Self> {
        let p = Self { m0_sq, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m0_sq > 0.0 && self.m0_sq.is_finite()) {
            return Err(Error::invalid(
                "m0_sq",
                format!("must be > 0, got {}", self.m0_sq),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be >= 0, got {}", self.lambda),
            ));
        }
        Ok(())
    }

    /// Derivative of the action in φ.
    fn gradient(&self, phi: f64, h: f64) -> f64 {
        self.m0_sq * phi + self.lambda / 6.0 * phi.powi(3) + h
    }

    fn curvature(&self, phi: f64) -> f64 {
        self.m0_sq + 0.5 * self.lambda * phi * phi
    }

    /// Unique minimiser of `S(h, ·)`.
    ///
    /// The gradient is strictly increasing, and its root lies between 0 and
    /// `−h/m₀²`; Newton steps that leave the bracket fall back to bisection.
    pub fn action_minimizer(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        let edge = -h / self.m0_sq;
        let (mut lo, mut hi) = if edge < 0.0 { (edge, 0.0) } else { (0.0, edge) };
        let mut phi = if self.lambda == 0.0 {
            edge
        } else {
            // quartic-dominated guess when |h| is large
            let cubic = -(6.0 * h / self.lambda).cbrt();
            if cubic.abs() < edge.abs() {
                cubic
            } else {
                edge
            }
        };
        for _ in 0..200 {
            let g = self.gradient(phi, h);
            if g == 0.0 {
                return phi;
            }
            if g > 0.0 {
                hi = phi;
            } else {
                lo = phi;
            }
            let newton = phi - g / self.curvature(phi);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == phi || (hi - lo) <= 4.0 * f64::EPSILON * phi.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            phi = next;
        }
        phi
    }
}

/// `S(h, φ) = ½ m₀² φ² + (λ/4!) φ⁴ + h φ`.
pub fn action(params: &ModelParams, phi: f64, h: f64) -> f64 {
    0.5 * params.m0_sq * phi * phi + params.lambda / 24.0 * phi.powi(4) + h * phi
}

/// `ln Z(h)`, the disorder-dependent free energy `F(h)`.
///
/// The integrand is expanded about the action minimiser φ*:
/// `ln Z = −S(φ*) + ln ∫ du exp(−[S(φ*+u) − S(φ*)])`, with the bracket written
/// as an exact polynomial in `u` so that large `|h|` neither overflows nor
/// loses digits to cancellation.
pub fn log_partition_function(params: &ModelParams, h: f64, cfg: &QuadratureConfig) -> Result<f64> {
    params.validate()?;
    if !h.is_finite() {
        return Err(Error::Domain(format!(
            "disorder value must be finite, got {h}"
        )));
    }
    let phi_star = params.action_minimizer(h);
    let lambda = params.lambda;
    let c1 = params.gradient(phi_star, h);
    let c2 = 0.5 * params.curvature(phi_star);
    let c3 = lambda * phi_star / 6.0;
    let c4 = lambda / 24.0;
    let shifted = |u: f64| (-(u * (c1 + u * (c2 + u * (c3 + u * c4))))).exp();
    let scale = 1.0 / (2.0 * c2).sqrt();
    let integral = integrate_real_line_scaled(shifted, 0.0, scale, cfg)?.into_value()?;
    Ok(-action(params, phi_star, h) + integral.ln())
}

/// `Z(h) = ∫ dφ exp(−S(h, φ))`. Overflows to `+∞` for very large `|h|`;
/// prefer [`log_partition_function`] there.
pub fn partition_function(params: &ModelParams, h: f64, cfg: &QuadratureConfig) -> Result<f64> {
    log_partition_function(params, h, cfg).map(f64::exp)
}

/// Closed form `√(2π/m₀²)·exp(h²/(2m₀²))` of the free (λ = 0) partition function.
pub fn gaussian_log_partition(m0_sq: f64, h: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI / m0_sq).ln() + h * h / (2.0 * m0_sq)
}
