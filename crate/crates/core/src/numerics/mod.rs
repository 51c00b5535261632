//! Quadrature, special functions and compensated summation.

pub mod quadrature;
pub mod special;
pub mod summation;

pub use quadrature::{
    integrate_finite, integrate_real_line, integrate_real_line_scaled, integrate_semi_infinite,
    QuadratureConfig, QuadratureResult,
};
pub use special::{ein_series, exp_integral_e1, gamma, ln_gamma, EULER_GAMMA};
pub use summation::{compensated_sum, CompensatedSum};
