//! Quenched free energy of the zero-dimensional disordered λφ⁴ model.
//!
//! The disorder-averaged free energy `E_μ[ln Z(h)]` is computed from the
//! distributional zeta-function `Φ(s) = E_μ[Z(h)^{−s}]`, whose right
//! derivative at the origin equals `−E[ln Z]`. Splitting the Mellin
//! representation of `Z^{−s}` at `t = a` yields an alternating series in the
//! integer moments `E[Z^k]`, the constant `−(ln a + γ)`, and a remainder
//! `R(a)` that is exponentially small in `a·Z(0)`.
//!
//! Modules:
//! - [`numerics`]: adaptive quadrature, `E₁`/`Ein`, log-gamma, compensated sums
//! - [`model`]: the action and `ln Z(h)`
//! - [`disorder`]: compact-support disorder laws and `E_μ`
//! - [`moments`]: log-domain moments `E[Z^k]` and their growth bound
//! - [`dzeta`]: `Φ(s)`, its split, and the series free energy
//! - [`oracle`]: direct quadrature and Monte Carlo references

pub mod disorder;
pub mod dzeta;
pub mod error;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod oracle;

pub use disorder::DisorderDistribution;
pub use dzeta::{
    annealed_value, cancellation_warning, max_log_partition, phi, phi_real, phi_split,
    quenched_free_energy, remainder, remainder_bound, series_term, FreeEnergyReport, SeriesConfig,
};
pub use error::{Error, Result};
pub use model::{
    action, gaussian_log_partition, log_partition_function, partition_function, ModelParams,
};
pub use moments::{
    moment, moment_bound_constants, moment_table, verify_moment_growth, LogMoment, MomentBound,
    MomentGrowthReport, MomentTable,
};
pub use num_complex::Complex64;
pub use numerics::{QuadratureConfig, QuadratureResult, EULER_GAMMA};
pub use oracle::{quenched_direct, quenched_mc, McConfig, McEstimate};
