//! The distributional zeta-function `Φ(s) = E_μ[Z(h)^{−s}]` and the
//! moment-series representation of the quenched free energy.
//!
//! For compactly supported μ and any split point `a > 0`,
//!
//! ```text
//! E[ln Z] = Σ_{k≥1} (−1)^{k+1} a^k E[Z^k] / (k!·k)  −  (ln a + γ)  +  R(a),
//! R(a)    = −E[∫_a^∞ (dt/t) e^{−Z(h)t}] = −E[E₁(a·Z(h))],
//! |R(a)|  ≤ e^{−Z(0)a} / (Z(0)a).
//! ```
//!
//! The series and the `−(ln a + γ)` term come from the `[0, a]` part of the
//! Mellin representation `Z^{−s} = Γ(s)^{−1} ∫_0^∞ t^{s−1} e^{−Zt} dt`
//! (`Φ₁`), the remainder from the `[a, ∞)` part (`Φ₂`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::moments::{moment_cached, LogZCache};
use crate::numerics::{
    exp_integral_e1, integrate_finite, integrate_semi_infinite, ln_gamma, CompensatedSum,
    QuadratureConfig, EULER_GAMMA,
};

/// Above this value of `a·max_h Z(h)` the alternating series cancels away
/// more digits than compensated summation can recover.
pub const CANCELLATION_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Split point of the Mellin integral, `a > 0`.
    pub a: f64,
    pub k_max: usize,
    pub term_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            k_max: 60,
            term_tol: 1e-12,
        }
    }
}

impl SeriesConfig {
    pub fn with_a(a: f64) -> Self {
        Self {
            a,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_split_point(self.a)?;
        if self.k_max < 1 {
            return Err(Error::invalid("k_max", "must be >= 1"));
        }
        if !(self.term_tol > 0.0 && self.term_tol.is_finite()) {
            return Err(Error::invalid(
                "term_tol",
                format!("must be > 0, got {}", self.term_tol),
            ));
        }
        Ok(())
    }
}

fn check_split_point(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "a",
            format!("split point must be > 0 and finite, got {a}"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyReport {
    pub a: f64,
    /// `Σ_{k=1}^{k_used} (−1)^{k+1} a^k E[Z^k] / (k!·k)`.
    pub series_partial: f64,
    pub k_used: usize,
    /// `−(ln a + γ)`.
    pub correction: f64,
    /// `R(a)`, evaluated numerically.
    pub remainder_value: f64,
    /// `e^{−Z(0)a} / (Z(0)a)`.
    pub remainder_bound: f64,
    /// Quenched free energy `E[ln Z]`.
    pub total: f64,
    /// Bound on the omitted series tail, from `E[Z^{k+1}] ≤ max Z · E[Z^k]`.
    pub truncation_bound: f64,
    /// Whether term magnitudes decreased monotonically from their peak to `k_used`.
    pub tail_monotone: bool,
    pub max_abs_term: f64,
    pub log_z0: f64,
    pub log_z_max: f64,
    /// `a·max_h Z(h)` exceeded [`CANCELLATION_THRESHOLD`].
    pub cancellation_warning: bool,
    pub oracle_value: Option<f64>,
    pub discrepancy: Option<f64>,
}

impl FreeEnergyReport {
    /// Records an independent value of `E[ln Z]` and the difference `total − oracle`.
    pub fn attach_oracle(&mut self, oracle: f64) {
        self.oracle_value = Some(oracle);
        self.discrepancy = Some(self.total - oracle);
    }

    pub fn remainder_within_bound(&self, slack: f64) -> bool {
        self.remainder_value.abs() <= self.remainder_bound + slack
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `(−1)^{k+1} a^k E[Z^k] / (k!·k)` from `ln E[Z^k]`.
pub fn series_term(k: usize, a: f64, log_moment_k: f64) -> Result<f64> {
    series_term_with(k, a, log_moment_k, ln_factorial(k))
}

fn series_term_with(k: usize, a: f64, log_moment_k: f64, ln_k_factorial: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("series index starts at k = 1".into()));
    }
    check_split_point(a)?;
    let kf = k as f64;
    let magnitude = (kf * a.ln() + log_moment_k - ln_k_factorial - kf.ln()).exp();
    if !magnitude.is_finite() {
        return Err(Error::SeriesDivergence {
            k_max: k,
            last_term: magnitude,
        });
    }
    Ok(if k % 2 == 1 { magnitude } else { -magnitude })
}

/// Largest `ln Z(h)` over the support of μ.
pub fn max_log_partition(
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let cache = LogZCache::new(params, cfg);
    max_log_partition_cached(&cache, dist)
}

fn max_log_partition_cached(cache: &LogZCache<'_>, dist: &DisorderDistribution) -> Result<f64> {
    let mut best = cache.get(0.0)?;
    for h in dist.extreme_points() {
        best = best.max(cache.get(h)?);
    }
    Ok(best)
}

/// True when `a·max_h Z(h)` exceeds [`CANCELLATION_THRESHOLD`].
pub fn cancellation_warning(
    a: f64,
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<bool> {
    check_split_point(a)?;
    Ok(a * max_log_partition(params, dist, cfg)?.exp() > CANCELLATION_THRESHOLD)
}

/// `R(a) = −E_μ[E₁(a·Z(h))]`.
pub fn remainder(
    a: f64,
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let cache = LogZCache::new(params, cfg);
    remainder_cached(&cache, a, dist).map(|(v, _)| v)
}

fn remainder_cached(
    cache: &LogZCache<'_>,
    a: f64,
    dist: &DisorderDistribution,
) -> Result<(f64, f64)> {
    check_split_point(a)?;
    let (v, err) = dist.try_expect(|h| exp_integral_e1(a * cache.get(h)?.exp()), cache.cfg())?;
    Ok((-v, err))
}

/// `e^{−Z(0)a} / (Z(0)a)`.
pub fn remainder_bound(a: f64, params: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    check_split_point(a)?;
    let z0 = crate::model::partition_function(params, 0.0, cfg)?;
    Ok(bound_from_z0(a, z0))
}

fn bound_from_z0(a: f64, z0: f64) -> f64 {
    let x = z0 * a;
    (-x).exp() / x
}

/// Quenched free energy `E[ln Z]` from the moment series, correction and remainder.
///
/// Terms are added in ascending `k` through compensated summation. The series
/// stops at the first `k` whose term is below `term_tol` and smaller than its
/// predecessor; running out of terms first is reported as
/// [`Error::SeriesDivergence`], which usually means `a` is too large.
pub fn quenched_free_energy(
    params: &ModelParams,
    dist: &DisorderDistribution,
    scfg: &SeriesConfig,
    cfg: &QuadratureConfig,
) -> Result<FreeEnergyReport> {
    params.validate()?;
    scfg.validate()?;
    cfg.validate()?;
    let cache = LogZCache::new(params, cfg);
    let a = scfg.a;

    let log_z0 = cache.get(0.0)?;
    let log_z_max = max_log_partition_cached(&cache, dist)?;

    let mut sum = CompensatedSum::new();
    let mut ln_k_factorial = 0.0;
    let mut magnitudes: Vec<f64> = Vec::with_capacity(scfg.k_max);
    let mut k_used = None;
    for k in 1..=scfg.k_max {
        ln_k_factorial += (k as f64).ln();
        let log_moment = moment_cached(&cache, dist, k)?.log_value;
        let term = series_term_with(k, a, log_moment, ln_k_factorial)?;
        sum.add(term);
        let magnitude = term.abs();
        let decreasing = magnitudes.last().is_none_or(|&prev| magnitude < prev);
        magnitudes.push(magnitude);
        if magnitude < scfg.term_tol && decreasing {
            k_used = Some(k);
            break;
        }
    }
    let Some(k_used) = k_used else {
        return Err(Error::SeriesDivergence {
            k_max: scfg.k_max,
            last_term: magnitudes.last().copied().unwrap_or(f64::NAN),
        });
    };

    let peak =
        magnitudes.iter().enumerate().fold(
            (0, 0.0f64),
            |best, (i, &m)| if m > best.1 { (i, m) } else { best },
        );
    let tail_monotone = magnitudes[peak.0..].windows(2).all(|w| w[1] <= w[0]);
    let ratio = a * log_z_max.exp() / (k_used as f64 + 1.0);
    let last = magnitudes[k_used - 1];
    let truncation_bound = if ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };

    let series_partial = sum.value();
    let correction = -(a.ln() + EULER_GAMMA);
    let (remainder_value, _) = remainder_cached(&cache, a, dist)?;
    let total = [series_partial, correction, remainder_value]
        .into_iter()
        .collect::<CompensatedSum>()
        .value();

    Ok(FreeEnergyReport {
        a,
        series_partial,
        k_used,
        correction,
        remainder_value,
        remainder_bound: bound_from_z0(a, log_z0.exp()),
        total,
        truncation_bound,
        tail_monotone,
        max_abs_term: peak.1,
        log_z0,
        log_z_max,
        cancellation_warning: a * log_z_max.exp() > CANCELLATION_THRESHOLD,
        oracle_value: None,
        discrepancy: None,
    })
}

/// `Φ(s) = E_μ[Z(h)^{−s}]` for `Re(s) ≥ 0`.
///
/// `s = −1` is also accepted and returns `E[Z]` through the first moment; any
/// other point with `Re(s) < 0` is a domain error.
pub fn phi(
    s: Complex64,
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    params.validate()?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!("s = {s} is not finite")));
    }
    let cache = LogZCache::new(params, cfg);
    if s.re < 0.0 {
        if s == Complex64::new(-1.0, 0.0) {
            let m = moment_cached(&cache, dist, 1)?;
            return Ok(Complex64::new(m.log_value.exp(), 0.0));
        }
        return Err(Error::Domain(format!(
            "Phi(s) is only evaluated for Re(s) >= 0 (and s = -1), got s = {s}"
        )));
    }
    let re = dist
        .try_expect(
            |h| {
                let lz = cache.get(h)?;
                Ok((-s.re * lz).exp() * (s.im * lz).cos())
            },
            cfg,
        )?
        .0;
    let im = if s.im == 0.0 {
        0.0
    } else {
        dist.try_expect(
            |h| {
                let lz = cache.get(h)?;
                Ok(-(-s.re * lz).exp() * (s.im * lz).sin())
            },
            cfg,
        )?
        .0
    };
    Ok(Complex64::new(re, im))
}

/// `Φ(s)` on the real axis.
pub fn phi_real(
    s: f64,
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    phi(Complex64::new(s, 0.0), params, dist, cfg).map(|z| z.re)
}

/// Annealed free energy as `−ln Φ(−1) = −ln E[Z]`.
pub fn annealed_value(
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    params.validate()?;
    let cache = LogZCache::new(params, cfg);
    Ok(-moment_cached(&cache, dist, 1)?.log_value)
}

/// The two halves of the Mellin representation of `Φ(s)` for real `s > 0`:
///
/// ```text
/// Φ₁(s; a) = Γ(s)^{−1} E[∫_0^a t^{s−1} e^{−Z t} dt]
/// Φ₂(s; a) = Γ(s)^{−1} E[∫_a^∞ t^{s−1} e^{−Z t} dt]
/// ```
pub fn phi_split(
    s: f64,
    a: f64,
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    params.validate()?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!(
            "phi_split needs real s > 0, got {s}"
        )));
    }
    check_split_point(a)?;
    let cache = LogZCache::new(params, cfg);
    // 1/Γ(s) = s/Γ(s+1) stays accurate as s → 0
    let inv_gamma_s1 = (-ln_gamma(s + 1.0)).exp();

    let lower = |z: f64| -> Result<f64> {
        // s·∫_0^a t^{s−1}e^{−zt} dt, with t = u^{1/s} removing the endpoint singularity for s < 1
        if s < 1.0 {
            integrate_finite(|u: f64| (-z * u.powf(1.0 / s)).exp(), 0.0, a.powf(s), cfg)?
                .into_value()
        } else {
            let v = integrate_finite(|t: f64| t.powf(s - 1.0) * (-z * t).exp(), 0.0, a, cfg)?
                .into_value()?;
            Ok(s * v)
        }
    };
    let upper = |z: f64| -> Result<f64> {
        let v =
            integrate_semi_infinite(|t: f64| t.powf(s - 1.0) * (-z * t).exp(), a, 1.0 / z, cfg)?
                .into_value()?;
        Ok(s * v)
    };

    let phi1 = dist.try_expect(|h| lower(cache.get(h)?.exp()), cfg)?.0 * inv_gamma_s1;
    let phi2 = dist.try_expect(|h| upper(cache.get(h)?.exp()), cfg)?.0 * inv_gamma_s1;
    Ok((phi1, phi2))
}
