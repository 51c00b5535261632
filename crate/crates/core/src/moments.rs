//! Integer moments `E[Z^k]` of the partition function (replica partition
//! functions), held in log-domain, and their geometric growth bound.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::disorder::DisorderDistribution;
use crate::error::{Error, Result};
use crate::model::{log_partition_function, ModelParams};
use crate::numerics::QuadratureConfig;

/// Memoised `h ↦ ln Z(h)` for one parameter set and quadrature config.
///
/// Outer quadratures over `h` for different `k` revisit the same nodes, so
/// caching avoids repeating the inner φ-integral.
#[derive(Debug)]
pub struct LogZCache<'a> {
    params: &'a ModelParams,
    cfg: &'a QuadratureConfig,
    values: RefCell<HashMap<u64, f64>>,
}

impl<'a> LogZCache<'a> {
    pub fn new(params: &'a ModelParams, cfg: &'a QuadratureConfig) -> Self {
        Self {
            params,
            cfg,
            values: RefCell::new(HashMap::new()),
        }
    }

    pub fn cfg(&self) -> &QuadratureConfig {
        self.cfg
    }

    pub fn get(&self, h: f64) -> Result<f64> {
        let key = h.to_bits();
        if let Some(&v) = self.values.borrow().get(&key) {
            return Ok(v);
        }
        let v = log_partition_function(self.params, h, self.cfg)?;
        self.values.borrow_mut().insert(key, v);
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMoment {
    /// `ln E[Z^k]`.
    pub log_value: f64,
    /// Error estimate on `log_value` (relative quadrature error of `E[Z^k]`).
    pub error: f64,
}

/// `ln E_μ[Z(h)^k]`.
///
/// The largest value of `k·ln Z(h)` on the support is factored out before
/// integrating, so the integrand stays in `(0, 1]` whatever `k` is.
pub fn moment(
    params: &ModelParams,
    dist: &DisorderDistribution,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<LogMoment> {
    let cache = LogZCache::new(params, cfg);
    moment_cached(&cache, dist, k)
}

pub(crate) fn moment_cached(
    cache: &LogZCache<'_>,
    dist: &DisorderDistribution,
    k: usize,
) -> Result<LogMoment> {
    if k == 0 {
        return Err(Error::Domain("moment order k must be >= 1".into()));
    }
    let kf = k as f64;
    let mut shift = f64::NEG_INFINITY;
    for h in dist.extreme_points() {
        shift = shift.max(kf * cache.get(h)?);
    }
    let (scaled, err) = dist.try_expect(|h| Ok((kf * cache.get(h)? - shift).exp()), cache.cfg)?;
    if !(scaled > 0.0) {
        return Err(Error::Domain(format!(
            "moment k = {k} underflowed after shift"
        )));
    }
    Ok(LogMoment {
        log_value: shift + scaled.ln(),
        error: err / scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub k_max: usize,
    /// Entry `k − 1` holds `ln E[Z^k]`.
    pub log_moments: Vec<f64>,
    pub error_estimates: Vec<f64>,
}

impl MomentTable {
    /// `ln E[Z^k]` for `1 ≤ k ≤ k_max`.
    pub fn log_moment(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.log_moments.get(i))
            .copied()
    }

    pub fn error(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.error_estimates.get(i))
            .copied()
    }

    /// Second differences `ln E[Z^{k+1}] + ln E[Z^{k−1}] − 2 ln E[Z^k]` for
    /// `k = 2..k_max−1`, paired with their allowed slack. Cauchy–Schwarz
    /// makes every difference non-negative.
    pub fn log_convexity_margins(&self) -> Vec<(usize, f64, f64)> {
        let n = self.log_moments.len();
        let mut out = Vec::new();
        for i in 1..n.saturating_sub(1) {
            let (a, b, c) = (
                self.log_moments[i - 1],
                self.log_moments[i],
                self.log_moments[i + 1],
            );
            let second = a + c - 2.0 * b;
            let err = self.error_estimates[i - 1]
                + 2.0 * self.error_estimates[i]
                + self.error_estimates[i + 1];
            let rounding = 8.0 * f64::EPSILON * (a.abs() + 2.0 * b.abs() + c.abs());
            out.push((i + 1, second, 2.0 * err + rounding));
        }
        out
    }

    pub fn is_log_convex(&self) -> bool {
        self.log_convexity_margins()
            .iter()
            .all(|&(_, second, slack)| second >= -slack)
    }
}

/// Moments `k = 1..=k_max`, assembled in index order.
pub fn moment_table(
    params: &ModelParams,
    dist: &DisorderDistribution,
    k_max: usize,
    cfg: &QuadratureConfig,
) -> Result<MomentTable> {
    let cache = LogZCache::new(params, cfg);
    moment_table_cached(&cache, dist, k_max)
}

pub(crate) fn moment_table_cached(
    cache: &LogZCache<'_>,
    dist: &DisorderDistribution,
    k_max: usize,
) -> Result<MomentTable> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "must be >= 1"));
    }
    let mut log_moments = Vec::with_capacity(k_max);
    let mut error_estimates = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let m = moment_cached(cache, dist, k)?;
        log_moments.push(m.log_value);
        error_estimates.push(m.error);
    }
    Ok(MomentTable {
        k_max,
        log_moments,
        error_estimates,
    })
}

/// Constants of the growth bound `E[Z^k] ≤ α β^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBound {
    pub alpha: f64,
    pub beta: f64,
    /// `C_λ = (3/4)(3!/λ)^{1/3}`.
    pub c_lambda: f64,
    /// β with the Gaussian factor `√(2π/m₀)` instead of `√(2π/m₀²)`, i.e.
    /// taking the quadratic term as `(m₀/2)φ²`. Reported for comparison only.
    pub beta_literal_m0: f64,
}

/// `α = 1`, `β = exp(C_λ r^{4/3}) √(2π/m₀²)`.
///
/// Completing the quartic against the linear source gives
/// `−(λ/4!)τ⁴ + |h|k^{3/4}τ ≤ C_λ k |h|^{4/3}`; what remains of each replica
/// is a Gaussian integral, hence the `√(2π/m₀²)` per power of `k`.
pub fn moment_bound_constants(
    params: &ModelParams,
    dist: &DisorderDistribution,
) -> Result<MomentBound> {
    params.validate()?;
    if params.lambda <= 0.0 {
        return Err(Error::Domain(
            "growth bound constants need lambda > 0 (C_lambda diverges at lambda = 0)".into(),
        ));
    }
    let c_lambda = 0.75 * (6.0 / params.lambda).cbrt();
    let r = dist.support_radius();
    let growth = (c_lambda * r.powf(4.0 / 3.0)).exp();
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(MomentBound {
        alpha: 1.0,
        beta: growth * (two_pi / params.m0_sq).sqrt(),
        c_lambda,
        beta_literal_m0: growth * (two_pi / params.m0_sq.sqrt()).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentGrowthRow {
    pub k: usize,
    pub log_moment: f64,
    pub log_bound: f64,
    /// `ln α + k ln β − ln E[Z^k]`; non-negative when the bound holds.
    pub gap: f64,
    pub error: f64,
    pub passed: bool,
    pub log_bound_literal_m0: f64,
    pub passed_literal_m0: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentGrowthReport {
    pub bound: Option<MomentBound>,
    pub rows: Vec<MomentGrowthRow>,
    /// Set when the check could not run (e.g. `λ = 0`).
    pub failure: Option<String>,
}

impl MomentGrowthReport {
    pub fn all_passed(&self) -> bool {
        self.failure.is_none() && self.rows.iter().all(|r| r.passed)
    }
}

/// Checks `ln E[Z^k] ≤ ln α + k ln β` for `k = 1..=k_max`. Failures,
/// including an inapplicable bound, are carried in the report.
pub fn verify_moment_growth(
    params: &ModelParams,
    dist: &DisorderDistribution,
    k_max: usize,
    cfg: &QuadratureConfig,
) -> MomentGrowthReport {
    let bound = match moment_bound_constants(params, dist) {
        Ok(b) => b,
        Err(e) => {
            return MomentGrowthReport {
                bound: None,
                rows: Vec::new(),
                failure: Some(e.to_string()),
            }
        }
    };
    let table = match moment_table(params, dist, k_max, cfg) {
        Ok(t) => t,
        Err(e) => {
            return MomentGrowthReport {
                bound: Some(bound),
                rows: Vec::new(),
                failure: Some(e.to_string()),
            }
        }
    };
    MomentGrowthReport {
        bound: Some(bound),
        rows: growth_rows(&table, &bound),
        failure: None,
    }
}

pub fn growth_rows(table: &MomentTable, bound: &MomentBound) -> Vec<MomentGrowthRow> {
    let ln_alpha = bound.alpha.ln();
    (1..=table.k_max)
        .map(|k| {
            let kf = k as f64;
            let log_moment = table.log_moments[k - 1];
            let error = table.error_estimates[k - 1];
            let log_bound = ln_alpha + kf * bound.beta.ln();
            let log_bound_literal_m0 = ln_alpha + kf * bound.beta_literal_m0.ln();
            let gap = log_bound - log_moment;
            MomentGrowthRow {
                k,
                log_moment,
                log_bound,
                gap,
                error,
                passed: gap >= -error,
                log_bound_literal_m0,
                passed_literal_m0: log_bound_literal_m0 - log_moment >= -error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

    #[test]
    fn first_moment_of_free_theory_at_origin() {
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let d = DisorderDistribution::delta(0.0).unwrap();
        let m = moment(&params, &d, 1, &cfg()).unwrap();
        assert!((m.log_value - LN_SQRT_2PI).abs() < 1e-10);
    }

    #[test]
    fn second_moment_of_shifted_atom() {
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let d = DisorderDistribution::delta(1.0).unwrap();
        let m = moment(&params, &d, 2, &cfg()).unwrap();
        assert!((m.log_value - 2.0 * (LN_SQRT_2PI + 0.5)).abs() < 1e-10);
    }

    #[test]
    fn degenerate_measure_is_linear_in_k() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let d = DisorderDistribution::delta(0.0).unwrap();
        let t = moment_table(&params, &d, 10, &cfg()).unwrap();
        let lz0 = log_partition_function(&params, 0.0, &cfg()).unwrap();
        for k in 1..=10 {
            assert!((t.log_moment(k).unwrap() - k as f64 * lz0).abs() < 1e-13 * k as f64);
        }
        assert!(t.is_log_convex());
    }

    #[test]
    fn single_entry_table_matches_moment() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let d = DisorderDistribution::uniform(1.0).unwrap();
        let t = moment_table(&params, &d, 1, &cfg()).unwrap();
        let m = moment(&params, &d, 1, &cfg()).unwrap();
        assert_eq!(t.log_moments, vec![m.log_value]);
    }

    #[test]
    fn uniform_free_theory_first_moment() {
        // E[Z] = √(2π) · ∫_0^1 e^{h²/2} dh, the h-integral by its Taylor series Σ 1/(2ⁿ n! (2n+1))
        let mut coeff = 1.0;
        let mut series = 0.0;
        for n in 0..30 {
            if n > 0 {
                coeff /= 2.0 * n as f64;
            }
            series += coeff / (2 * n + 1) as f64;
        }
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let d = DisorderDistribution::uniform(1.0).unwrap();
        let m = moment(&params, &d, 1, &cfg()).unwrap();
        assert!((m.log_value - (LN_SQRT_2PI + series.ln())).abs() < 1e-10);
    }

    #[test]
    fn bound_constants() {
        let d = DisorderDistribution::uniform(1.0).unwrap();
        let b = moment_bound_constants(&ModelParams::new(1.0, 6.0).unwrap(), &d).unwrap();
        assert_eq!(b.alpha, 1.0);
        assert!((b.c_lambda - 0.75).abs() < 1e-15);
        let expected = 0.75f64.exp() * (2.0 * std::f64::consts::PI).sqrt();
        assert!((b.beta - expected).abs() < 1e-13);

        let b4 = moment_bound_constants(&ModelParams::new(4.0, 6.0).unwrap(), &d).unwrap();
        let expected = 0.75f64.exp() * (std::f64::consts::PI / 2.0).sqrt();
        assert!((b4.beta - expected).abs() < 1e-13);
    }

    #[test]
    fn bound_at_zero_radius_is_disorder_free() {
        let d = DisorderDistribution::delta(0.0).unwrap();
        let b = moment_bound_constants(&ModelParams::new(2.0, 1.0).unwrap(), &d).unwrap();
        assert!((b.beta - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bound_requires_positive_coupling() {
        let d = DisorderDistribution::uniform(1.0).unwrap();
        let params = ModelParams::new(1.0, 0.0).unwrap();
        assert!(matches!(
            moment_bound_constants(&params, &d),
            Err(Error::Domain(_))
        ));
        let report = verify_moment_growth(&params, &d, 5, &cfg());
        assert!(report.failure.is_some());
        assert!(!report.all_passed());
    }

    #[test]
    fn growth_gap_for_degenerate_measure() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let d = DisorderDistribution::delta(0.0).unwrap();
        let report = verify_moment_growth(&params, &d, 8, &cfg());
        assert!(report.all_passed());
        let beta = report.bound.unwrap().beta;
        let lz0 = log_partition_function(&params, 0.0, &cfg()).unwrap();
        for row in &report.rows {
            let expected = row.k as f64 * (beta.ln() - lz0);
            assert!((row.gap - expected).abs() < 1e-12 * row.k as f64);
            assert!(row.gap >= 0.0);
        }
    }

    #[test]
    fn zero_order_rejected() {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let d = DisorderDistribution::delta(0.0).unwrap();
        assert!(moment(&params, &d, 0, &cfg()).is_err());
        assert!(moment_table(&params, &d, 0, &cfg()).is_err());
    }
}
