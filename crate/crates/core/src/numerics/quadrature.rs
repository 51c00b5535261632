//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals,
//! plus window-expanding wrappers for the real line and half-lines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::summation::CompensatedSum;
use crate::error::{Error, Result};

/// Tolerances and truncation policy shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Ratio to the observed peak below which an unbounded integrand is
    /// treated as negligible.
    pub decay_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            decay_cutoff: 1e-18,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(
                "abs_tol",
                format!("must be > 0, got {}", self.abs_tol),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid(
                "rel_tol",
                format!("must be > 0, got {}", self.rel_tol),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions", "must be >= 1"));
        }
        if !(self.decay_cutoff > 0.0 && self.decay_cutoff < 1.0) {
            return Err(Error::invalid(
                "decay_cutoff",
                format!("must lie in (0, 1), got {}", self.decay_cutoff),
            ));
        }
        Ok(())
    }

    /// Error target for an integral of magnitude `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    // Targets below the rounding floor of the rule itself cannot be met.
    fn effective_target(&self, value: f64, abs_mass: f64) -> f64 {
        self.target(value).max(ROUNDOFF_FLOOR * abs_mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// Returns the value, or `NotConverged` if the error target was missed.
    pub fn into_value(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                error: self.error_estimate,
                subdivisions: self.subdivisions_used,
            })
        }
    }

    pub fn checked(self) -> Result<Self> {
        self.into_value().map(|_| self)
    }
}

// Kronrod abscissae; odd indices are the 7-point Gauss nodes. Last entry is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties broken on position so the refinement order is deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn finite_or_domain(y: f64, x: f64) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Domain(format!("integrand returned {y} at x = {x}")))
    }
}

fn gauss_kronrod_15<F>(f: &F, lo: f64, hi: f64) -> Result<Panel>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = finite_or_domain(f(center), center)?;

    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let (xl, xr) = (center - dx, center + dx);
        let f1 = finite_or_domain(f(xl), xl)?;
        let f2 = finite_or_domain(f(xr), xr)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();

    // QUADPACK error rescaling
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }

    Ok(Panel {
        lo,
        hi,
        value,
        error,
        resabs,
    })
}

/// Integrates `f` over `[lo, hi]` by globally adaptive bisection.
///
/// The panel with the largest error estimate is split until the summed
/// estimate meets `max(abs_tol, rel_tol * |value|)` or the subdivision budget
/// runs out, in which case the result comes back with `converged == false`.
/// A non-finite integrand value is a domain error. Targets tighter than the
/// rule's rounding floor (`100 ε ∫|f|`) are raised to that floor.
pub fn integrate_finite<F>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }

    let first = gauss_kronrod_15(&f, lo, hi)?;
    let mut heap = BinaryHeap::with_capacity(cfg.max_subdivisions + 1);
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut total_abs = first.resabs;
    heap.push(first);

    let mut converged = total_error <= cfg.effective_target(total_value, total_abs);
    while !converged && heap.len() < cfg.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            // interval is at floating-point resolution; no further progress possible
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_15(&f, worst.lo, mid)?;
        let right = gauss_kronrod_15(&f, mid, worst.hi)?;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);

        if total_error <= cfg.effective_target(total_value, total_abs) {
            // re-sum from scratch to rule out drift in the running totals
            let (v, e, m) = resum(&heap);
            total_value = v;
            total_error = e;
            total_abs = m;
            converged = total_error <= cfg.effective_target(total_value, total_abs);
        }
    }

    let (value, error_estimate, abs_mass) = resum(&heap);
    Ok(QuadratureResult {
        value,
        error_estimate,
        subdivisions_used: heap.len(),
        converged: error_estimate <= cfg.effective_target(value, abs_mass),
    })
}

fn resum(heap: &BinaryHeap<Panel>) -> (f64, f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value: CompensatedSum = panels.iter().map(|p| p.value).collect();
    let error: CompensatedSum = panels.iter().map(|p| p.error).collect();
    let abs_mass: CompensatedSum = panels.iter().map(|p| p.resabs).collect();
    (value.value(), error.value(), abs_mass.value())
}

const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

const MAX_WINDOW_DOUBLINGS: u32 = 60;

/// Integrates `f` over the whole real line, assuming it decays away from `center`.
pub fn integrate_real_line<F>(f: F, center: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_real_line_scaled(f, center, 1.0, cfg)
}

/// Like [`integrate_real_line`], with the first window half-width set to `scale`.
///
/// The symmetric window about `center` doubles until the integrand at both
/// edges falls below `decay_cutoff` times the largest magnitude seen so far.
pub fn integrate_real_line_scaled<F>(
    f: F,
    center: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    check_window(center, scale)?;
    let mut peak = finite_or_domain(f(center), center)?.abs();
    let mut width = scale;
    for _ in 0..MAX_WINDOW_DOUBLINGS {
        let (xl, xr) = (center - width, center + width);
        let fl = finite_or_domain(f(xl), xl)?.abs();
        let fr = finite_or_domain(f(xr), xr)?.abs();
        peak = peak.max(fl).max(fr);
        if peak > 0.0 && fl.max(fr) <= cfg.decay_cutoff * peak {
            return integrate_finite(f, xl, xr, cfg);
        }
        width *= 2.0;
    }
    Err(Error::Domain(format!(
        "integrand does not decay within {} of x = {center}",
        width
    )))
}

/// Integrates `f` over `[lo, ∞)`, assuming it decays to the right.
pub fn integrate_semi_infinite<F>(
    f: F,
    lo: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    check_window(lo, scale)?;
    let mut peak = finite_or_domain(f(lo), lo)?.abs();
    let mut width = scale;
    for _ in 0..MAX_WINDOW_DOUBLINGS {
        let hi = lo + width;
        let fh = finite_or_domain(f(hi), hi)?.abs();
        let fm = finite_or_domain(f(lo + 0.5 * width), lo + 0.5 * width)?.abs();
        peak = peak.max(fh).max(fm);
        if peak > 0.0 && fh <= cfg.decay_cutoff * peak {
            return integrate_finite(f, lo, hi, cfg);
        }
        width *= 2.0;
    }
    Err(Error::Domain(format!(
        "integrand does not decay within {} of x = {lo}",
        width
    )))
}

fn check_window(anchor: f64, scale: f64) -> Result<()> {
    if !anchor.is_finite() {
        return Err(Error::Domain(format!("non-finite anchor {anchor}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "window scale must be positive, got {scale}"
        )));
    }
    Ok(())
}
