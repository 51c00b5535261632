//! One function per subcommand. Each returns a [`Report`] plus the exit code
//! the process should finish with once the report is written.

use quenched_core::{
    annealed_value, cancellation_warning, gaussian_log_partition, moment_bound_constants,
    moment_table, partition_function, phi, phi_real, phi_split, quenched_direct,
    quenched_free_energy, quenched_mc, remainder, remainder_bound, verify_moment_growth, Complex64,
    Error, SeriesConfig,
};

use crate::config::{Resolved, RunConfig};
use crate::error::CliError;
use crate::report::{format_float as ff, Cell, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            exit_code: EXIT_OK,
        }
    }
}

pub fn free_energy(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = cfg.resolve()?;
    let mut fe = quenched_free_energy(&r.params, &r.dist, &r.series, &r.quadrature)?;
    fe.attach_oracle(quenched_direct(&r.params, &r.dist, &r.quadrature)?);
    let annealed = annealed_value(&r.params, &r.dist, &r.quadrature)?;

    let mut report = Report::new(
        "free-energy",
        cfg.flatten(),
        vec![
            "a",
            "series_partial",
            "k_used",
            "correction",
            "remainder",
            "remainder_bound",
            "total",
            "truncation_bound",
            "tail_monotone",
            "max_abs_term",
            "log_z0",
            "log_z_max",
            "cancellation_warning",
            "oracle_quenched_direct",
            "discrepancy",
            "ln_mean_z",
            "annealed_free_energy",
        ],
    );
    report.single = true;
    report.push_row(vec![
        fe.a.into(),
        fe.series_partial.into(),
        fe.k_used.into(),
        fe.correction.into(),
        fe.remainder_value.into(),
        fe.remainder_bound.into(),
        fe.total.into(),
        fe.truncation_bound.into(),
        fe.tail_monotone.into(),
        fe.max_abs_term.into(),
        fe.log_z0.into(),
        fe.log_z_max.into(),
        fe.cancellation_warning.into(),
        fe.oracle_value.into(),
        fe.discrepancy.into(),
        (-annealed).into(),
        annealed.into(),
    ]);
    Ok(Outcome::ok(report))
}

pub fn moments(cfg: &RunConfig, k_max: usize) -> Result<Outcome, CliError> {
    let r = cfg.resolve()?;
    let table = moment_table(&r.params, &r.dist, k_max, &r.quadrature)?;
    let growth = verify_moment_growth(&r.params, &r.dist, k_max, &r.quadrature);

    let mut report = Report::new(
        "moments",
        cfg.flatten(),
        vec![
            "k",
            "log_moment",
            "error",
            "log_bound",
            "gap",
            "passed",
            "log_bound_literal_m0",
            "passed_literal_m0",
            "log_second_difference",
        ],
    );
    report.meta.push(("k_max", k_max.into()));
    match &growth.bound {
        Some(b) => {
            report.meta.push(("alpha", b.alpha.into()));
            report.meta.push(("beta", b.beta.into()));
            report
                .meta
                .push(("beta_literal_m0", b.beta_literal_m0.into()));
            report.meta.push(("c_lambda", b.c_lambda.into()));
        }
        None => {
            let note = growth.failure.clone().unwrap_or_default();
            report.meta.push(("note", note.into()));
        }
    }
    let second: Vec<(usize, f64)> = table
        .log_convexity_margins()
        .iter()
        .map(|&(k, s, _)| (k, s))
        .collect();
    for k in 1..=k_max {
        let row = growth.rows.get(k - 1);
        let second_k = second.iter().find(|(j, _)| *j == k).map(|&(_, s)| s);
        report.push_row(vec![
            k.into(),
            table.log_moments[k - 1].into(),
            table.error_estimates[k - 1].into(),
            row.map(|g| g.log_bound).into(),
            row.map(|g| g.gap).into(),
            opt_bool(row.map(|g| g.passed)),
            row.map(|g| g.log_bound_literal_m0).into(),
            opt_bool(row.map(|g| g.passed_literal_m0)),
            second_k.into(),
        ]);
    }
    Ok(Outcome::ok(report))
}

fn opt_bool(v: Option<bool>) -> Cell {
    v.map_or(Cell::Maybe(None), Cell::Bool)
}

/// Parses `re` or `re,im`.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Config(format!("cannot parse `{text}` as re[,im]"));
    let mut parts = text.split(',').map(str::trim);
    let re = parts
        .next()
        .ok_or_else(bad)?
        .parse::<f64>()
        .map_err(|_| bad())?;
    let im = match parts.next() {
        Some(p) => p.parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn phi_table(cfg: &RunConfig, points: &[Complex64]) -> Result<Outcome, CliError> {
    let r = cfg.resolve()?;
    let a = r.series.a;
    let mut report = Report::new(
        "phi",
        cfg.flatten(),
        vec![
            "s_re",
            "s_im",
            "phi_re",
            "phi_im",
            "modulus",
            "modulus_bound",
            "phi1",
            "phi2",
            "split_residual",
        ],
    );
    for &s in points {
        let v = phi(s, &r.params, &r.dist, &r.quadrature)?;
        // |Z^{-s}| = Z^{-Re s}
        let bound = if s.re >= 0.0 {
            Some(phi_real(s.re, &r.params, &r.dist, &r.quadrature)?)
        } else {
            None
        };
        let split = if s.im == 0.0 && s.re > 0.0 {
            Some(phi_split(s.re, a, &r.params, &r.dist, &r.quadrature)?)
        } else {
            None
        };
        report.push_row(vec![
            s.re.into(),
            s.im.into(),
            v.re.into(),
            v.im.into(),
            v.norm().into(),
            bound.into(),
            split.map(|p| p.0).into(),
            split.map(|p| p.1).into(),
            split.map(|p| p.0 + p.1 - v.re).into(),
        ]);
    }
    Ok(Outcome::ok(report))
}

pub fn sweep_a(cfg: &RunConfig, a_list: &[f64]) -> Result<Outcome, CliError> {
    let r = cfg.resolve()?;
    if a_list.is_empty() {
        return Err(CliError::Config(
            "sweep-a needs at least one value of a".into(),
        ));
    }
    for &a in a_list {
        SeriesConfig { a, ..r.series }.validate()?;
    }
    let mut report = Report::new(
        "sweep-a",
        cfg.flatten(),
        vec![
            "a",
            "converged",
            "k_used",
            "series_partial",
            "correction",
            "remainder",
            "remainder_bound",
            "total",
            "truncation_bound",
            "cancellation_warning",
            "error",
        ],
    );
    let mut totals = Vec::new();
    let mut exit_code = EXIT_OK;
    for &a in a_list {
        let scfg = SeriesConfig { a, ..r.series };
        match quenched_free_energy(&r.params, &r.dist, &scfg, &r.quadrature) {
            Ok(fe) => {
                totals.push(fe.total);
                report.push_row(vec![
                    a.into(),
                    true.into(),
                    fe.k_used.into(),
                    fe.series_partial.into(),
                    fe.correction.into(),
                    fe.remainder_value.into(),
                    fe.remainder_bound.into(),
                    fe.total.into(),
                    fe.truncation_bound.into(),
                    fe.cancellation_warning.into(),
                    "".into(),
                ]);
            }
            Err(e) if e.is_numerical() => {
                exit_code = EXIT_NUMERICAL;
                let warn = cancellation_warning(a, &r.params, &r.dist, &r.quadrature)?;
                let rem = remainder(a, &r.params, &r.dist, &r.quadrature)?;
                let bound = remainder_bound(a, &r.params, &r.quadrature)?;
                report.push_row(vec![
                    a.into(),
                    false.into(),
                    Cell::Maybe(None),
                    Cell::Maybe(None),
                    Cell::Float(-(a.ln() + quenched_core::EULER_GAMMA)),
                    rem.into(),
                    bound.into(),
                    Cell::Maybe(None),
                    Cell::Maybe(None),
                    warn.into(),
                    e.to_string().into(),
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let spread = if totals.is_empty() {
        None
    } else {
        let lo = totals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    };
    report.meta.push(("n_converged", totals.len().into()));
    report.meta.push(("spread", spread.into()));
    Ok(Outcome { report, exit_code })
}

const REMAINDER_POINTS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const IDENTITY_TOL: f64 = 1e-6;
const GROWTH_K_MAX: usize = 12;
const MC_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn from_margin(margin: f64) -> Self {
        if margin >= 0.0 {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

struct Check {
    name: &'static str,
    status: Status,
    /// Non-negative exactly when the check passes.
    margin: Option<f64>,
    detail: String,
}

impl Check {
    fn margin(name: &'static str, margin: f64, detail: String) -> Self {
        Self {
            name,
            status: Status::from_margin(margin),
            margin: Some(margin),
            detail,
        }
    }

    fn skip(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skip,
            margin: None,
            detail: detail.into(),
        }
    }

    fn failed(name: &'static str, err: &dyn std::fmt::Display) -> Self {
        Self {
            name,
            status: Status::Fail,
            margin: None,
            detail: err.to_string(),
        }
    }
}

const VALIDATE_COLUMNS: [&str; 4] = ["check", "status", "margin", "detail"];

pub fn validate(cfg: &RunConfig) -> Outcome {
    let mut report = Report::new("validate", cfg.flatten(), VALIDATE_COLUMNS.to_vec());
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => {
            report.meta.push(("passed", false.into()));
            report.push_row(vec![
                "config".into(),
                "fail".into(),
                Cell::Maybe(None),
                e.to_string().into(),
            ]);
            return Outcome {
                report,
                exit_code: e.exit_code(),
            };
        }
    };
    let checks = run_checks(&resolved);
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    report.meta.push(("passed", passed.into()));
    for c in checks {
        report.push_row(vec![
            c.name.into(),
            c.status.label().into(),
            c.margin.into(),
            c.detail.into(),
        ]);
    }
    Outcome {
        report,
        exit_code: if passed { EXIT_OK } else { EXIT_NUMERICAL },
    }
}

fn run_checks(r: &Resolved) -> Vec<Check> {
    let mut out = Vec::new();
    let guard = |name: &'static str, f: &dyn Fn() -> Result<Check, Error>| {
        f().unwrap_or_else(|e| Check::failed(name, &e))
    };

    // Z(h) ≥ Z(0) > 0 and Z(−h) = Z(h) on a fixed grid
    out.push(guard("partition_lower_bound", &|| {
        let z0 = partition_function(&r.params, 0.0, &r.quadrature)?;
        let mut worst = f64::INFINITY;
        for i in 1..=40 {
            let h = 0.25 * i as f64;
            let z = partition_function(&r.params, h, &r.quadrature)?;
            worst = worst.min((z - z0) / z0);
        }
        if !(z0 > 0.0) {
            return Ok(Check::margin(
                "partition_lower_bound",
                z0,
                format!("Z(0) = {}", ff(z0)),
            ));
        }
        let margin = worst + r.quadrature.target(z0) / z0;
        Ok(Check::margin(
            "partition_lower_bound",
            margin,
            format!("Z(0) = {}, min (Z(h)-Z(0))/Z(0) = {}", ff(z0), ff(worst)),
        ))
    }));
    out.push(guard("partition_evenness", &|| {
        let mut worst: f64 = 0.0;
        for i in 1..=40 {
            let h = 0.25 * i as f64;
            let zp = partition_function(&r.params, h, &r.quadrature)?;
            let zm = partition_function(&r.params, -h, &r.quadrature)?;
            worst = worst.max((zp - zm).abs() / zp);
        }
        let tol = 10.0 * r.quadrature.rel_tol.max(f64::EPSILON);
        Ok(Check::margin(
            "partition_evenness",
            tol - worst,
            format!("max relative |Z(h)-Z(-h)| = {}", ff(worst)),
        ))
    }));

    out.push(if r.params.lambda > 0.0 {
        let g = verify_moment_growth(&r.params, &r.dist, GROWTH_K_MAX, &r.quadrature);
        match (
            &g.failure,
            g.rows
                .iter()
                .map(|row| row.gap + row.error)
                .reduce(f64::min),
        ) {
            (None, Some(m)) => Check::margin(
                "moment_growth",
                m,
                format!("ln E[Z^k] <= ln alpha + k ln beta for k = 1..{GROWTH_K_MAX}"),
            ),
            (Some(f), _) => Check::failed("moment_growth", f),
            (None, None) => Check::failed("moment_growth", &"no rows"),
        }
    } else {
        let reason = moment_bound_constants(&r.params, &r.dist)
            .err()
            .map(|e| e.to_string());
        Check::skip(
            "moment_growth",
            reason.unwrap_or_else(|| "lambda = 0".into()),
        )
    });

    out.push(guard("log_convexity", &|| {
        let t = moment_table(&r.params, &r.dist, GROWTH_K_MAX, &r.quadrature)?;
        let m = t
            .log_convexity_margins()
            .iter()
            .map(|&(_, second, slack)| second + slack)
            .fold(f64::INFINITY, f64::min);
        Ok(Check::margin(
            "log_convexity",
            m,
            format!("second differences of ln E[Z^k], k <= {GROWTH_K_MAX}"),
        ))
    }));

    out.push(guard("phi_at_zero", &|| {
        let v = phi_real(0.0, &r.params, &r.dist, &r.quadrature)?;
        let tol = 1e-12_f64.max(10.0 * f64::EPSILON);
        Ok(Check::margin(
            "phi_at_zero",
            tol - (v - 1.0).abs(),
            format!("Phi(0) = {}", ff(v)),
        ))
    }));

    for &a in &REMAINDER_POINTS {
        out.push(guard("remainder_bound", &|| {
            let rem = remainder(a, &r.params, &r.dist, &r.quadrature)?;
            let bound = remainder_bound(a, &r.params, &r.quadrature)?;
            Ok(Check::margin(
                "remainder_bound",
                bound - rem.abs(),
                format!("a = {}: |R| = {} <= {}", ff(a), ff(rem.abs()), ff(bound)),
            ))
        }));
    }

    let fe = quenched_free_energy(&r.params, &r.dist, &r.series, &r.quadrature);
    let direct = quenched_direct(&r.params, &r.dist, &r.quadrature);
    out.push(match (&fe, &direct) {
        (Ok(fe), Ok(d)) => {
            let diff = (fe.total - d).abs();
            Check::margin(
                "series_identity",
                IDENTITY_TOL - diff,
                format!("a = {}: |series total - direct| = {}", ff(fe.a), ff(diff)),
            )
        }
        (Err(e), _) | (_, Err(e)) => Check::failed("series_identity", e),
    });

    out.push(guard("jensen", &|| {
        let d = direct.clone()?;
        let ln_mean = -annealed_value(&r.params, &r.dist, &r.quadrature)?;
        let slack = 10.0 * r.quadrature.target(ln_mean.abs());
        Ok(Check::margin(
            "jensen",
            ln_mean - d + slack,
            format!("E[ln Z] = {} <= ln E[Z] = {}", ff(d), ff(ln_mean)),
        ))
    }));

    out.push(if r.params.lambda == 0.0 {
        guard("gaussian_closed_form", &|| {
            let d = direct.clone()?;
            let m0_sq = r.params.m0_sq;
            let exact = r
                .dist
                .expect(|h| gaussian_log_partition(m0_sq, h), &r.quadrature)?;
            let diff = (d - exact).abs();
            let tol = 1e-7_f64.max(100.0 * r.quadrature.target(exact.abs()));
            Ok(Check::margin(
                "gaussian_closed_form",
                tol - diff,
                format!("|E[ln Z] - closed form| = {}", ff(diff)),
            ))
        })
    } else {
        Check::skip("gaussian_closed_form", "lambda > 0")
    });

    out.push(if r.mc.n_samples < 2 {
        Check::skip("monte_carlo", "mc.n_samples < 2")
    } else {
        guard("monte_carlo", &|| {
            let d = direct.clone()?;
            let mc = quenched_mc(&r.params, &r.dist, &r.mc, &r.quadrature)?;
            let dev = (mc.estimate - d).abs();
            let margin = if r.dist.is_degenerate() {
                1e-9 - dev
            } else {
                MC_SIGMAS * mc.std_error - dev
            };
            Ok(Check::margin(
                "monte_carlo",
                margin,
                format!(
                    "mean = {} +/- {} vs direct {}",
                    ff(mc.estimate),
                    ff(mc.std_error),
                    ff(d)
                ),
            ))
        })
    });
    out
}
