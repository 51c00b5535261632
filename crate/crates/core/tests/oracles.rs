//! Cross-checks against closed forms and independent brute-force evaluations.

use quenched_core::numerics::{exp_integral_e1, integrate_semi_infinite, QuadratureConfig};
use quenched_core::{
    annealed_value, partition_function, phi, phi_real, phi_split, quenched_direct,
    quenched_free_energy, quenched_mc, remainder, Complex64, DisorderDistribution, McConfig,
    ModelParams, SeriesConfig,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

/// `K_ν(x) = ∫_0^∞ exp(−x cosh t) cosh(νt) dt`; the trapezoid rule converges
/// geometrically for this integrand.
fn bessel_k(nu: f64, x: f64) -> f64 {
    trapezoid(
        |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh(),
        0.0,
        12.0,
        24_000,
    )
}

#[test]
fn quartic_partition_function_matches_bessel_form() {
    // ∫ exp(−pφ² − qφ⁴) dφ = ½ √(p/q) e^{p²/(8q)} K_{1/4}(p²/(8q)), p = 1/2, q = 1/24
    let (p, q): (f64, f64) = (0.5, 1.0 / 24.0);
    let x = p * p / (8.0 * q);
    let expected = 0.5 * (p / q).sqrt() * x.exp() * bessel_k(0.25, x);
    let z = partition_function(&ModelParams::new(1.0, 1.0).unwrap(), 0.0, &cfg()).unwrap();
    assert!((z - expected).abs() < 1e-10 * expected, "{z} vs {expected}");
}

#[test]
fn partition_function_matches_dense_grid_with_source() {
    let params = ModelParams::new(0.7, 2.0).unwrap();
    for &h in &[-3.0, 0.4, 2.5] {
        let grid = trapezoid(
            |phi: f64| (-(0.35 * phi * phi + phi.powi(4) / 12.0 + h * phi)).exp(),
            -25.0,
            25.0,
            100_000,
        );
        let z = partition_function(&params, h, &cfg()).unwrap();
        assert!(((z - grid) / grid).abs() < 1e-10, "h = {h}");
    }
}

#[test]
fn weak_coupling_approaches_gaussian() {
    let mut prev = f64::INFINITY;
    for &lambda in &[1e-1, 1e-2, 1e-3, 1e-4] {
        let z = partition_function(&ModelParams::new(1.0, lambda).unwrap(), 1.5, &cfg()).unwrap();
        let gauss = (2.0 * std::f64::consts::PI).sqrt() * (1.125f64).exp();
        let dev = (z - gauss).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-3);
}

#[test]
fn annealed_free_theory_uniform() {
    // E[Z] = √(2π) ∫_0^1 e^{h²/2} dh, the latter by a dense trapezoid rule
    let inner = trapezoid(|h: f64| (0.5 * h * h).exp(), 0.0, 1.0, 200_000);
    let expected = -(LN_SQRT_2PI + inner.ln());
    let params = ModelParams::new(1.0, 0.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    assert!((annealed_value(&params, &d, &cfg()).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn annealed_degenerate_and_relabelled() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::delta(0.0).unwrap();
    let z0 = partition_function(&params, 0.0, &cfg()).unwrap();
    assert!((annealed_value(&params, &d, &cfg()).unwrap() + z0.ln()).abs() < 1e-14);

    let a = DisorderDistribution::atoms(vec![(-0.3, 0.2), (1.1, 0.5), (0.4, 0.3)]).unwrap();
    let b = DisorderDistribution::atoms(vec![(0.4, 0.3), (-0.3, 0.2), (1.1, 0.5)]).unwrap();
    let va = annealed_value(&params, &a, &cfg()).unwrap();
    let vb = annealed_value(&params, &b, &cfg()).unwrap();
    assert!((va - vb).abs() < 1e-14);
}

#[test]
fn quenched_direct_invariant_under_reflection() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let a = DisorderDistribution::atoms(vec![(-0.3, 0.2), (1.1, 0.8)]).unwrap();
    let b = DisorderDistribution::atoms(vec![(0.3, 0.2), (-1.1, 0.8)]).unwrap();
    let va = quenched_direct(&params, &a, &cfg()).unwrap();
    let vb = quenched_direct(&params, &b, &cfg()).unwrap();
    assert!((va - vb).abs() < 1e-12);
}

#[test]
fn free_theory_series_reproduces_closed_form() {
    let params = ModelParams::new(1.0, 0.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let scfg = SeriesConfig {
        a: 1.0,
        k_max: 40,
        term_tol: 1e-12,
    };
    let mut rep = quenched_free_energy(&params, &d, &scfg, &cfg()).unwrap();
    assert!((rep.total - (LN_SQRT_2PI + 1.0 / 6.0)).abs() < 1e-7);
    assert!((rep.correction + quenched_core::EULER_GAMMA).abs() < 1e-16);
    assert!(rep.remainder_within_bound(0.0));
    let oracle = quenched_direct(&params, &d, &cfg()).unwrap();
    rep.attach_oracle(oracle);
    assert!(rep.discrepancy.unwrap().abs() < 1e-9);
}

#[test]
fn split_point_independence() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let totals: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&a| {
            quenched_free_energy(&params, &d, &SeriesConfig::with_a(a), &cfg())
                .unwrap()
                .total
        })
        .collect();
    for i in 0..totals.len() {
        for j in 0..i {
            assert!((totals[i] - totals[j]).abs() < 1e-7);
        }
    }
}

#[test]
fn truncation_bound_covers_early_stop() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::truncated_gaussian(0.5, 1.0).unwrap();
    let full = quenched_free_energy(&params, &d, &SeriesConfig::default(), &cfg()).unwrap();
    for &tol in &[1e-3, 1e-5, 1e-8] {
        let early = quenched_free_energy(
            &params,
            &d,
            &SeriesConfig {
                term_tol: tol,
                ..SeriesConfig::default()
            },
            &cfg(),
        )
        .unwrap();
        assert!(early.k_used < full.k_used);
        let gap = (early.series_partial - full.series_partial).abs();
        assert!(
            gap <= early.truncation_bound + 1e-12,
            "tol {tol}: {gap} > {}",
            early.truncation_bound
        );
    }
}

#[test]
fn cancellation_warning_follows_split_point() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let ok = quenched_free_energy(&params, &d, &SeriesConfig::default(), &cfg()).unwrap();
    assert!(!ok.cancellation_warning);
    let warn = quenched_free_energy(
        &params,
        &d,
        &SeriesConfig {
            a: 10.0,
            k_max: 200,
            term_tol: 1e-12,
        },
        &cfg(),
    )
    .unwrap();
    assert!(warn.cancellation_warning);
}

#[test]
fn remainder_matches_double_integral() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let tight = QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        ..cfg()
    };
    let direct = -d
        .expect(
            |h| {
                let z = partition_function(&params, h, &cfg()).unwrap();
                integrate_semi_infinite(|t: f64| (-z * t).exp() / t, 1.0, 1.0, &tight)
                    .unwrap()
                    .value
            },
            &cfg(),
        )
        .unwrap();
    let r = remainder(1.0, &params, &d, &cfg()).unwrap();
    assert!((r - direct).abs() < 1e-8);
    let delta = DisorderDistribution::delta(0.0).unwrap();
    let z0 = partition_function(&params, 0.0, &cfg()).unwrap();
    let r0 = remainder(1.3, &params, &delta, &cfg()).unwrap();
    assert_eq!(r0, -exp_integral_e1(1.3 * z0).unwrap());
}

#[test]
fn phi_split_sums_to_phi() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    for d in [
        DisorderDistribution::uniform(1.0).unwrap(),
        DisorderDistribution::atoms(vec![(-0.5, 0.5), (1.0, 0.5)]).unwrap(),
    ] {
        for &s in &[0.1, 0.5, 1.0, 1.7] {
            let (p1, p2) = phi_split(s, 1.0, &params, &d, &cfg()).unwrap();
            let whole = phi_real(s, &params, &d, &cfg()).unwrap();
            assert!(
                (p1 + p2 - whole).abs() < 1e-8,
                "s = {s}: {} vs {whole}",
                p1 + p2
            );
        }
    }
}

#[test]
fn phi_modulus_bound() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let z0 = partition_function(&params, 0.0, &cfg()).unwrap();
    for s in [
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(2.0, 0.0),
    ] {
        let v = phi(s, &params, &d, &cfg()).unwrap();
        assert!(v.norm() <= z0.powf(-s.re));
    }
}

#[test]
fn monte_carlo_hits_closed_form() {
    let params = ModelParams::new(1.0, 0.0).unwrap();
    let d = DisorderDistribution::uniform(1.0).unwrap();
    let est = quenched_mc(
        &params,
        &d,
        &McConfig {
            n_samples: 100_000,
            seed: 42,
        },
        &cfg(),
    )
    .unwrap();
    let target = LN_SQRT_2PI + 1.0 / 6.0;
    assert!((est.estimate - target).abs() < 3.0 * est.std_error);
}

#[test]
fn monte_carlo_agrees_with_direct_across_parameters() {
    for (m0_sq, lambda, d) in [
        (0.5, 6.0, DisorderDistribution::uniform(2.0).unwrap()),
        (
            2.0,
            0.5,
            DisorderDistribution::truncated_gaussian(0.3, 1.0).unwrap(),
        ),
        (
            1.0,
            1.0,
            DisorderDistribution::atoms(vec![(0.0, 0.5), (1.5, 0.5)]).unwrap(),
        ),
    ] {
        let params = ModelParams::new(m0_sq, lambda).unwrap();
        let mc = quenched_mc(
            &params,
            &d,
            &McConfig {
                n_samples: 10_000,
                seed: 7,
            },
            &cfg(),
        )
        .unwrap();
        let direct = quenched_direct(&params, &d, &cfg()).unwrap();
        assert!((mc.estimate - direct).abs() < 4.0 * mc.std_error);
    }
}
