//! Compact-support disorder distributions μ and the expectation `E_μ`.

use std::cell::RefCell;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, integrate_finite, QuadratureConfig};

/// Mass tolerance for atomic distributions.
pub const ATOM_MASS_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DisorderDistribution {
    /// Uniform density `1/(2r)` on `[−r, r]`.
    UniformInterval { radius: f64 },
    /// Density ∝ `exp(−h²/(2σ))` on `[−r, r]`, σ being the variance.
    TruncatedGaussian(TruncatedGaussian),
    /// Point masses `p_i` at `h_i`.
    FiniteAtoms(FiniteAtoms),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedGaussian {
    variance: f64,
    radius: f64,
    #[serde(skip)]
    normalization: f64,
}

impl TruncatedGaussian {
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn weight(&self, h: f64) -> f64 {
        (-h * h / (2.0 * self.variance)).exp()
    }

    /// `∫_{−r}^{r} exp(−h²/(2σ)) dh`, computed once at construction.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteAtoms {
    atoms: Vec<(f64, f64)>,
}

impl FiniteAtoms {
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl DisorderDistribution {
    pub fn uniform(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::UniformInterval { radius })
    }

    pub fn truncated_gaussian(variance: f64, radius: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be > 0, got {variance}"),
            ));
        }
        check_radius(radius)?;
        let mut tg = TruncatedGaussian {
            variance,
            radius,
            normalization: f64::NAN,
        };
        let cfg = QuadratureConfig::with_tolerance(1e-14);
        let norm = integrate_finite(|h| tg.weight(h), -radius, radius, &cfg)?.into_value()?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("normalization {norm} is not positive"),
            ));
        }
        tg.normalization = norm;
        Ok(Self::TruncatedGaussian(tg))
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "at least one atom is required"));
        }
        for &(h, p) in &atoms {
            if !h.is_finite() {
                return Err(Error::invalid(
                    "atoms",
                    format!("atom location {h} is not finite"),
                ));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(
                    "atoms",
                    format!("atom weight {p} must be >= 0"),
                ));
            }
        }
        let mass = compensated_sum(atoms.iter().map(|a| a.1));
        if (mass - 1.0).abs() > ATOM_MASS_TOLERANCE {
            return Err(Error::invalid(
                "atoms",
                format!("weights sum to {mass}, expected 1"),
            ));
        }
        Ok(Self::FiniteAtoms(FiniteAtoms { atoms }))
    }

    /// Point mass at `h`.
    pub fn delta(h: f64) -> Result<Self> {
        Self::atoms(vec![(h, 1.0)])
    }

    /// `r` such that the support lies in `[−r, r]`.
    pub fn support_radius(&self) -> f64 {
        match self {
            Self::UniformInterval { radius } => *radius,
            Self::TruncatedGaussian(tg) => tg.radius,
            Self::FiniteAtoms(fa) => fa.atoms.iter().fold(0.0, |r, a| r.max(a.0.abs())),
        }
    }

    /// True when the measure is a single point mass.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::FiniteAtoms(fa) => {
                let mut support = fa.atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0);
                let first = support.next();
                support.all(|h| Some(h) == first)
            }
            _ => false,
        }
    }

    /// Points where the measure places its largest values of an even,
    /// |h|-increasing function: the support edges, plus the origin.
    pub(crate) fn extreme_points(&self) -> Vec<f64> {
        match self {
            Self::FiniteAtoms(fa) => fa.atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0).collect(),
            _ => {
                let r = self.support_radius();
                vec![-r, 0.0, r]
            }
        }
    }

    /// `E_μ[g(h)]`. Exact weighted sum for atoms, adaptive quadrature over
    /// `[−r, r]` for the continuous families.
    pub fn expect<G>(&self, g: G, cfg: &QuadratureConfig) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        self.expect_with_error(g, cfg).map(|(v, _)| v)
    }

    /// Like [`expect`](Self::expect), also returning the quadrature error
    /// estimate (zero for atoms).
    pub fn expect_with_error<G>(&self, g: G, cfg: &QuadratureConfig) -> Result<(f64, f64)>
    where
        G: Fn(f64) -> f64,
    {
        match self {
            Self::UniformInterval { radius } => {
                let r = integrate_finite(g, -radius, *radius, cfg)?.checked()?;
                let width = 2.0 * radius;
                Ok((r.value / width, r.error_estimate / width))
            }
            Self::TruncatedGaussian(tg) => {
                let r = integrate_finite(|h| g(h) * tg.weight(h), -tg.radius, tg.radius, cfg)?
                    .checked()?;
                Ok((
                    r.value / tg.normalization,
                    r.error_estimate / tg.normalization,
                ))
            }
            Self::FiniteAtoms(fa) => {
                let mut terms = Vec::with_capacity(fa.atoms.len());
                for &(h, p) in &fa.atoms {
                    if p == 0.0 {
                        continue;
                    }
                    let y = g(h);
                    if !y.is_finite() {
                        return Err(Error::Domain(format!(
                            "expectation integrand returned {y} at h = {h}"
                        )));
                    }
                    terms.push(p * y);
                }
                Ok((compensated_sum(terms), 0.0))
            }
        }
    }

    /// [`expect_with_error`](Self::expect_with_error) for an integrand that
    /// can itself fail; the first inner error aborts the expectation.
    pub fn try_expect<G>(&self, g: G, cfg: &QuadratureConfig) -> Result<(f64, f64)>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let wrapped = |h: f64| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match g(h) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        let outcome = self.expect_with_error(wrapped, cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        outcome
    }

    /// Draws one disorder value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::UniformInterval { radius } => rng.random_range(-radius..=*radius),
            Self::TruncatedGaussian(tg) => {
                let sd = tg.variance.sqrt();
                if tg.radius <= 2.0 * sd {
                    // uniform proposal, acceptance ≥ e^{-2}
                    loop {
                        let h = rng.random_range(-tg.radius..=tg.radius);
                        if rng.random::<f64>() < tg.weight(h) {
                            return h;
                        }
                    }
                } else {
                    // untruncated proposal, acceptance ≥ P(|N| ≤ 2) ≈ 0.95
                    loop {
                        let h = sd * rng.sample::<f64, _>(StandardNormal);
                        if h.abs() <= tg.radius {
                            return h;
                        }
                    }
                }
            }
            Self::FiniteAtoms(fa) => {
                let u: f64 = rng.random();
                let mut cumulative = 0.0;
                let mut last = fa.atoms[0].0;
                for &(h, p) in &fa.atoms {
                    if p == 0.0 {
                        continue;
                    }
                    cumulative += p;
                    last = h;
                    if u < cumulative {
                        return h;
                    }
                }
                last
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "radius",
            format!("must be > 0 and finite, got {radius}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn uniform_moments() {
        let d = DisorderDistribution::uniform(1.0).unwrap();
        assert!((d.expect(|_| 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-15);
        assert!((d.expect(|h| h * h, &cfg()).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_atoms() {
        let d = DisorderDistribution::atoms(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(d.expect(|h| h, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn support_radii() {
        assert_eq!(
            DisorderDistribution::uniform(2.0).unwrap().support_radius(),
            2.0
        );
        assert_eq!(
            DisorderDistribution::delta(0.5).unwrap().support_radius(),
            0.5
        );
        assert_eq!(
            DisorderDistribution::truncated_gaussian(1.0, 3.0)
                .unwrap()
                .support_radius(),
            3.0
        );
    }

    #[test]
    fn truncated_gaussian_normalized() {
        for &(v, r) in &[(1.0, 3.0), (0.1, 1.0), (4.0, 0.5), (0.01, 2.0)] {
            let d = DisorderDistribution::truncated_gaussian(v, r).unwrap();
            assert!((d.expect(|_| 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_gaussian_variance_convention() {
        // wide truncation: second moment approaches the variance parameter itself
        let d = DisorderDistribution::truncated_gaussian(0.25, 10.0).unwrap();
        assert!((d.expect(|h| h * h, &cfg()).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn invalid_constructions() {
        assert!(DisorderDistribution::uniform(0.0).is_err());
        assert!(DisorderDistribution::uniform(f64::INFINITY).is_err());
        assert!(DisorderDistribution::truncated_gaussian(-1.0, 1.0).is_err());
        assert!(DisorderDistribution::atoms(vec![]).is_err());
        assert!(DisorderDistribution::atoms(vec![(0.0, 0.6), (1.0, 0.6)]).is_err());
        assert!(DisorderDistribution::atoms(vec![(0.0, -0.5), (1.0, 1.5)]).is_err());
        assert!(DisorderDistribution::atoms(vec![(f64::NAN, 1.0)]).is_err());
        assert!(DisorderDistribution::atoms(vec![(0.1, 0.1); 10]).is_ok());
    }

    #[test]
    fn degenerate_detection() {
        assert!(DisorderDistribution::delta(0.0).unwrap().is_degenerate());
        assert!(DisorderDistribution::atoms(vec![(1.0, 1.0), (2.0, 0.0)])
            .unwrap()
            .is_degenerate());
        assert!(!DisorderDistribution::atoms(vec![(1.0, 0.5), (2.0, 0.5)])
            .unwrap()
            .is_degenerate());
        assert!(!DisorderDistribution::uniform(1.0).unwrap().is_degenerate());
    }

    #[test]
    fn nan_integrand_is_domain_error() {
        let d = DisorderDistribution::delta(0.0).unwrap();
        assert!(matches!(
            d.expect(|_| f64::NAN, &cfg()),
            Err(Error::Domain(_))
        ));
        let u = DisorderDistribution::uniform(1.0).unwrap();
        assert!(matches!(
            u.expect(|_| f64::NAN, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn samples_stay_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dists = [
            DisorderDistribution::uniform(0.3).unwrap(),
            DisorderDistribution::truncated_gaussian(1.0, 0.5).unwrap(),
            DisorderDistribution::truncated_gaussian(0.01, 2.0).unwrap(),
            DisorderDistribution::atoms(vec![(-1.0, 0.2), (0.4, 0.8)]).unwrap(),
        ];
        for d in &dists {
            let r = d.support_radius();
            for _ in 0..2000 {
                assert!(d.sample(&mut rng).abs() <= r);
            }
        }
    }
}
