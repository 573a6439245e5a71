use rand::Rng;

use crate::error::{Error, Result};

use super::piecewise::{Curve, PiecewiseCdf, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum ArmFamily {
    Uniform { low: f64, high: f64 },
    /// Tail `a * eps^beta` for `eps < width` below `mu_star`; the remaining
    /// mass `1 - a * width^beta` sits as an atom at `mu_star - width`.
    PowerTail { mu_star: f64, a: f64, beta: f64, width: f64 },
    Piecewise(PiecewiseCdf),
}

/// Reward distribution of a single arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    family: ArmFamily,
}

impl ArmModel {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && high > low) {
            return Err(Error::InvalidDistribution(format!("uniform needs low < high, got [{low}, {high}]")));
        }
        Ok(ArmModel { family: ArmFamily::Uniform { low, high } })
    }

    pub fn power_tail(mu_star: f64, a: f64, beta: f64, width: f64) -> Result<Self> {
        let ok = mu_star.is_finite()
            && a.is_finite()
            && a > 0.0
            && beta.is_finite()
            && beta > 0.0
            && width.is_finite()
            && width > 0.0;
        if !ok {
            return Err(Error::InvalidDistribution(format!(
                "power-tail parameters must be finite and positive (A={a}, beta={beta}, width={width})"
            )));
        }
        let mass = a * width.powf(beta);
        if mass > 1.0 + 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "power-tail mass A*width^beta = {mass} exceeds 1"
            )));
        }
        Ok(ArmModel { family: ArmFamily::PowerTail { mu_star, a, beta, width } })
    }

    pub fn piecewise(cdf: PiecewiseCdf) -> Self {
        ArmModel { family: ArmFamily::Piecewise(cdf) }
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        Ok(ArmModel::piecewise(PiecewiseCdf::point_mass(v)?))
    }

    pub fn family(&self) -> &ArmFamily {
        &self.family
    }

    /// Maximal possible reward (essential supremum).
    pub fn mu_star(&self) -> f64 {
        match &self.family {
            ArmFamily::Uniform { high, .. } => *high,
            ArmFamily::PowerTail { mu_star, .. } => *mu_star,
            ArmFamily::Piecewise(cdf) => cdf.sup(),
        }
    }

    pub fn cdf(&self, mu: f64) -> f64 {
        match &self.family {
            ArmFamily::Uniform { low, high } => ((mu - low) / (high - low)).clamp(0.0, 1.0),
            &ArmFamily::PowerTail { mu_star, a, beta, width } => {
                if mu >= mu_star {
                    1.0
                } else if mu < mu_star - width {
                    0.0
                } else {
                    (1.0 - a * (mu_star - mu).powf(beta)).max(0.0)
                }
            }
            ArmFamily::Piecewise(cdf) => cdf.eval(mu),
        }
    }

    /// `F(mu-)`.
    pub fn cdf_left(&self, mu: f64) -> f64 {
        match &self.family {
            ArmFamily::Uniform { .. } => self.cdf(mu),
            &ArmFamily::PowerTail { mu_star, width, .. } => {
                if mu <= mu_star - width {
                    0.0
                } else {
                    self.cdf(mu)
                }
            }
            ArmFamily::Piecewise(cdf) => cdf.left_limit(mu),
        }
    }

    /// Tail function `1 - F((mu_star - eps)-)`: the probability of landing
    /// within `eps` of the arm's maximum, counting an atom at `mu_star - eps`.
    pub fn tail(&self, eps: f64) -> f64 {
        match &self.family {
            ArmFamily::Uniform { low, high } => (eps / (high - low)).clamp(0.0, 1.0),
            &ArmFamily::PowerTail { a, beta, width, .. } => {
                if eps <= 0.0 {
                    0.0
                } else if eps >= width {
                    1.0
                } else {
                    (a * eps.powf(beta)).min(1.0)
                }
            }
            ArmFamily::Piecewise(cdf) => 1.0 - cdf.left_limit(cdf.sup() - eps),
        }
    }

    /// Inverse-CDF transform of one uniform variate.
    pub fn quantile(&self, u: f64) -> f64 {
        match &self.family {
            ArmFamily::Uniform { low, high } => low + u.clamp(0.0, 1.0) * (high - low),
            &ArmFamily::PowerTail { mu_star, a, beta, width } => {
                let atom = 1.0 - a * width.powf(beta);
                if u <= atom {
                    mu_star - width
                } else {
                    mu_star - ((1.0 - u) / a).powf(1.0 / beta).min(width)
                }
            }
            ArmFamily::Piecewise(cdf) => cdf.quantile(u),
        }
    }

    /// Draws one reward, consuming exactly one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// `sup{mu <= mu_star : F(mu) <= p}`.
    pub fn sup_at_most(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return self.mu_star();
        }
        match &self.family {
            ArmFamily::Uniform { low, high } => low + p.max(0.0) * (high - low),
            &ArmFamily::PowerTail { mu_star, a, beta, width } => {
                let atom = 1.0 - a * width.powf(beta);
                if p < atom {
                    mu_star - width
                } else {
                    mu_star - ((1.0 - p) / a).powf(1.0 / beta).min(width)
                }
            }
            ArmFamily::Piecewise(cdf) => cdf.sup_at_most(p),
        }
    }

    /// The same distribution in the generic piecewise representation.
    pub fn to_piecewise(&self) -> PiecewiseCdf {
        match &self.family {
            &ArmFamily::Uniform { low, high } => PiecewiseCdf::new(
                vec![low, high],
                vec![Curve::new(0.0, vec![Term::Linear { origin: low, slope: 1.0 / (high - low) }])],
            ),
            &ArmFamily::PowerTail { mu_star, a, beta, width } => PiecewiseCdf::new(
                vec![mu_star - width, mu_star],
                vec![Curve::new(1.0, vec![Term::Power { anchor: mu_star, coef: -a, exponent: beta }])],
            ),
            ArmFamily::Piecewise(cdf) => Ok(cdf.clone()),
        }
        .expect("built-in families convert to valid piecewise CDFs")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_cdf_and_tail() {
        let arm = ArmModel::uniform(0.0, 1.0).unwrap();
        assert_eq!(arm.cdf(0.3), 0.3);
        assert_eq!(arm.cdf(1.5), 1.0);
        assert_eq!(arm.tail(0.25), 0.25);
        assert_eq!(arm.tail(0.0), 0.0);
        assert_eq!(arm.quantile(0.5), 0.5);
        // G(eps) = eps / (b - a)
        let wide = ArmModel::uniform(2.0, 6.0).unwrap();
        assert_eq!(wide.tail(1.0), 0.25);
    }

    #[test]
    fn power_tail_cdf_and_tail() {
        let arm = ArmModel::power_tail(1.0, 0.5, 2.0, 1.0).unwrap();
        assert_relative_eq!(arm.cdf(0.8), 0.98, max_relative = 1e-12);
        assert_relative_eq!(arm.tail(0.2), 0.02, max_relative = 1e-12);
        assert_eq!(arm.tail(0.0), 0.0);
        // atom of 0.5 at mu_star - width
        assert_eq!(arm.cdf(0.0), 0.5);
        assert_eq!(arm.cdf_left(0.0), 0.0);
        assert_eq!(arm.tail(1.0), 1.0);
        assert_eq!(arm.quantile(0.3), 0.0);
    }

    #[test]
    fn point_mass_sample() {
        let arm = ArmModel::point_mass(0.7).unwrap();
        assert_eq!(arm.mu_star(), 0.7);
        for u in [0.0, 0.25, 0.999] {
            assert_eq!(arm.quantile(u), 0.7);
        }
    }

    #[test]
    fn piecewise_matches_closed_forms() {
        let arms = [
            ArmModel::uniform(-0.5, 2.0).unwrap(),
            ArmModel::power_tail(1.0, 0.5, 2.0, 1.0).unwrap(),
            ArmModel::power_tail(0.3, 2.0, 0.5, 0.2).unwrap(),
        ];
        for arm in &arms {
            let pw = ArmModel::piecewise(arm.to_piecewise());
            assert_eq!(pw.mu_star(), arm.mu_star());
            for i in 0..=200 {
                let mu = -1.0 + 3.5 * i as f64 / 200.0;
                assert!((pw.cdf(mu) - arm.cdf(mu)).abs() < 1e-12, "cdf at {mu}");
                assert!((pw.cdf_left(mu) - arm.cdf_left(mu)).abs() < 1e-12, "left at {mu}");
                let u = i as f64 / 200.0;
                assert!((pw.quantile(u) - arm.quantile(u)).abs() < 1e-9, "quantile at {u}");
                assert!((pw.sup_at_most(u) - arm.sup_at_most(u)).abs() < 1e-9, "sup at {u}");
                let eps = 2.5 * i as f64 / 200.0;
                assert!((pw.tail(eps) - arm.tail(eps)).abs() < 1e-12, "tail at {eps}");
            }
        }
    }

    #[test]
    fn rejects_bad_arms() {
        assert!(ArmModel::uniform(1.0, 1.0).is_err());
        assert!(ArmModel::power_tail(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(ArmModel::power_tail(1.0, 0.5, 0.0, 1.0).is_err());
    }
}
