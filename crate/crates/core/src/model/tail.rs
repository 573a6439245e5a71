use crate::error::{Error, Result};

use super::piecewise::{Curve, Segment, Term};

/// Relative slack accepted at the upper end of the domain before an
/// argument counts as out of range. Grid arithmetic such as `top - mu`
/// lands a few ulps past `eps0` otherwise.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TailShape {
    /// `G(x) = a * x^beta`
    PowerLaw { a: f64, beta: f64 },
    /// Piecewise-linear through `(x, G(x))` knots starting at the origin.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// Known lower bound on the tail function of every arm, defined on `[0, eps0]`.
///
/// `G(0) = 0`, strictly increasing, `G(eps0) <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailBound {
    shape: TailShape,
    eps0: f64,
    concave: bool,
}

impl TailBound {
    pub fn power_law(a: f64, beta: f64, eps0: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("power-law A must be positive, got {a}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("power-law beta must be positive, got {beta}")));
        }
        check_eps0(eps0)?;
        let top = a * eps0.powf(beta);
        if top > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "G(eps0) = {top} exceeds 1; not a probability"
            )));
        }
        Ok(TailBound {
            shape: TailShape::PowerLaw { a, beta },
            eps0,
            concave: beta <= 1.0,
        })
    }

    /// Tabulated bound. `eps0` defaults to the last knot when `None`.
    pub fn tabulated(knots: Vec<(f64, f64)>, eps0: Option<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("tabulated tail bound needs at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::InvalidParameter(format!(
                "first knot must be (0, 0), got {:?}",
                knots[0]
            )));
        }
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x1.is_finite() && y1.is_finite() && x1 > x0 && y1 > y0) {
                return Err(Error::InvalidParameter(format!(
                    "knots must be strictly increasing in both coordinates: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        let (last_x, last_y) = *knots.last().unwrap();
        if last_y > 1.0 {
            return Err(Error::InvalidParameter(format!("knot probability {last_y} exceeds 1")));
        }
        let eps0 = eps0.unwrap_or(last_x);
        check_eps0(eps0)?;
        if eps0 > last_x {
            return Err(Error::InvalidParameter(format!(
                "eps0 = {eps0} lies beyond the last knot {last_x}"
            )));
        }
        let concave = slopes(&knots)
            .windows(2)
            .all(|s| s[1] <= s[0] * (1.0 + 1e-12));
        Ok(TailBound {
            shape: TailShape::Tabulated { knots },
            eps0,
            concave,
        })
    }

    pub fn shape(&self) -> &TailShape {
        &self.shape
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    /// `G(eps)`; errors outside `[0, eps0]`.
    pub fn eval(&self, eps: f64) -> Result<f64> {
        let eps = self.clamp_domain(eps)?;
        Ok(self.eval_unchecked(eps))
    }

    /// `G(eps0)`, the largest value the bound takes.
    pub fn max_value(&self) -> f64 {
        self.eval_unchecked(self.eps0)
    }

    /// `G^{-1}(y)` for `y` in `[0, G(eps0)]`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let top = self.max_value();
        if !(y >= 0.0 && y <= top * (1.0 + DOMAIN_SLACK)) {
            return Err(Error::OutOfDomain {
                what: "tail bound inverse",
                value: y,
                low: 0.0,
                high: top,
            });
        }
        if y >= top {
            return Ok(self.eps0);
        }
        let x = match &self.shape {
            TailShape::PowerLaw { a, beta } => (y / a).powf(1.0 / beta),
            TailShape::Tabulated { knots } => {
                let i = knots.partition_point(|&(_, p)| p <= y).clamp(1, knots.len() - 1);
                let (x0, y0) = knots[i - 1];
                let (x1, y1) = knots[i];
                x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            }
        };
        Ok(x.min(self.eps0))
    }

    /// The same bound multiplied by `factor`, e.g. `G/|K|` for the unified arm.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {factor}")));
        }
        match &self.shape {
            TailShape::PowerLaw { a, beta } => TailBound::power_law(a * factor, *beta, self.eps0),
            TailShape::Tabulated { knots } => TailBound::tabulated(
                knots.iter().map(|&(x, p)| (x, p * factor)).collect(),
                Some(self.eps0),
            ),
        }
    }

    /// Segments of `mu -> 1 - weight * G(top - mu)` covering `[start, top)`,
    /// in ascending order of `mu`. `top - start` must not exceed `eps0`.
    pub(crate) fn reflected_segments(&self, top: f64, start: f64, weight: f64) -> Vec<Segment> {
        let depth = (top - start).min(self.eps0);
        match &self.shape {
            TailShape::PowerLaw { a, beta } => vec![Segment {
                start,
                end: top,
                curve: Curve::new(
                    1.0,
                    vec![Term::Power {
                        anchor: top,
                        coef: -a * weight,
                        exponent: *beta,
                    }],
                ),
            }],
            TailShape::Tabulated { knots } => {
                let s = slopes(knots);
                let mut out = Vec::new();
                for (i, w) in knots.windows(2).enumerate() {
                    let (x0, y0) = w[0];
                    if x0 >= depth {
                        break;
                    }
                    let seg_start = if w[1].0 >= depth { start } else { top - w[1].0 };
                    out.push(Segment {
                        start: seg_start,
                        end: top - x0,
                        curve: Curve::new(
                            1.0 - weight * y0,
                            vec![Term::Linear {
                                origin: top - x0,
                                slope: weight * s[i],
                            }],
                        ),
                    });
                }
                out.reverse();
                out
            }
        }
    }

    fn clamp_domain(&self, eps: f64) -> Result<f64> {
        if eps >= 0.0 && eps <= self.eps0 {
            Ok(eps)
        } else if eps > self.eps0 && eps <= self.eps0 * (1.0 + DOMAIN_SLACK) {
            Ok(self.eps0)
        } else {
            Err(Error::OutOfDomain {
                what: "tail bound",
                value: eps,
                low: 0.0,
                high: self.eps0,
            })
        }
    }

    fn eval_unchecked(&self, eps: f64) -> f64 {
        match &self.shape {
            TailShape::PowerLaw { a, beta } => {
                if eps == 0.0 {
                    0.0
                } else {
                    a * eps.powf(*beta)
                }
            }
            TailShape::Tabulated { knots } => {
                let i = knots.partition_point(|&(x, _)| x <= eps).clamp(1, knots.len() - 1);
                let (x0, y0) = knots[i - 1];
                let (x1, y1) = knots[i];
                y0 + (eps - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }
}

fn check_eps0(eps0: f64) -> Result<()> {
    if eps0.is_finite() && eps0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps0 must be positive, got {eps0}")))
    }
}

fn slopes(knots: &[(f64, f64)]) -> Vec<f64> {
    knots
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_values() {
        let tb = TailBound::power_law(0.01, 1.0, 1.0).unwrap();
        assert_relative_eq!(tb.eval(1e-4).unwrap(), 1e-6, max_relative = 1e-12);
        assert_eq!(tb.eval(0.0).unwrap(), 0.0);
        let tb = TailBound::power_law(0.5, 2.0, 1.0).unwrap();
        assert_relative_eq!(tb.eval(0.2).unwrap(), 0.02, max_relative = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let tb = TailBound::power_law(0.01, 1.0, 1.0).unwrap();
        assert_relative_eq!(tb.inverse(1e-6).unwrap(), 1e-4, max_relative = 1e-9);
        assert_eq!(tb.inverse(tb.max_value()).unwrap(), tb.eps0());

        let tab = TailBound::tabulated(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)], None).unwrap();
        assert_eq!(tab.inverse(0.25).unwrap(), 0.5);
        assert_eq!(tab.inverse(1.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let tb = TailBound::power_law(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(tb.eval(-0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(tb.eval(0.6), Err(Error::OutOfDomain { .. })));
        assert!(tb.eval(0.5 + 1e-15).is_ok());
        assert!(matches!(tb.inverse(0.6), Err(Error::OutOfDomain { .. })));
        assert!(matches!(tb.inverse(-1e-3), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TailBound::power_law(0.0, 1.0, 1.0).is_err());
        assert!(TailBound::power_law(2.0, 1.0, 1.0).is_err());
        assert!(TailBound::power_law(1.0, -1.0, 1.0).is_err());
        assert!(TailBound::tabulated(vec![(0.0, 0.1), (1.0, 0.5)], None).is_err());
        assert!(TailBound::tabulated(vec![(0.0, 0.0), (1.0, 0.5), (0.5, 0.6)], None).is_err());
        assert!(TailBound::tabulated(vec![(0.0, 0.0), (1.0, 1.5)], None).is_err());
        assert!(TailBound::tabulated(vec![(0.0, 0.0), (1.0, 0.5)], Some(2.0)).is_err());
    }

    #[test]
    fn concavity_flag() {
        assert!(TailBound::power_law(1.0, 1.0, 1.0).unwrap().is_concave());
        assert!(TailBound::power_law(1.0, 0.5, 1.0).unwrap().is_concave());
        assert!(!TailBound::power_law(1.0, 2.0, 1.0).unwrap().is_concave());
        let concave = TailBound::tabulated(vec![(0.0, 0.0), (0.5, 0.4), (1.0, 0.6)], None).unwrap();
        assert!(concave.is_concave());
        let convex = TailBound::tabulated(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)], None).unwrap();
        assert!(!convex.is_concave());
    }

    #[test]
    fn scaled_bound() {
        let tb = TailBound::tabulated(vec![(0.0, 0.0), (0.5, 0.4), (1.0, 0.6)], None).unwrap();
        let half = tb.scaled(0.5).unwrap();
        assert_relative_eq!(half.eval(0.75).unwrap(), 0.25, max_relative = 1e-12);
        assert!(half.is_concave());
    }

    #[test]
    fn reflected_segments_match_bound() {
        let tabs = [
            TailBound::tabulated(vec![(0.0, 0.0), (0.2, 0.3), (0.6, 0.5), (1.0, 0.6)], Some(0.8)).unwrap(),
            TailBound::power_law(0.3, 0.7, 0.9).unwrap(),
        ];
        for tb in tabs {
            let top = 2.0;
            let start = top - tb.eps0();
            let segs = tb.reflected_segments(top, start, 1.0);
            assert_eq!(segs[0].start, start);
            for w in segs.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
            assert_eq!(segs.last().unwrap().end, top);
            for seg in &segs {
                for j in 0..=10 {
                    let mu = seg.start + (seg.end - seg.start) * j as f64 / 10.0;
                    let want = 1.0 - tb.eval(top - mu).unwrap();
                    assert!((seg.curve.eval(mu) - want).abs() < 1e-12, "{mu}");
                }
            }
        }
    }
}
