//! Mixed (continuous + atomic) distribution functions.
//!
//! A [`PiecewiseCdf`] is a sorted list of knots with one [`Curve`] between
//! each consecutive pair. The CDF is zero below the first knot, follows the
//! curve of the enclosing interval `[x_i, x_{i+1})`, and is one from the last
//! knot on. Whenever a curve starts above where its predecessor ended, the
//! knot carries an atom. The curve algebra is closed under scaling, shifting
//! and summation, which is all the hypothesis constructions need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on monotonicity and range checks for assembled CDFs.
pub const CDF_TOLERANCE: f64 = 1e-12;

const PROBES_PER_PIECE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Term {
    /// `slope * (mu - origin)`
    Linear { origin: f64, slope: f64 },
    /// `coef * (anchor - mu)^exponent`, with the base clamped at zero.
    Power { anchor: f64, coef: f64, exponent: f64 },
}

impl Term {
    fn eval(&self, mu: f64) -> f64 {
        match *self {
            Term::Linear { origin, slope } => slope * (mu - origin),
            Term::Power { anchor, coef, exponent } => coef * (anchor - mu).max(0.0).powf(exponent),
        }
    }

    fn scaled(&self, factor: f64) -> Term {
        match *self {
            Term::Linear { origin, slope } => Term::Linear { origin, slope: slope * factor },
            Term::Power { anchor, coef, exponent } => Term::Power { anchor, coef: coef * factor, exponent },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<Term>,
}

impl Curve {
    pub fn new(constant: f64, terms: Vec<Term>) -> Self {
        Curve { constant, terms }
    }

    pub fn constant(value: f64) -> Self {
        Curve { constant: value, terms: Vec::new() }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        self.terms.iter().fold(self.constant, |acc, t| acc + t.eval(mu))
    }

    pub fn scaled(&self, factor: f64) -> Curve {
        Curve {
            constant: self.constant * factor,
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
        }
    }

    pub fn shifted(&self, offset: f64) -> Curve {
        Curve { constant: self.constant + offset, terms: self.terms.clone() }
    }

    pub fn plus(&self, other: &Curve) -> Curve {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Curve { constant: self.constant + other.constant, terms }
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite()
            && self.terms.iter().all(|t| match *t {
                Term::Linear { origin, slope } => origin.is_finite() && slope.is_finite(),
                Term::Power { anchor, coef, exponent } => {
                    anchor.is_finite() && coef.is_finite() && exponent.is_finite() && exponent > 0.0
                }
            })
    }

    /// Smallest `mu` in `[lo, hi]` with `eval(mu) >= target`, for a curve
    /// that is non-decreasing on the interval.
    fn solve(&self, target: f64, lo: f64, hi: f64) -> f64 {
        let closed = match self.terms.as_slice() {
            [Term::Linear { origin, slope }] if *slope > 0.0 => {
                Some(origin + (target - self.constant) / slope)
            }
            [Term::Power { anchor, coef, exponent }] if *coef < 0.0 => {
                let base = ((target - self.constant) / coef).max(0.0);
                Some(anchor - base.powf(1.0 / exponent))
            }
            _ => None,
        };
        if let Some(mu) = closed {
            return mu.clamp(lo, hi);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.eval(mid) >= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        b
    }
}

/// A curve restricted to `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub curve: Curve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCdf {
    knots: Vec<f64>,
    pieces: Vec<Curve>,
    // F(x_i) and F(x_i-)
    at_knot: Vec<f64>,
    before_knot: Vec<f64>,
}

impl PiecewiseCdf {
    pub fn new(knots: Vec<f64>, pieces: Vec<Curve>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidDistribution("piecewise CDF needs at least one knot".into()));
        }
        if pieces.len() + 1 != knots.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} knots need {} pieces, got {}",
                knots.len(),
                knots.len() - 1,
                pieces.len()
            )));
        }
        if knots.iter().any(|x| !x.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidDistribution("knots must be finite and strictly increasing".into()));
        }
        if pieces.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDistribution("piece coefficients must be finite".into()));
        }
        let n = pieces.len();
        let mut at_knot = Vec::with_capacity(n + 1);
        let mut before_knot = Vec::with_capacity(n + 1);
        before_knot.push(0.0);
        for (i, c) in pieces.iter().enumerate() {
            at_knot.push(c.eval(knots[i]));
            before_knot.push(c.eval(knots[i + 1]));
        }
        at_knot.push(1.0);
        let cdf = PiecewiseCdf { knots, pieces, at_knot, before_knot };
        cdf.validate()?;
        Ok(cdf)
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        PiecewiseCdf::new(vec![v], Vec::new())
    }

    /// Concatenate contiguous segments; empty segments are dropped.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let segments: Vec<Segment> = segments.into_iter().filter(|s| s.end > s.start).collect();
        let Some(last) = segments.last() else {
            return Err(Error::InvalidDistribution("no non-empty segments".into()));
        };
        let top = last.end;
        for w in segments.windows(2) {
            if w[0].end != w[1].start {
                return Err(Error::InvalidDistribution(format!(
                    "segments not contiguous: [{}, {}) then [{}, {})",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        let mut knots: Vec<f64> = segments.iter().map(|s| s.start).collect();
        knots.push(top);
        PiecewiseCdf::new(knots, segments.into_iter().map(|s| s.curve).collect())
    }

    /// Weighted sum of distribution functions; weights must sum to one.
    pub fn mixture(components: &[(f64, &PiecewiseCdf)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("empty mixture".into()));
        }
        let mut knots: Vec<f64> = components.iter().flat_map(|(_, c)| c.knots.iter().copied()).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let pieces = knots
            .windows(2)
            .map(|w| {
                components.iter().fold(Curve::constant(0.0), |acc, (weight, c)| {
                    acc.plus(&c.curve_from(w[0]).scaled(*weight))
                })
            })
            .collect();
        PiecewiseCdf::new(knots, pieces)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Curve] {
        &self.pieces
    }

    /// Essential supremum: the last knot.
    pub fn sup(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn inf(&self) -> f64 {
        self.knots[0]
    }

    /// Right-continuous value `F(mu)`.
    pub fn eval(&self, mu: f64) -> f64 {
        if mu < self.knots[0] {
            return 0.0;
        }
        let i = self.knots.partition_point(|&x| x <= mu) - 1;
        if i == self.pieces.len() {
            1.0
        } else {
            self.pieces[i].eval(mu).clamp(0.0, 1.0)
        }
    }

    /// Left limit `F(mu-)`.
    pub fn left_limit(&self, mu: f64) -> f64 {
        if mu <= self.knots[0] {
            return 0.0;
        }
        let i = self.knots.partition_point(|&x| x < mu) - 1;
        if i == self.pieces.len() {
            1.0
        } else {
            self.pieces[i].eval(mu).clamp(0.0, 1.0)
        }
    }

    /// `inf{mu : F(mu) >= u}`, clamped to the support for `u <= 0`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= self.at_knot[0] {
            return self.knots[0];
        }
        // first knot whose right value reaches u
        let j = self.at_knot.partition_point(|&v| v < u);
        let j = j.min(self.pieces.len());
        if self.before_knot[j] >= u {
            // crossing inside the piece that ends at knot j
            self.pieces[j - 1].solve(u, self.knots[j - 1], self.knots[j])
        } else {
            self.knots[j]
        }
    }

    /// `sup{mu <= sup() : F(mu) <= p}` by bisection to `tol`.
    pub fn sup_at_most(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return self.sup();
        }
        let j = self.at_knot.partition_point(|&v| v <= p);
        if j == 0 {
            return self.knots[0];
        }
        if self.before_knot[j] <= p {
            // jump across p at knot j
            return self.knots[j];
        }
        let curve = &self.pieces[j - 1];
        let (mut lo, mut hi) = (self.knots[j - 1], self.knots[j]);
        let tol = CDF_TOLERANCE * lo.abs().max(hi.abs()).max(1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if curve.eval(mid) <= p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Segments covering `[max(lo, inf), hi)`; beyond the last knot the
    /// value is the constant one.
    pub fn restrict(&self, lo: f64, hi: f64) -> Vec<Segment> {
        let lo = lo.max(self.knots[0]);
        let mut out = Vec::new();
        if hi <= lo {
            return out;
        }
        for (i, c) in self.pieces.iter().enumerate() {
            let (a, b) = (self.knots[i].max(lo), self.knots[i + 1].min(hi));
            if b > a {
                out.push(Segment { start: a, end: b, curve: c.clone() });
            }
        }
        let top = self.sup();
        if hi > top {
            out.push(Segment { start: top.max(lo), end: hi, curve: Curve::constant(1.0) });
        }
        out
    }

    /// Curve describing the CDF on the interval starting at `mu`.
    fn curve_from(&self, mu: f64) -> Curve {
        if mu < self.knots[0] {
            return Curve::constant(0.0);
        }
        let i = self.knots.partition_point(|&x| x <= mu) - 1;
        self.pieces.get(i).cloned().unwrap_or_else(|| Curve::constant(1.0))
    }

    fn validate(&self) -> Result<()> {
        let tol = CDF_TOLERANCE;
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if self.at_knot[0] < -tol {
            return bad(format!("negative value {} at first knot", self.at_knot[0]));
        }
        for (i, c) in self.pieces.iter().enumerate() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            let mut prev = self.at_knot[i];
            if prev < self.before_knot[i] - tol {
                return bad(format!("decreasing jump at knot {a}"));
            }
            for j in 1..=PROBES_PER_PIECE {
                let mu = a + (b - a) * j as f64 / PROBES_PER_PIECE as f64;
                let v = c.eval(mu);
                if v < prev - tol {
                    return bad(format!("CDF decreases on [{a}, {b}): {prev} then {v} at {mu}"));
                }
                prev = v;
            }
            if prev > 1.0 + tol {
                return bad(format!("CDF exceeds one ({prev}) before {b}"));
            }
        }
        if let (Some(c), [.., a, b]) = (self.pieces.last(), self.knots.as_slice()) {
            if c.eval(b - (b - a) * 1e-6) >= 1.0 {
                return bad(format!("CDF reaches one before the last knot {b}"));
            }
        }
        Ok(())
    }
}
