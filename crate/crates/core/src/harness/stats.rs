use serde::Serialize;

/// z-score of a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correctness {
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Success rate `1 - failures/trials` with its Wilson score interval.
pub fn estimate_correctness(failures: u64, trials: u64) -> Correctness {
    assert!(trials >= 1 && failures <= trials, "need 0 <= failures <= trials, trials >= 1");
    let n = trials as f64;
    let p = 1.0 - failures as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Correctness {
        rate: p,
        wilson_low: (center - half).max(0.0),
        wilson_high: (center + half).min(1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub stddev: f64,
    pub min: u64,
    pub max: u64,
    pub per_arm_mean: Vec<f64>,
}

/// Exact integer accumulator; merging is associative and commutative, so
/// the result does not depend on trial order or on how trials were split.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Accumulator {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub min: u64,
    pub max: u64,
    pub per_arm: Vec<u128>,
}

impl Accumulator {
    pub fn new(num_arms: usize) -> Self {
        Accumulator { min: u64::MAX, per_arm: vec![0; num_arms], ..Default::default() }
    }

    pub fn push(&mut self, total: u64, counts: &[u64]) {
        self.n += 1;
        self.sum += total as u128;
        self.sum_sq += (total as u128) * (total as u128);
        self.min = self.min.min(total);
        self.max = self.max.max(total);
        for (acc, &c) in self.per_arm.iter_mut().zip(counts) {
            *acc += c as u128;
        }
    }

    pub fn finish(&self) -> SampleStats {
        let n = self.n as f64;
        let var = if self.n > 1 {
            let num = self.n as u128 * self.sum_sq - self.sum * self.sum;
            num as f64 / (n * (n - 1.0))
        } else {
            0.0
        };
        SampleStats {
            mean: self.sum as f64 / n,
            stddev: var.sqrt(),
            min: self.min,
            max: self.max,
            per_arm_mean: self.per_arm.iter().map(|&s| s as f64 / n).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        let c = estimate_correctness(0, 100);
        assert_eq!(c.rate, 1.0);
        assert!((c.wilson_low - 0.9630).abs() < 5e-5, "{c:?}");
        assert!((c.wilson_high - 1.0).abs() < 1e-12);
        let c = estimate_correctness(5, 100);
        assert!((c.rate - 0.95).abs() < 1e-15);
        // statsmodels proportion_confint(95, 100, method="wilson")
        assert!((c.wilson_low - 0.888250).abs() < 5e-6, "{c:?}");
        assert!((c.wilson_high - 0.978456).abs() < 5e-6, "{c:?}");
    }

    #[test]
    fn wilson_is_symmetric() {
        let all = estimate_correctness(100, 100);
        let none = estimate_correctness(0, 100);
        assert_eq!(all.rate, 0.0);
        assert!((all.wilson_high - (1.0 - none.wilson_low)).abs() < 1e-12);
    }

    #[test]
    fn accumulator_moments() {
        let mut acc = Accumulator::new(2);
        for (t, c) in [(3, [1, 2]), (5, [4, 1]), (10, [5, 5])] {
            acc.push(t, &c);
        }
        let s = acc.finish();
        assert!((s.mean - 6.0).abs() < 1e-15);
        assert!((s.stddev - 13.0f64.sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max), (3, 10));
        assert_eq!(s.per_arm_mean, vec![10.0 / 3.0, 8.0 / 3.0]);
    }
}
