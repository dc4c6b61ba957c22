//! Small numerical helpers shared across modules.

use statrs::function::factorial::ln_binomial;

/// Two-sided standard normal quantile at 95%.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided standard normal quantile at 99%.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums `terms` after sorting by magnitude, smallest first.
pub fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Law of `U = Σ_{i<m} ε_i` for i.i.d. uniform signs, as `(value, ln P(U = value))`
/// over the support `{-m, -m+2, ..., m}`.
pub fn rademacher_sum_log_pmf(m: usize) -> Vec<(i64, f64)> {
    let ln2 = std::f64::consts::LN_2;
    (0..=m)
        .map(|k| {
            let value = m as i64 - 2 * k as i64;
            (value, ln_binomial(m as u64, k as u64) - m as f64 * ln2)
        })
        .collect()
}

/// `ln |e^x - 1|` without overflow for large `x` or cancellation near zero.
pub fn ln_abs_expm1(x: f64) -> f64 {
    if x > 0.0 {
        if x > 1.0 {
            x + (-(-x).exp()).ln_1p()
        } else {
            x.exp_m1().ln()
        }
    } else {
        (-x.exp_m1()).ln()
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp so the interval always contains the point estimate despite rounding.
    ((centre - half).max(0.0).min(phat), (centre + half).min(1.0).max(phat))
}

pub fn rel_err(reference: f64, value: f64) -> f64 {
    let abs = (reference - value).abs();
    if reference == 0.0 {
        abs
    } else {
        abs / reference.abs()
    }
}
