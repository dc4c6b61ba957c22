use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::structured_cov::Dataset;

/// Outcome of one permutation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestDecision {
    /// Observed `‖Σ̂_XY‖_F²`.
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub permutations: usize,
}

/// `X` and `Y` blocks laid out for repeated evaluation of the statistic
/// under row permutations of `Y`.
struct Prepared {
    n: usize,
    p: usize,
    q: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    scale: f64,
    /// Gram matrices `XX'` and `YY'`, used when `n < pq`.
    grams: Option<(Vec<f64>, Vec<f64>)>,
}

impl Prepared {
    fn new(ds: &Dataset, centered: bool) -> Result<Self> {
        let (n, p, q) = (ds.n(), ds.p(), ds.q());
        if n == 0 || (centered && n < 2) {
            return Err(Error::DimensionMismatch(format!(
                "{n} rows are too few for the {} statistic",
                if centered { "centered" } else { "uncentered" }
            )));
        }
        let mut x = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n * q);
        for i in 0..n {
            x.extend_from_slice(ds.x(i));
            y.extend_from_slice(ds.y(i));
        }
        if centered {
            center_columns(&mut x, p);
            center_columns(&mut y, q);
        }
        let denom = if centered { (n - 1) as f64 } else { n as f64 };
        let grams = (n < p * q).then(|| (gram(&x, n, p), gram(&y, n, q)));
        Ok(Self {
            n,
            p,
            q,
            x,
            y,
            scale: 1.0 / (denom * denom),
            grams,
        })
    }

    /// Statistic with row `i` of `X` paired to row `perm[i]` of `Y`.
    fn statistic(&self, perm: &[usize], scratch: &mut Vec<f64>) -> f64 {
        let raw = match &self.grams {
            Some((kx, ky)) => {
                let n = self.n;
                let mut total = 0.0;
                for i in 0..n {
                    let kx_row = &kx[i * n..(i + 1) * n];
                    let ky_row = &ky[perm[i] * n..(perm[i] + 1) * n];
                    total += kx_row
                        .iter()
                        .zip(perm)
                        .map(|(&k, &j)| k * ky_row[j])
                        .sum::<f64>();
                }
                total
            }
            None => {
                let (p, q) = (self.p, self.q);
                scratch.clear();
                scratch.resize(p * q, 0.0);
                for (i, &j) in perm.iter().enumerate() {
                    let xi = &self.x[i * p..(i + 1) * p];
                    let yj = &self.y[j * q..(j + 1) * q];
                    for (row, &xa) in scratch.chunks_exact_mut(q).zip(xi) {
                        for (m, &yb) in row.iter_mut().zip(yj) {
                            *m += xa * yb;
                        }
                    }
                }
                scratch.iter().map(|m| m * m).sum()
            }
        };
        raw * self.scale
    }
}

fn center_columns(values: &mut [f64], width: usize) {
    let n = values.len() / width;
    for c in 0..width {
        let mean = (0..n).map(|i| values[i * width + c]).sum::<f64>() / n as f64;
        for i in 0..n {
            values[i * width + c] -= mean;
        }
    }
}

fn gram(values: &[f64], n: usize, width: usize) -> Vec<f64> {
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        let ri = &values[i * width..(i + 1) * width];
        for j in i..n {
            let rj = &values[j * width..(j + 1) * width];
            let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            k[i * n + j] = dot;
            k[j * n + i] = dot;
        }
    }
    k
}

/// `‖Σ̂_XY‖_F²` with `Σ̂_XY = (1/n)Σ x_i y_i'`, or the `1/(n−1)` mean-centered version.
pub fn cross_cov_stat(ds: &Dataset, centered: bool) -> Result<f64> {
    let prepared = Prepared::new(ds, centered)?;
    let identity: Vec<usize> = (0..ds.n()).collect();
    Ok(prepared.statistic(&identity, &mut Vec::new()))
}

/// Level-α test calibrated by permuting the rows of `Y` against fixed `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationTest {
    pub permutations: usize,
    pub alpha: f64,
    pub centered: bool,
}

impl PermutationTest {
    pub const DEFAULT_PERMUTATIONS: usize = 200;

    pub fn new(permutations: usize, alpha: f64) -> Result<Self> {
        if permutations < 19 {
            return Err(Error::invalid("permutations", format!("{permutations} < 19")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1]")));
        }
        Ok(Self {
            permutations,
            alpha,
            centered: false,
        })
    }

    pub fn centered(mut self, centered: bool) -> Self {
        self.centered = centered;
        self
    }

    /// `p = (1 + #{T_b ≥ T_obs}) / (B + 1)`; rejects when `p ≤ α`.
    pub fn run<R: Rng + ?Sized>(&self, ds: &Dataset, rng: &mut R) -> Result<TestDecision> {
        let prepared = Prepared::new(ds, self.centered)?;
        let mut perm: Vec<usize> = (0..ds.n()).collect();
        let mut scratch = Vec::new();
        let observed = prepared.statistic(&perm, &mut scratch);
        let mut exceed = 0usize;
        for _ in 0..self.permutations {
            perm.shuffle(rng);
            if prepared.statistic(&perm, &mut scratch) >= observed {
                exceed += 1;
            }
        }
        let p_value = (1 + exceed) as f64 / (self.permutations + 1) as f64;
        Ok(TestDecision {
            statistic: observed,
            p_value,
            reject: p_value <= self.alpha,
            permutations: self.permutations,
        })
    }
}

/// Uncentered permutation test with `B` permutations.
pub fn permutation_test<R: Rng + ?Sized>(
    ds: &Dataset,
    permutations: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<TestDecision> {
    PermutationTest::new(permutations, alpha)?.run(ds, rng)
}
