use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::structured_cov::{Dataset, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Regression,
    TwoSample,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Regression => "regression",
            ScenarioKind::TwoSample => "two_sample",
        }
    }
}

/// Data-generating scenarios with a single response (`q = 1`).
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    /// `Y = X'β + σe` with `X ~ N(0, Σ_X)`; `Σ_X = I` when `x_cov` is `None`.
    Regression {
        coefficients: Vec<f64>,
        noise_sd: f64,
        x_cov: Option<DMatrix<f64>>,
    },
    /// `W ~ Ber(1/2)`, `X | W ~ N(μ₁, I)` if `W = 1` else `N(μ₂, I)`, `Y = 2W − 1`.
    TwoSample { mu1: Vec<f64>, mu2: Vec<f64> },
}

impl ScenarioSpec {
    /// Orthonormal design with equal coefficients and `n‖Σ_XY‖² / √p = s`.
    pub fn regression_at_signal(n: usize, p: usize, s: f64) -> Self {
        let c = (s / (n as f64 * (p as f64).sqrt())).sqrt();
        ScenarioSpec::Regression {
            coefficients: vec![c; p],
            noise_sd: 1.0,
            x_cov: None,
        }
    }

    /// Symmetric means `μ₁ = −μ₂` with `n‖(μ₁ − μ₂)/2‖² / √p = s`.
    pub fn two_sample_at_signal(n: usize, p: usize, s: f64) -> Self {
        let c = (s / (n as f64 * (p as f64).sqrt())).sqrt();
        ScenarioSpec::TwoSample {
            mu1: vec![c; p],
            mu2: vec![-c; p],
        }
    }

    pub fn at_signal(kind: ScenarioKind, n: usize, p: usize, s: f64) -> Self {
        match kind {
            ScenarioKind::Regression => Self::regression_at_signal(n, p, s),
            ScenarioKind::TwoSample => Self::two_sample_at_signal(n, p, s),
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioSpec::Regression { .. } => ScenarioKind::Regression,
            ScenarioSpec::TwoSample { .. } => ScenarioKind::TwoSample,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            ScenarioSpec::Regression { coefficients, .. } => coefficients.len(),
            ScenarioSpec::TwoSample { mu1, .. } => mu1.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioSpec::Regression {
                coefficients,
                noise_sd,
                x_cov,
            } => {
                if coefficients.is_empty() {
                    return Err(Error::invalid("coefficients", "need at least one predictor"));
                }
                if !(*noise_sd > 0.0 && noise_sd.is_finite()) {
                    return Err(Error::invalid("noise_sd", format!("{noise_sd} must be positive")));
                }
                if let Some(cov) = x_cov {
                    x_factor(cov, coefficients.len())?;
                }
                Ok(())
            }
            ScenarioSpec::TwoSample { mu1, mu2 } => {
                if mu1.is_empty() || mu1.len() != mu2.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "mean vectors of lengths {} and {}",
                        mu1.len(),
                        mu2.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// `Σ_X β` for regression, `(μ₁ − μ₂)/2` for two samples.
    pub fn implied_cross_cov(&self) -> Vec<f64> {
        match self {
            ScenarioSpec::Regression {
                coefficients,
                x_cov,
                ..
            } => match x_cov {
                Some(cov) => (cov * DVector::from_column_slice(coefficients)).iter().copied().collect(),
                None => coefficients.clone(),
            },
            ScenarioSpec::TwoSample { mu1, mu2 } => {
                mu1.iter().zip(mu2).map(|(a, b)| (a - b) / 2.0).collect()
            }
        }
    }

    /// `σ² + β'Σ_Xβ` for regression, `1` for two samples.
    pub fn response_variance(&self) -> f64 {
        match self {
            ScenarioSpec::Regression {
                coefficients,
                noise_sd,
                ..
            } => {
                let cross = self.implied_cross_cov();
                noise_sd * noise_sd + coefficients.iter().zip(&cross).map(|(b, c)| b * c).sum::<f64>()
            }
            ScenarioSpec::TwoSample { .. } => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        match self {
            ScenarioSpec::Regression { .. } => scenario_regression(self, n, rng),
            ScenarioSpec::TwoSample { mu1, mu2 } => scenario_two_sample(mu1, mu2, n, rng),
        }
    }
}

fn x_factor(cov: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    if cov.nrows() != p || cov.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "Σ_X is {}x{}, expected {p}x{p}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if (cov - cov.transpose()).amax() > 1e-12 * cov.amax().max(1.0) {
        return Err(Error::invalid("x_cov", "Σ_X must be symmetric"));
    }
    cov.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::invalid("x_cov", "Σ_X must be positive definite"))
}

/// Rows `(x, y)` from the linear model with Gaussian design.
pub fn scenario_regression<R: Rng + ?Sized>(spec: &ScenarioSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    let ScenarioSpec::Regression {
        coefficients,
        noise_sd,
        x_cov,
    } = spec
    else {
        return Err(Error::invalid("spec", "not a regression scenario"));
    };
    spec.validate()?;
    let p = coefficients.len();
    let factor = x_cov.as_ref().map(|c| x_factor(c, p)).transpose()?;
    let mut values = Vec::with_capacity(n * (p + 1));
    let mut z = DVector::zeros(p);
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let x = match &factor {
            Some(l) => l * &z,
            None => z.clone(),
        };
        let noise: f64 = rng.sample(StandardNormal);
        let y = x.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>() + noise_sd * noise;
        values.extend(x.iter());
        values.push(y);
    }
    Dataset::from_rows(p, 1, values, Origin::Regression)
}

/// Rows `(x, y)` from the balanced two-sample mixture with `y = ±1`.
pub fn scenario_two_sample<R: Rng + ?Sized>(mu1: &[f64], mu2: &[f64], n: usize, rng: &mut R) -> Result<Dataset> {
    if mu1.is_empty() || mu1.len() != mu2.len() {
        return Err(Error::DimensionMismatch(format!(
            "mean vectors of lengths {} and {}",
            mu1.len(),
            mu2.len()
        )));
    }
    let p = mu1.len();
    let mut values = Vec::with_capacity(n * (p + 1));
    for _ in 0..n {
        let w: bool = rng.random();
        let mu = if w { mu1 } else { mu2 };
        for &m in mu {
            let z: f64 = rng.sample(StandardNormal);
            values.push(m + z);
        }
        values.push(if w { 1.0 } else { -1.0 });
    }
    Dataset::from_rows(p, 1, values, Origin::TwoSample)
}
