use crate::error::{Error, Result};
use crate::structured_cov::amplitude;

/// Dimensions, level, target power and signal constant of one testing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Aspect bound on `(p + q) / n`; unchecked when absent.
    pub kappa: Option<f64>,
    pub b: f64,
}

impl ProblemConfig {
    pub fn new(n: usize, p: usize, q: usize, alpha: f64, beta: f64, b: f64) -> Result<Self> {
        let cfg = Self {
            n,
            p,
            q,
            alpha,
            beta,
            kappa: None,
            b,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = Some(kappa);
        self.validate()?;
        Ok(self)
    }

    pub fn with_b(mut self, b: f64) -> Result<Self> {
        self.b = b;
        self.validate()?;
        Ok(self)
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (name, v) in [("n", self.n), ("p", self.p), ("q", self.q)] {
            if v == 0 {
                out.push(Error::invalid(name, "must be at least 1"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(Error::invalid("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !(self.beta > self.alpha && self.beta < 1.0) {
            out.push(Error::invalid(
                "beta",
                format!("{} not in (alpha, 1) with alpha = {}", self.beta, self.alpha),
            ));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            out.push(Error::invalid("b", format!("{} is not a nonnegative real", self.b)));
        }
        if let Some(kappa) = self.kappa {
            if !(kappa > 0.0 && kappa.is_finite()) {
                out.push(Error::invalid("kappa", format!("{kappa} is not positive")));
            } else if self.n > 0 && self.aspect() > kappa {
                out.push(Error::invalid(
                    "kappa",
                    format!("(p + q) / n = {} exceeds kappa = {kappa}", self.aspect()),
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// `(p + q) / n`.
    pub fn aspect(&self) -> f64 {
        (self.p + self.q) as f64 / self.n as f64
    }

    pub fn amplitude(&self) -> Result<f64> {
        amplitude(self.n, self.p, self.q, self.b)
    }

    /// Dimensionless signal `n‖Σ_XY‖_F² / √(pq) = b² / 2`.
    pub fn signal(&self) -> f64 {
        self.b * self.b / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_levels() {
        assert!(ProblemConfig::new(10, 2, 2, 0.4, 0.3, 0.1).is_err());
        assert!(ProblemConfig::new(10, 2, 2, 0.0, 0.3, 0.1).is_err());
        assert!(ProblemConfig::new(10, 2, 2, 0.05, 1.0, 0.1).is_err());
    }

    #[test]
    fn reports_every_violation() {
        let cfg = ProblemConfig {
            n: 0,
            p: 0,
            q: 3,
            alpha: 2.0,
            beta: 0.5,
            kappa: None,
            b: -1.0,
        };
        assert_eq!(cfg.violations().len(), 5);
    }

    #[test]
    fn kappa_bounds_the_aspect_ratio() {
        let cfg = ProblemConfig::new(10, 6, 6, 0.05, 0.35, 0.1).unwrap();
        assert!(cfg.clone().with_kappa(1.0).is_err());
        assert!(cfg.with_kappa(1.2).is_ok());
    }

    #[test]
    fn signal_is_half_b_squared() {
        let cfg = ProblemConfig::new(50, 4, 4, 0.05, 0.35, 2.0).unwrap();
        assert_eq!(cfg.signal(), 2.0);
    }
}
