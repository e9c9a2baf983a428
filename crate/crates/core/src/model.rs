//! Bivariate normal data model: running sums, estimates and log-density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True mean vector and covariance parameters of the bivariate process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueParams {
    pub theta1: f64,
    pub theta2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma: f64,
}

impl TrueParams {
    /// `|gamma| = 1` is accepted so degenerate streams can be sampled; the
    /// log-density rejects it.
    pub fn new(theta1: f64, theta2: f64, sigma1: f64, sigma2: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            theta1,
            theta2,
            sigma1,
            sigma2,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta1.is_finite() {
            return Err(Error::param("theta1", "must be finite"));
        }
        if !self.theta2.is_finite() {
            return Err(Error::param("theta2", "must be finite"));
        }
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) {
            return Err(Error::param("sigma1", format!("must be positive, got {}", self.sigma1)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::param("sigma2", format!("must be positive, got {}", self.sigma2)));
        }
        if !(self.gamma.abs() <= 1.0) {
            return Err(Error::param("gamma", format!("must lie in [-1, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Running sums of both components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: u64,
    pub s1: f64,
    pub s2: f64,
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
}

impl SufficientStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Self {
        pairs
            .into_iter()
            .fold(Self::new(), |acc, (x1, x2)| acc.accumulate(x1, x2))
    }

    #[must_use]
    pub fn accumulate(mut self, x1: f64, x2: f64) -> Self {
        self.push(x1, x2);
        self
    }

    pub fn push(&mut self, x1: f64, x2: f64) {
        self.n += 1;
        self.s1 += x1;
        self.s2 += x2;
        self.s11 += x1 * x1;
        self.s22 += x2 * x2;
        self.s12 += x1 * x2;
    }

    /// Mean of the first component; `None` before the first observation.
    pub fn mean1(&self) -> Option<f64> {
        (self.n > 0).then(|| self.s1 / self.n as f64)
    }

    /// Centered sums of squares and cross-products `(c11, c22, c12)`.
    ///
    /// Clamped at zero: rounding can push a true zero slightly negative.
    pub fn centered(&self) -> (f64, f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0, 0.0);
        }
        let n = self.n as f64;
        let c11 = (self.s11 - self.s1 * self.s1 / n).max(0.0);
        let c22 = (self.s22 - self.s2 * self.s2 / n).max(0.0);
        let c12 = self.s12 - self.s1 * self.s2 / n;
        (c11, c22, c12)
    }

    /// Sums of squared and cross deviations about a fixed mean vector:
    /// `(Σ(x1-t1)^2, Σ(x2-t2)^2, Σ(x1-t1)(x2-t2))`.
    pub fn deviations_about(&self, theta1: f64, theta2: f64) -> (f64, f64, f64) {
        let n = self.n as f64;
        let d11 = self.s11 - 2.0 * theta1 * self.s1 + n * theta1 * theta1;
        let d22 = self.s22 - 2.0 * theta2 * self.s2 + n * theta2 * theta2;
        let d12 = self.s12 - theta1 * self.s2 - theta2 * self.s1 + n * theta1 * theta2;
        (d11, d22, d12)
    }

    /// First-component standard deviation with divisor `n - 1`.
    pub fn sd1(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                have: self.n,
            });
        }
        let (c11, _, _) = self.centered();
        Ok((c11 / (self.n - 1) as f64).sqrt())
    }
}

/// Divisor of the centered sums of squares in a variance estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceDivisor {
    /// `n - 1`.
    #[default]
    Unbiased,
    /// `n`, the maximum likelihood estimate.
    MaxLikelihood,
}

impl VarianceDivisor {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceDivisor::Unbiased => "n-1",
            VarianceDivisor::MaxLikelihood => "n",
        }
    }
}

/// Sample means, variances (divisor `n - 1`) and correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub theta1_hat: f64,
    pub theta2_hat: f64,
    pub sigma1_sq_hat: f64,
    pub sigma2_sq_hat: f64,
    pub gamma_hat: f64,
    pub n: u64,
}

impl Estimates {
    /// Estimates from the running sums; requires `n >= 2`.
    ///
    /// The correlation is defined as 0 when either centered sum of squares
    /// vanishes.
    pub fn from_stats(stats: &SufficientStats) -> Result<Self> {
        if stats.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                have: stats.n,
            });
        }
        let n = stats.n as f64;
        let (c11, c22, c12) = stats.centered();
        let gamma_hat = if c11 == 0.0 || c22 == 0.0 {
            0.0
        } else {
            (c12 / (c11 * c22).sqrt()).clamp(-1.0, 1.0)
        };
        Ok(Self {
            theta1_hat: stats.s1 / n,
            theta2_hat: stats.s2 / n,
            sigma1_sq_hat: c11 / (n - 1.0),
            sigma2_sq_hat: c22 / (n - 1.0),
            gamma_hat,
            n: stats.n,
        })
    }

    /// Build estimates directly from trial summaries (e.g. a reported
    /// analysis) without raw data.
    pub fn from_summary(
        n: u64,
        theta1_hat: f64,
        theta2_hat: f64,
        sigma1_hat: f64,
        sigma2_hat: f64,
        gamma_hat: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, have: n });
        }
        if !(sigma1_hat >= 0.0) {
            return Err(Error::param("sigma1_hat", "must be non-negative"));
        }
        if !(sigma2_hat >= 0.0) {
            return Err(Error::param("sigma2_hat", "must be non-negative"));
        }
        if !(gamma_hat.abs() <= 1.0) {
            return Err(Error::param("gamma_hat", "must lie in [-1, 1]"));
        }
        Ok(Self {
            theta1_hat,
            theta2_hat,
            sigma1_sq_hat: sigma1_hat * sigma1_hat,
            sigma2_sq_hat: sigma2_hat * sigma2_hat,
            gamma_hat,
            n,
        })
    }

    /// The same estimates with variances over `divisor`; assumes `self`
    /// uses `n - 1`, as every constructor does.
    pub fn with_divisor(mut self, divisor: VarianceDivisor) -> Self {
        if divisor == VarianceDivisor::MaxLikelihood {
            let shrink = (self.n - 1) as f64 / self.n as f64;
            self.sigma1_sq_hat *= shrink;
            self.sigma2_sq_hat *= shrink;
        }
        self
    }

    pub fn sigma1_hat(&self) -> f64 {
        self.sigma1_sq_hat.sqrt()
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2_sq_hat.sqrt()
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}

/// Joint log-density of `n` independent bivariate normal observations,
/// evaluated from their running sums.
pub fn log_density(params: &TrueParams, stats: &SufficientStats) -> Result<f64> {
    if stats.n < 1 {
        return Err(Error::InsufficientData { needed: 1, have: 0 });
    }
    if !(params.gamma.abs() < 1.0) {
        return Err(Error::param("gamma", "log-density needs |gamma| < 1"));
    }
    let n = stats.n as f64;
    let (v1, v2) = (params.sigma1 * params.sigma1, params.sigma2 * params.sigma2);
    let det = v1 * v2 * (1.0 - params.gamma * params.gamma);
    let (d11, d22, d12) = stats.deviations_about(params.theta1, params.theta2);
    let quad = v2 * d11 + v1 * d22 - 2.0 * params.gamma * params.sigma1 * params.sigma2 * d12;
    Ok(-n * (2.0 * PI).ln() - 0.5 * n * det.ln() - quad / (2.0 * det))
}
