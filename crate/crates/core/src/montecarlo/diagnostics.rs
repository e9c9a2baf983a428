use serde::{Deserialize, Serialize};

use super::{mean_se, par_replicates, Scenario};
use crate::corrections::{build_correction, corrected_pivot, Case, DfMode, KnownParams, RhoSigma};
use crate::designs::{DesignKind, DesignSpec};
use crate::distributions::{t_cdf, RngStream};
use crate::error::{Error, Result};
use crate::model::{Estimates, TrueParams};

/// Monte Carlo check of one expectation identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticCheck {
    pub name: String,
    pub estimate: f64,
    pub target: f64,
    pub se: f64,
    /// `(estimate - target) / se`.
    pub z: f64,
    /// Extra slack beyond 4 se, for checks that only hold to an order in `a`.
    pub allowance: f64,
    pub pass: bool,
}

impl DiagnosticCheck {
    fn new(name: &str, values: &[f64], target: f64, allowance: f64) -> Self {
        let (estimate, se) = mean_se(values);
        let diff = estimate - target;
        Self {
            name: name.to_string(),
            estimate,
            target,
            se,
            z: diff / se,
            allowance,
            pass: diff.abs() <= 4.0 * se + allowance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub design: DesignKind,
    pub params: TrueParams,
    pub replicates: u64,
    pub seed: u64,
    pub expected_n: f64,
    pub checks: Vec<DiagnosticCheck>,
}

impl DiagnosticReport {
    pub fn check(&self, name: &str) -> Option<&DiagnosticCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

// per-replicate quantities, one column per check
struct Row {
    n: f64,
    sq: [f64; 2],
    fourth: [f64; 2],
    cross: f64,
    gamma: f64,
    theta: [f64; 2],
    var: [f64; 2],
}

/// Wald-type identities and estimator biases at the stopping time.
///
/// Checks, each against its target with a 4 se pass flag:
/// - `wald_sq_i`: mean of `sum (X_ij - theta_i)^2 / N` against `sigma_i^2`;
/// - `wald_fourth_i`: mean of `{sum (X_ij - theta_i)^2}^2 / N - sigma_i^4 N`
///   against `2 sigma_i^4`;
/// - `wald_cross`: mean of `sum (X_1j - theta_1)^2 sum (X_2j - theta_2)^2 / N
///   - sigma_1^2 sigma_2^2 N` against `2 gamma^2 sigma_1^2 sigma_2^2`;
/// - `gamma_bias`: mean of `gamma_hat - gamma + gamma (1 - gamma^2) / (2N)`
///   against 0;
/// - `theta_bias_i`, `sigma_sq_bias_i`: plain biases, allowed an extra
///   `sigma_i / sqrt(a)` and `sigma_i^2 / a` respectively.
pub fn wald_diagnostics(sc: &Scenario) -> Result<DiagnosticReport> {
    sc.validate()?;
    let p = sc.params;
    let sig = [p.sigma1, p.sigma2];
    let rows = par_replicates(sc.replicates, |r| {
        let mut rng = RngStream::new(sc.seed, r);
        let trial = sc.design.run_trial(&p, &mut rng)?;
        let est = Estimates::from_stats(&trial.stats)?;
        let n = trial.n as f64;
        let (d11, d22, _) = trial.stats.deviations_about(p.theta1, p.theta2);
        let d = [d11, d22];
        Ok(Row {
            n,
            sq: [d11 / n, d22 / n],
            fourth: [0, 1].map(|i| d[i] * d[i] / n - sig[i].powi(4) * n),
            cross: d11 * d22 / n - (p.sigma1 * p.sigma2).powi(2) * n,
            gamma: est.gamma_hat - p.gamma + p.gamma * (1.0 - p.gamma * p.gamma) / (2.0 * n),
            theta: [est.theta1_hat - p.theta1, est.theta2_hat - p.theta2],
            var: [
                est.sigma1_sq_hat - sig[0] * sig[0],
                est.sigma2_sq_hat - sig[1] * sig[1],
            ],
        })
    })?;

    let col = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let a = sc.design.a();
    let mut checks = Vec::new();
    for i in 0..2 {
        let s2 = sig[i] * sig[i];
        checks.push(DiagnosticCheck::new(&format!("wald_sq_{}", i + 1), &col(&|r| r.sq[i]), s2, 0.0));
    }
    for i in 0..2 {
        let s4 = sig[i].powi(4);
        checks.push(DiagnosticCheck::new(
            &format!("wald_fourth_{}", i + 1),
            &col(&|r| r.fourth[i]),
            2.0 * s4,
            0.0,
        ));
    }
    checks.push(DiagnosticCheck::new(
        "wald_cross",
        &col(&|r| r.cross),
        2.0 * (p.gamma * p.sigma1 * p.sigma2).powi(2),
        0.0,
    ));
    checks.push(DiagnosticCheck::new("gamma_bias", &col(&|r| r.gamma), 0.0, 0.0));
    for i in 0..2 {
        checks.push(DiagnosticCheck::new(
            &format!("theta_bias_{}", i + 1),
            &col(&|r| r.theta[i]),
            0.0,
            sig[i] / a.sqrt(),
        ));
    }
    for i in 0..2 {
        checks.push(DiagnosticCheck::new(
            &format!("sigma_sq_bias_{}", i + 1),
            &col(&|r| r.var[i]),
            0.0,
            sig[i] * sig[i] / a,
        ));
    }

    Ok(DiagnosticReport {
        design: sc.design.kind(),
        params: p,
        replicates: sc.replicates,
        seed: sc.seed,
        expected_n: mean_se(&col(&|r| r.n)).0,
        checks,
    })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &[f64], mut cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: u64,
    pub replicates: u64,
    pub statistic: f64,
    /// Asymptotic 1% critical value `1.6276 / sqrt(R)`.
    pub critical: f64,
    pub max_abs_mu_hat: f64,
    pub max_abs_tau_dev: f64,
    pub pass: bool,
}

/// Corrected C3 pivots `sqrt(n)(theta2 - theta2_hat) / sigma2_hat` from a
/// degenerate design that always stops at `n`, together with the largest
/// `|mu_hat|` and `|tau_hat - 1|` seen.
pub fn fixed_sample_pivots(
    params: &TrueParams,
    n: u64,
    replicates: u64,
    seed: u64,
) -> Result<(Vec<f64>, f64, f64)> {
    if n < 2 {
        return Err(Error::param("n", "fixed sample size must be at least 2"));
    }
    let a = 10.0;
    let eps_sq = a / n as f64;
    let design = DesignSpec::sprt(a, eps_sq, eps_sq)?;
    let known = KnownParams::all(params.sigma1, params.sigma2, params.gamma);
    let out = par_replicates(replicates, |r| {
        let mut rng = RngStream::new(seed, r);
        let trial = design.run_trial(params, &mut rng)?;
        let est = Estimates::from_stats(&trial.stats)?;
        let corr = build_correction(Case::C3, &design, &est, &known, RhoSigma::Estimated)?;
        let raw = est.sqrt_n() * (params.theta2 - est.theta2_hat) / est.sigma2_hat();
        let z = corrected_pivot(raw, &corr, DfMode::StudentN, est.n).z;
        Ok((z, corr.mu_hat.abs(), (corr.tau_hat - 1.0).abs()))
    })?;
    let mu = out.iter().map(|o| o.1).fold(0.0, f64::max);
    let tau = out.iter().map(|o| o.2).fold(0.0, f64::max);
    Ok((out.into_iter().map(|o| o.0).collect(), mu, tau))
}

/// KS test of the fixed-sample pivot against `t_{n-1}` at the 1% level.
pub fn fixed_sample_ks(params: &TrueParams, n: u64, replicates: u64, seed: u64) -> Result<KsResult> {
    let (z, mu, tau) = fixed_sample_pivots(params, n, replicates, seed)?;
    let df = (n - 1) as f64;
    let mut err = None;
    let statistic = ks_statistic(&z, |x| {
        t_cdf(x, df).unwrap_or_else(|e| {
            err = Some(e);
            f64::NAN
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    let critical = 1.6276 / (replicates as f64).sqrt();
    Ok(KsResult {
        n,
        replicates,
        statistic,
        critical,
        max_abs_mu_hat: mu,
        max_abs_tau_dev: tau,
        pass: statistic < critical,
    })
}
