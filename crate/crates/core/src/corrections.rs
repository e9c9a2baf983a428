//! Mean and variance corrections for the secondary-mean pivot.
//!
//! With `rho10` the `theta1`-derivative of the design's `rho`, the mean
//! correction is `kappa = -sigma1 * gamma * rho10` (or `-sigma1 * rho10` for
//! the primary mean), the variance correction is `m = kappa^2`, and both
//! enter the pivot through the capped plug-ins `mu_hat` and `tau_hat`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::designs::DesignSpec;
use crate::distributions::{normal_quantile, t_quantile};
use crate::error::{Error, Result};
use crate::model::Estimates;

/// Which covariance parameters are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Full covariance known.
    C0,
    /// `sigma1`, `sigma2` known; `gamma` estimated.
    C1,
    /// `gamma` known; both standard deviations estimated.
    C2,
    /// Everything estimated.
    C3,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::C0 => "c0",
            Case::C1 => "c1",
            Case::C2 => "c2",
            Case::C3 => "c3",
        }
    }

    /// Whether the pivot is studentised by `sigma2_hat`.
    pub fn estimates_sigma2(&self) -> bool {
        matches!(self, Case::C2 | Case::C3)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference distribution for a corrected pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfMode {
    Normal,
    /// Student-t with `N` degrees of freedom.
    StudentN,
    /// Student-t with `a / rho_hat^2` degrees of freedom.
    StudentARho,
}

impl DfMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DfMode::Normal => "normal",
            DfMode::StudentN => "t_n",
            DfMode::StudentARho => "t_arho",
        }
    }
}

/// Source of `sigma1` inside `rho` and `rho10` (only the triangular test's
/// `rho` depends on it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSigma {
    TrueValue,
    Estimated,
}

impl RhoSigma {
    pub fn default_for(design: &DesignSpec) -> Self {
        if design.rho_uses_sigma1() {
            RhoSigma::TrueValue
        } else {
            RhoSigma::Estimated
        }
    }
}

/// Covariance parameters treated as known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownParams {
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub gamma: Option<f64>,
}

impl KnownParams {
    pub fn all(sigma1: f64, sigma2: f64, gamma: f64) -> Self {
        Self {
            sigma1: Some(sigma1),
            sigma2: Some(sigma2),
            gamma: Some(gamma),
        }
    }

    fn require(value: Option<f64>, case: Case, field: &'static str) -> Result<f64> {
        value.ok_or(Error::MissingKnown {
            case: case.as_str(),
            field,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub kappa_hat: f64,
    pub m_hat: f64,
    pub mu_hat: f64,
    pub tau_hat: f64,
    /// `rho` at the estimates; gives the `a / rho_hat^2` degrees of freedom.
    pub rho_hat: f64,
    pub case: Case,
    pub a: f64,
}

impl Correction {
    /// No correction: `mu_hat = 0`, `tau_hat = 1`.
    pub fn identity(case: Case, a: f64, rho_hat: f64) -> Self {
        Self {
            kappa_hat: 0.0,
            m_hat: 0.0,
            mu_hat: 0.0,
            tau_hat: 1.0,
            rho_hat,
            case,
            a,
        }
    }

    fn from_kappa(kappa_hat: f64, case: Case, a: f64, rho_hat: f64) -> Self {
        let m_hat = m_value(kappa_hat);
        Self {
            kappa_hat,
            m_hat,
            mu_hat: mu_hat(kappa_hat, a),
            tau_hat: tau_hat(m_hat, a),
            rho_hat,
            case,
            a,
        }
    }

    /// Degrees of freedom for a Student-t mode; infinite for `Normal`.
    pub fn df(&self, mode: DfMode, n: u64) -> f64 {
        match mode {
            DfMode::Normal => f64::INFINITY,
            DfMode::StudentN => n as f64,
            DfMode::StudentARho => self.a / (self.rho_hat * self.rho_hat),
        }
    }
}

/// A renormalised pivot and its reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotValue {
    pub z: f64,
    pub df_mode: DfMode,
    pub df: f64,
}

impl PivotValue {
    /// Two-sided critical value `c` with `P(|Z| <= c) = 1 - alpha`.
    pub fn critical(&self, alpha: f64) -> Result<f64> {
        critical_value(self.df_mode, self.df, alpha)
    }
}

/// Upper `alpha/2` quantile of the normal or of a t with `df` degrees.
pub fn critical_value(mode: DfMode, df: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    match mode {
        DfMode::Normal => normal_quantile(1.0 - alpha / 2.0),
        DfMode::StudentN | DfMode::StudentARho => t_quantile(1.0 - alpha / 2.0, df),
    }
}

// 0 * inf must read as "no correction", not NaN
fn signed_product(factors: &[f64]) -> f64 {
    if factors.iter().any(|&f| f == 0.0) {
        0.0
    } else {
        factors.iter().product()
    }
}

/// Mean correction for the primary pivot: `-sigma1 * rho10`.
pub fn kappa_primary(sigma1: f64, rho10: f64) -> f64 {
    -signed_product(&[sigma1, rho10])
}

/// Mean correction for the secondary pivot: `-sigma1 * gamma * rho10`.
pub fn kappa_secondary(sigma1: f64, gamma: f64, rho10: f64) -> f64 {
    -signed_product(&[sigma1, gamma, rho10])
}

/// Variance correction `m = kappa^2`.
pub fn m_value(kappa: f64) -> f64 {
    kappa * kappa
}

/// Capped mean plug-in: `kappa / sqrt(a)` while `|kappa| <= a^{1/6} / ln a`,
/// otherwise `±a^{-1/3} / ln a`.
pub fn mu_hat(kappa_hat: f64, a: f64) -> f64 {
    let ln_a = a.ln();
    let threshold = a.powf(1.0 / 6.0) / ln_a;
    if kappa_hat.is_finite() && kappa_hat.abs() <= threshold {
        kappa_hat / a.sqrt()
    } else {
        (a.powf(-1.0 / 3.0) / ln_a).copysign(kappa_hat)
    }
}

/// Capped variance plug-in: `sqrt(1 + m / a)` while `m <= sqrt(a) / ln a`,
/// otherwise 1.
pub fn tau_hat(m_hat: f64, a: f64) -> f64 {
    if m_hat.abs() <= a.sqrt() / a.ln() {
        (1.0 + m_hat / a).sqrt()
    } else {
        1.0
    }
}

/// Uncorrected pivot `sqrt(N) (theta2 - theta2_hat) / sigma2`, where the
/// `sigma2` slot holds the true value (C0/C1) or `sigma2_hat` (C2/C3).
pub fn raw_pivot_secondary(theta2: f64, estimates: &Estimates, sigma2: f64) -> Result<f64> {
    if estimates.n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: estimates.n,
        });
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate(format!("sigma2 slot must be positive, got {sigma2}")));
    }
    Ok(estimates.sqrt_n() * (theta2 - estimates.theta2_hat) / sigma2)
}

/// `(raw - mu_hat) / tau_hat`.
///
/// Known-`sigma2` cases (C0, C1) are always referred to the normal; for C2
/// and C3 the requested `df_mode` is used.
pub fn corrected_pivot(raw: f64, corr: &Correction, df_mode: DfMode, n: u64) -> PivotValue {
    let mode = if corr.case.estimates_sigma2() {
        df_mode
    } else {
        DfMode::Normal
    };
    PivotValue {
        z: (raw - corr.mu_hat) / corr.tau_hat,
        df_mode: mode,
        df: corr.df(mode, n),
    }
}

fn rho_sigma1(
    design: &DesignSpec,
    estimates: &Estimates,
    known: &KnownParams,
    rho_sigma: RhoSigma,
    case: Case,
) -> Result<f64> {
    if !design.rho_uses_sigma1() {
        // unused by rho; any positive value will do
        return Ok(known.sigma1.unwrap_or(1.0));
    }
    match rho_sigma {
        RhoSigma::TrueValue => KnownParams::require(known.sigma1, case, "sigma1"),
        RhoSigma::Estimated => {
            let s = estimates.sigma1_hat();
            if s > 0.0 {
                Ok(s)
            } else {
                Err(Error::Degenerate("sigma1_hat is zero inside rho".into()))
            }
        }
    }
}

/// Correction for the secondary-mean pivot under covariance case `case`.
///
/// `rho10` and `rho` are evaluated at `theta1_hat`; the `sigma1` and
/// `gamma` factors of `kappa` are the known or estimated values the case
/// prescribes.
pub fn build_correction(
    case: Case,
    design: &DesignSpec,
    estimates: &Estimates,
    known: &KnownParams,
    rho_sigma: RhoSigma,
) -> Result<Correction> {
    let (sigma1, gamma) = match case {
        Case::C0 => {
            KnownParams::require(known.sigma2, case, "sigma2")?;
            (
                KnownParams::require(known.sigma1, case, "sigma1")?,
                KnownParams::require(known.gamma, case, "gamma")?,
            )
        }
        Case::C1 => {
            KnownParams::require(known.sigma2, case, "sigma2")?;
            (
                KnownParams::require(known.sigma1, case, "sigma1")?,
                estimates.gamma_hat,
            )
        }
        Case::C2 => (
            estimates.sigma1_hat(),
            KnownParams::require(known.gamma, case, "gamma")?,
        ),
        Case::C3 => (estimates.sigma1_hat(), estimates.gamma_hat),
    };
    let s_rho = rho_sigma1(design, estimates, known, rho_sigma, case)?;
    let rho10 = design.rho10(estimates.theta1_hat, s_rho);
    let rho_hat = design.rho(estimates.theta1_hat, s_rho);
    Ok(Correction::from_kappa(
        kappa_secondary(sigma1, gamma, rho10),
        case,
        design.a(),
        rho_hat,
    ))
}

/// Correction for the primary-mean pivot with known `sigma1`.
pub fn build_primary_correction(
    design: &DesignSpec,
    estimates: &Estimates,
    sigma1: f64,
) -> Result<Correction> {
    if !(sigma1 > 0.0) {
        return Err(Error::param("sigma1", "must be positive"));
    }
    let rho10 = design.rho10(estimates.theta1_hat, sigma1);
    let rho_hat = design.rho(estimates.theta1_hat, sigma1);
    Ok(Correction::from_kappa(
        kappa_primary(sigma1, rho10),
        Case::C0,
        design.a(),
        rho_hat,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{BoundaryScale, TRIANGULAR_OVERSHOOT};
    use approx::assert_abs_diff_eq;

    fn tri() -> DesignSpec {
        DesignSpec::triangular(5.495, 0.2726, 2, TRIANGULAR_OVERSHOOT, BoundaryScale::Known).unwrap()
    }

    fn trial_estimates(gamma_hat: f64) -> Estimates {
        Estimates::from_summary(14, 0.3, 0.07, 0.5, 0.1, gamma_hat).unwrap()
    }

    #[test]
    fn kappa_values() {
        assert_abs_diff_eq!(kappa_primary(1.0, 0.645_497), -0.645_497, epsilon = 1e-12);
        assert_eq!(kappa_primary(1.3, 0.0), 0.0);
        assert_eq!(kappa_primary(2.0, -0.5), 1.0);
        assert_abs_diff_eq!(kappa_secondary(0.5, 0.8, 1.747_676), -0.699_070, epsilon = 1e-6);
        assert_abs_diff_eq!(kappa_secondary(0.5, 0.4, 1.747_676), -0.349_535, epsilon = 1e-6);
        assert_eq!(kappa_secondary(0.7, 0.0, 1.2), 0.0);
        assert_eq!(kappa_secondary(0.7, 0.0, f64::INFINITY), 0.0);
        assert_eq!(kappa_secondary(0.7, 0.5, f64::INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn m_values() {
        assert_abs_diff_eq!(m_value(-0.699_070), 0.488_699, epsilon = 1e-6);
        assert_eq!(m_value(0.0), 0.0);
        assert_eq!(m_value(3.0), 9.0);
    }

    #[test]
    fn mu_hat_branches() {
        assert_abs_diff_eq!(mu_hat(0.3, 10.0), 0.094_868, epsilon = 1e-6);
        let cap = 10f64.powf(-1.0 / 3.0) / 10f64.ln();
        assert_abs_diff_eq!(mu_hat(5.0, 10.0), cap, epsilon = 1e-15);
        assert_abs_diff_eq!(cap, 0.201_581, epsilon = 1e-6);
        assert_eq!(mu_hat(-5.0, 10.0), -cap);
        assert_eq!(mu_hat(0.0, 7.0), 0.0);
        assert_eq!(mu_hat(f64::NEG_INFINITY, 10.0), -cap);
    }

    #[test]
    fn tau_hat_branches() {
        assert_abs_diff_eq!(tau_hat(0.09, 10.0), 1.004_490, epsilon = 1e-6);
        assert_eq!(tau_hat(2.0, 10.0), 1.0);
        assert_eq!(tau_hat(0.0, 3.0), 1.0);
        assert_eq!(tau_hat(f64::INFINITY, 10.0), 1.0);
    }

    #[test]
    fn raw_pivot_values() {
        let e = Estimates::from_summary(14, 0.0, 0.08, 1.0, 0.1, 0.0).unwrap();
        assert_abs_diff_eq!(raw_pivot_secondary(0.07, &e, 0.1).unwrap(), -0.374_166, epsilon = 1e-6);
        assert_eq!(raw_pivot_secondary(0.08, &e, 0.1).unwrap(), 0.0);
        let e = Estimates::from_summary(4, 0.0, 0.0, 1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(raw_pivot_secondary(1.0, &e, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(raw_pivot_secondary(1.0, &e, 0.0).is_err());
    }

    #[test]
    fn corrected_pivot_values() {
        let corr = Correction {
            mu_hat: -0.149_110,
            tau_hat: 1.011_056,
            ..Correction::identity(Case::C3, 5.495, 0.572_188)
        };
        let p = corrected_pivot(-0.374_166, &corr, DfMode::StudentN, 14);
        assert_abs_diff_eq!(p.z, -0.222_595, epsilon = 1e-6);
        assert_eq!((p.df_mode, p.df), (DfMode::StudentN, 14.0));
        assert_eq!(corrected_pivot(corr.mu_hat, &corr, DfMode::StudentN, 14).z, 0.0);

        let c1 = Correction::identity(Case::C1, 10.0, 1.0);
        let p = corrected_pivot(1.234, &c1, DfMode::StudentN, 30);
        assert_eq!((p.z, p.df_mode), (1.234, DfMode::Normal));
    }

    #[test]
    fn triangular_reanalysis_chain() {
        let c = build_correction(
            Case::C3,
            &tri(),
            &trial_estimates(0.8),
            &KnownParams {
                sigma1: Some(0.5),
                ..Default::default()
            },
            RhoSigma::TrueValue,
        )
        .unwrap();
        assert_abs_diff_eq!(c.kappa_hat, -0.699_070, epsilon = 1e-6);
        assert_abs_diff_eq!(c.mu_hat, -0.298_220, epsilon = 1e-6);
        assert_abs_diff_eq!(c.tau_hat, 1.043_520, epsilon = 1e-6);
        assert_abs_diff_eq!(c.rho_hat, 0.572_188, epsilon = 1e-6);
        assert_abs_diff_eq!(c.df(DfMode::StudentARho, 14), 5.495 / 0.3274, epsilon = 1e-9);
    }

    #[test]
    fn uncorrelated_c1_vanishes() {
        let d = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
        let e = Estimates::from_summary(20, 0.6, 1.0, 1.0, 1.0, 0.0).unwrap();
        let c = build_correction(Case::C1, &d, &e, &KnownParams::all(1.0, 1.0, 0.0), RhoSigma::Estimated)
            .unwrap();
        assert_eq!((c.kappa_hat, c.mu_hat, c.tau_hat), (0.0, 0.0, 1.0));
    }

    #[test]
    fn cap_engages_near_zero_theta1() {
        // a tiny eps puts theta1_hat = 1e-6 inside the sqrt-branch
        let d = DesignSpec::sprt(10.0, 1e-9, 5.0).unwrap();
        let e = Estimates::from_summary(40, 1e-6, 1.0, 1.0, 1.0, 0.5).unwrap();
        let c = build_correction(Case::C3, &d, &e, &KnownParams::default(), RhoSigma::Estimated).unwrap();
        assert_abs_diff_eq!(c.mu_hat, -(10f64.powf(-1.0 / 3.0) / 10f64.ln()), epsilon = 1e-15);
        assert_eq!(c.tau_hat, 1.0);
    }

    #[test]
    fn missing_known_values() {
        let d = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
        let e = Estimates::from_summary(20, 0.6, 1.0, 1.0, 1.0, 0.3).unwrap();
        let none = KnownParams::default();
        for case in [Case::C0, Case::C1, Case::C2] {
            assert!(matches!(
                build_correction(case, &d, &e, &none, RhoSigma::Estimated),
                Err(Error::MissingKnown { .. })
            ));
        }
        assert!(build_correction(Case::C3, &d, &e, &none, RhoSigma::Estimated).is_ok());
        // triangular rho needs the true sigma1 by default
        assert!(build_correction(Case::C3, &tri(), &e, &none, RhoSigma::TrueValue).is_err());
    }

    #[test]
    fn c0_matches_c3_at_true_values() {
        let d = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
        let e = Estimates::from_summary(25, 0.6, 1.0, 1.2, 0.9, 0.4).unwrap();
        let c0 = build_correction(Case::C0, &d, &e, &KnownParams::all(1.2, 0.9, 0.4), RhoSigma::Estimated)
            .unwrap();
        let c3 = build_correction(Case::C3, &d, &e, &KnownParams::default(), RhoSigma::Estimated).unwrap();
        assert_abs_diff_eq!(c0.kappa_hat, c3.kappa_hat, epsilon = 1e-14);
        assert_abs_diff_eq!(c0.mu_hat, c3.mu_hat, epsilon = 1e-14);
        assert_abs_diff_eq!(c0.tau_hat, c3.tau_hat, epsilon = 1e-14);
    }

    #[test]
    fn known_zero_gamma_leaves_pivot_unchanged() {
        let d = DesignSpec::rst(10.0, 0.1, 2.0).unwrap();
        let e = Estimates::from_summary(25, 0.6, 1.0, 1.2, 0.9, 0.7).unwrap();
        let known = KnownParams {
            gamma: Some(0.0),
            ..Default::default()
        };
        let c = build_correction(Case::C2, &d, &e, &known, RhoSigma::Estimated).unwrap();
        let p = corrected_pivot(-1.7, &c, DfMode::StudentN, e.n);
        assert_eq!(p.z, -1.7);
    }

    #[test]
    fn primary_correction() {
        let d = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
        let e = Estimates::from_summary(17, 0.6, 1.0, 1.0, 1.0, 0.0).unwrap();
        let c = build_primary_correction(&d, &e, 1.0).unwrap();
        assert_abs_diff_eq!(c.kappa_hat, -0.645_497, epsilon = 1e-6);
        // |kappa| exceeds a^{1/6} / ln a = 0.637457, so the cap applies
        assert_abs_diff_eq!(c.mu_hat, -0.201_582, epsilon = 1e-6);
        let e = Estimates::from_summary(17, 0.9, 1.0, 1.0, 1.0, 0.0).unwrap();
        let c = build_primary_correction(&d, &e, 1.0).unwrap();
        assert_abs_diff_eq!(c.kappa_hat, -0.527_046, epsilon = 1e-6);
        assert_abs_diff_eq!(c.mu_hat, -0.527_046 / 10f64.sqrt(), epsilon = 1e-6);
    }
}
