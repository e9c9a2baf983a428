//! Naive and corrected confidence intervals.

use serde::{Deserialize, Serialize};

use crate::corrections::{critical_value, Correction, DfMode};
use crate::error::{Error, Result};
use crate::model::Estimates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Naive,
    NaiveStudent,
    CorrectedNormal,
    CorrectedStudentN,
    CorrectedStudentARho,
}

impl IntervalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalMethod::Naive => "naive",
            IntervalMethod::NaiveStudent => "naive_t",
            IntervalMethod::CorrectedNormal => "corrected_normal",
            IntervalMethod::CorrectedStudentN => "corrected_t_n",
            IntervalMethod::CorrectedStudentARho => "corrected_t_arho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn shifted(
    center: f64,
    scale: f64,
    corr: &Correction,
    crit: f64,
    alpha: f64,
    method: IntervalMethod,
) -> Interval {
    let mid = center + scale * corr.mu_hat;
    let half = scale * corr.tau_hat * crit;
    Interval {
        lo: mid - half,
        hi: mid + half,
        level: 1.0 - alpha,
        method,
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// Corrected interval for the primary mean with known `sigma1`; `corr`
/// must come from [`build_primary_correction`](crate::build_primary_correction).
pub fn ci_primary(
    estimates: &Estimates,
    sigma1: f64,
    corr: &Correction,
    alpha: f64,
) -> Result<Interval> {
    let scale = positive("sigma1", sigma1)? / estimates.sqrt_n();
    let z = critical_value(DfMode::Normal, f64::INFINITY, alpha)?;
    Ok(shifted(
        estimates.theta1_hat,
        scale,
        corr,
        z,
        alpha,
        IntervalMethod::CorrectedNormal,
    ))
}

/// Corrected interval for the secondary mean with known `sigma2` (cases C0,
/// C1), using normal quantiles.
pub fn ci_secondary_known(
    estimates: &Estimates,
    sigma2: f64,
    corr: &Correction,
    alpha: f64,
) -> Result<Interval> {
    if corr.case.estimates_sigma2() {
        return Err(Error::param("case", "known-sigma2 interval needs case c0 or c1"));
    }
    let scale = positive("sigma2", sigma2)? / estimates.sqrt_n();
    let z = critical_value(DfMode::Normal, f64::INFINITY, alpha)?;
    Ok(shifted(
        estimates.theta2_hat,
        scale,
        corr,
        z,
        alpha,
        IntervalMethod::CorrectedNormal,
    ))
}

/// Corrected interval for the secondary mean studentised by `sigma2_hat`
/// (cases C2, C3), with t quantiles on `N` or `a / rho_hat^2` degrees of
/// freedom.
pub fn ci_secondary_unknown(
    estimates: &Estimates,
    corr: &Correction,
    alpha: f64,
    df_mode: DfMode,
) -> Result<Interval> {
    if !corr.case.estimates_sigma2() {
        return Err(Error::param("case", "estimated-sigma2 interval needs case c2 or c3"));
    }
    let s2 = estimates.sigma2_hat();
    if !(s2 > 0.0) {
        return Err(Error::Degenerate("sigma2_hat is zero".into()));
    }
    let method = match df_mode {
        DfMode::Normal => IntervalMethod::CorrectedNormal,
        DfMode::StudentN => IntervalMethod::CorrectedStudentN,
        DfMode::StudentARho => IntervalMethod::CorrectedStudentARho,
    };
    let crit = critical_value(df_mode, corr.df(df_mode, estimates.n), alpha)?;
    Ok(shifted(
        estimates.theta2_hat,
        s2 / estimates.sqrt_n(),
        corr,
        crit,
        alpha,
        method,
    ))
}

/// Uncorrected normal interval `theta2_hat ± z sigma / sqrt(N)`.
pub fn ci_naive(estimates: &Estimates, sigma2: f64, alpha: f64) -> Result<Interval> {
    let scale = positive("sigma2", sigma2)? / estimates.sqrt_n();
    let z = critical_value(DfMode::Normal, f64::INFINITY, alpha)?;
    Ok(Interval {
        lo: estimates.theta2_hat - z * scale,
        hi: estimates.theta2_hat + z * scale,
        level: 1.0 - alpha,
        method: IntervalMethod::Naive,
    })
}

/// Uncorrected t interval `theta2_hat ± c sigma2_hat / sqrt(N)`.
pub fn ci_naive_t(estimates: &Estimates, alpha: f64, df: f64) -> Result<Interval> {
    let scale = positive("sigma2_hat", estimates.sigma2_hat())? / estimates.sqrt_n();
    let c = critical_value(DfMode::StudentN, df, alpha)?;
    Ok(Interval {
        lo: estimates.theta2_hat - c * scale,
        hi: estimates.theta2_hat + c * scale,
        level: 1.0 - alpha,
        method: IntervalMethod::NaiveStudent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrections::Case;
    use approx::assert_abs_diff_eq;

    const Z975: f64 = 1.959_963_984_540_054;

    fn corr(case: Case, mu: f64, tau: f64) -> Correction {
        Correction {
            mu_hat: mu,
            tau_hat: tau,
            ..Correction::identity(case, 5.495, 0.572_188)
        }
    }

    fn est(n: u64, t1: f64, t2: f64, s2: f64) -> Estimates {
        Estimates::from_summary(n, t1, t2, 0.5, s2, 0.4).unwrap()
    }

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn primary_interval() {
        let e = est(25, 0.6, 0.0, 1.0);
        let plain = ci_primary(&e, 1.0, &corr(Case::C0, 0.0, 1.0), 0.05).unwrap();
        assert_abs_diff_eq!(plain.lo, 0.6 - Z975 * 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(plain.hi, 0.6 + Z975 * 0.2, epsilon = 1e-12);
        let ci = ci_primary(&e, 1.0, &corr(Case::C0, 0.1, 1.01), 0.05).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.224_087, epsilon = 1e-6);
        assert_abs_diff_eq!(ci.hi, 1.015_913, epsilon = 1e-6);
        assert_abs_diff_eq!(ci.width(), 2.0 * 0.2 * 1.01 * Z975, epsilon = 1e-12);
        assert!(ci_primary(&e, 1.0, &corr(Case::C0, 0.1, 1.01), 1.5).is_err());
    }

    #[test]
    fn secondary_known_interval() {
        let c = corr(Case::C1, -0.149_110, 1.011_056);
        let e = est(14, 0.3, 0.07, 0.1);
        let ci = ci_secondary_known(&e, 0.1, &c, 0.05).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.013_053, epsilon = 1e-6);
        assert_abs_diff_eq!(ci.hi, 0.118_976, epsilon = 1e-6);
        let moved = ci_secondary_known(&est(14, 0.3, 1.07, 0.1), 0.1, &c, 0.05).unwrap();
        assert_abs_diff_eq!(moved.lo - ci.lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moved.hi - ci.hi, 1.0, epsilon = 1e-12);

        let naive = ci_naive(&e, 0.1, 0.05).unwrap();
        let plain = ci_secondary_known(&e, 0.1, &corr(Case::C1, 0.0, 1.0), 0.05).unwrap();
        assert_abs_diff_eq!(plain.lo, naive.lo, epsilon = 1e-15);
        assert_abs_diff_eq!(plain.hi, naive.hi, epsilon = 1e-15);
        assert!(ci_secondary_known(&e, 0.1, &corr(Case::C3, 0.0, 1.0), 0.05).is_err());
    }

    #[test]
    fn secondary_unknown_interval_reanalysis() {
        let e = est(14, 0.3, 0.07, 0.1);
        let ci = ci_secondary_unknown(&e, &corr(Case::C3, -0.149_110, 1.011_056), 0.05, DfMode::StudentN)
            .unwrap();
        assert_eq!((round3(ci.lo), round3(ci.hi)), (0.008, 0.124));
        let ci = ci_secondary_unknown(&e, &corr(Case::C3, -0.298_220, 1.043_520), 0.05, DfMode::StudentN)
            .unwrap();
        assert_eq!((round3(ci.lo), round3(ci.hi)), (0.002, 0.122));

        let plain = ci_secondary_unknown(&e, &corr(Case::C3, 0.0, 1.0), 0.05, DfMode::StudentN).unwrap();
        let t = ci_naive_t(&e, 0.05, 14.0).unwrap();
        assert_abs_diff_eq!(plain.lo, t.lo, epsilon = 1e-15);
        assert_abs_diff_eq!(plain.hi, t.hi, epsilon = 1e-15);
    }

    #[test]
    fn secondary_unknown_rejects_degenerate() {
        let e = est(14, 0.3, 0.07, 0.0);
        assert!(ci_secondary_unknown(&e, &corr(Case::C3, 0.0, 1.0), 0.05, DfMode::StudentN).is_err());
    }

    #[test]
    fn naive_interval() {
        let e = est(14, 0.3, 0.07, 0.1);
        let ci = ci_naive(&e, 0.1, 0.05).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.017_618, epsilon = 1e-6);
        assert_abs_diff_eq!(ci.hi, 0.122_382, epsilon = 1e-6);
        assert_eq!((round3(ci.lo), round3(ci.hi)), (0.018, 0.122));
        assert!(ci.contains(0.07));

        let ci = ci_naive(&est(4, 0.0, 0.0, 2.0), 2.0, 0.05).unwrap();
        assert_abs_diff_eq!(ci.lo, -Z975, epsilon = 1e-12);
        assert_abs_diff_eq!(ci.hi, Z975, epsilon = 1e-12);
    }
}
