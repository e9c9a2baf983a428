use std::f64::consts::PI;

use super::normal::{normal_cdf, normal_quantile};
use super::special::{inc_beta, ln_gamma};
use crate::error::{Error, Result};

// Above this many degrees of freedom the incomplete-beta route gets slow and
// a corrected normal approximation is accurate to O(1/df^2).
const LARGE_DF: f64 = 4e5;

fn check_df(df: f64) -> Result<()> {
    if df > 0.0 && !df.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidDegreesOfFreedom(df))
    }
}

pub fn t_pdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    let ln = ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * PI).ln()
        - 0.5 * (df + 1.0) * (x * x / df).ln_1p();
    Ok(ln.exp())
}

/// `P(|T| > |x|) / 2`, the one-sided tail beyond `|x|`.
fn t_tail(x: f64, df: f64) -> f64 {
    if df > LARGE_DF {
        let v = 1.0 / (4.0 * df);
        let z = x.abs() * (1.0 - v) / (1.0 + x * x * 2.0 * v).sqrt();
        return normal_cdf(-z);
    }
    let x2 = x * x;
    let denom = df + x2;
    0.5 * inc_beta(df / denom, x2 / denom, 0.5 * df, 0.5)
}

/// Student-t distribution function for real `df > 0`.
pub fn t_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x == 0.0 {
        return Ok(0.5);
    }
    let tail = t_tail(x, df);
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

/// Inverse of [`t_cdf`] by bracketed, safeguarded Newton iteration.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (q, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };

    // t quantiles dominate normal ones in magnitude
    let mut lo = 0.0_f64;
    let mut hi = normal_quantile(1.0 - q)?.max(1.0);
    while t_tail(hi, df) > q {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(sign * f64::INFINITY);
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = t_tail(x, df) - q;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = t_pdf(x, df)?;
        let newton = x + f / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - x).abs() <= 1e-14 * x.abs().max(1.0);
        x = next;
        if done || hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(sign * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_reference_points() {
        assert_eq!(t_cdf(0.0, 3.7).unwrap(), 0.5);
        assert_abs_diff_eq!(t_cdf(2.144_787, 14.0).unwrap(), 0.975, epsilon = 1e-7);
        // Cauchy: F(1) = 3/4
        assert_abs_diff_eq!(t_cdf(1.0, 1.0).unwrap(), 0.75, epsilon = 1e-14);
        // df = 2 has a closed form: 1/2 + x / (2 sqrt(2 + x^2))
        let x = 1.3_f64;
        let exact = 0.5 + x / (2.0 * (2.0 + x * x).sqrt());
        assert_abs_diff_eq!(t_cdf(x, 2.0).unwrap(), exact, epsilon = 1e-14);
    }

    #[test]
    fn normal_limit() {
        for &x in &[-2.5, -0.4, 0.8, 1.96] {
            assert_abs_diff_eq!(t_cdf(x, 1e8).unwrap(), normal_cdf(x), epsilon = 1e-6);
        }
        assert_abs_diff_eq!(t_quantile(0.975, 1e8).unwrap(), 1.959_964, epsilon = 1e-4);
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(t_quantile(0.5, 9.0).unwrap(), 0.0);
        assert_abs_diff_eq!(t_quantile(0.975, 14.0).unwrap(), 2.144_787, epsilon = 1e-6);
        assert_abs_diff_eq!(t_quantile(0.025, 14.0).unwrap(), -2.144_787, epsilon = 1e-6);
        // Cauchy quantile tan(pi (p - 1/2))
        let p = 0.9;
        assert_abs_diff_eq!(
            t_quantile(p, 1.0).unwrap(),
            (PI * (p - 0.5)).tan(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(t_cdf(1.0, 0.0).is_err());
        assert!(t_cdf(1.0, -2.0).is_err());
        assert!(t_quantile(0.0, 5.0).is_err());
        assert!(t_quantile(1.0, 5.0).is_err());
        assert!(t_quantile(0.3, 0.0).is_err());
    }
}
