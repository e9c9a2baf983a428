//! Stopping rules driven by the first component, and their limiting `rho`.
//!
//! The truncated SPRT and the repeated significance test stop at the first
//! `n >= m0` with `n q(mean1) >= a`, or at `m_max`. The triangular test looks
//! after every `group` observations and stops when the standardised partial
//! sum leaves the triangle formed by the two straight-line boundaries.

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_bivariate, RngStream};
use crate::error::{Error, Result};
use crate::model::{SufficientStats, TrueParams};

/// Overshoot adjustment for discretely monitored triangular boundaries.
pub const TRIANGULAR_OVERSHOOT: f64 = 0.583;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Sprt,
    Rst,
    Triangular,
}

impl DesignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignKind::Sprt => "sprt",
            DesignKind::Rst => "rst",
            DesignKind::Triangular => "triangular",
        }
    }
}

/// Scale used to standardise the partial sum in the triangular boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryScale {
    /// The known (planning) value of `sigma1`.
    Known,
    /// The running estimate with divisor `n - 1`, recomputed at each look.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    RejectH0,
    AcceptH0,
    TruncatedAtMax,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopDecision {
    pub stopped: bool,
    pub n: u64,
    pub verdict: Verdict,
}

impl StopDecision {
    fn go_on(n: u64) -> Self {
        Self {
            stopped: false,
            n,
            verdict: Verdict::NotApplicable,
        }
    }

    fn stop(n: u64, verdict: Verdict) -> Self {
        Self {
            stopped: true,
            n,
            verdict,
        }
    }
}

/// A completed trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub n: u64,
    pub stats: SufficientStats,
    pub verdict: Verdict,
}

/// An immutable stopping design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    kind: DesignKind,
    a: f64,
    eps_sq: f64,
    eps0_sq: f64,
    b: f64,
    group: u64,
    overshoot: f64,
    boundary_scale: BoundaryScale,
    m0: u64,
    m_max: u64,
}

fn floor_count(x: f64) -> u64 {
    // a/eps^2 is often an integer that rounding leaves a hair below
    (x + 1e-9).floor() as u64
}

impl DesignSpec {
    /// Truncated sequential probability ratio test, `q(y) = |y|`.
    pub fn sprt(a: f64, eps_sq: f64, eps0_sq: f64) -> Result<Self> {
        Self::truncated(DesignKind::Sprt, a, eps_sq, eps0_sq)
    }

    /// Repeated significance test, `q(y) = y^2`.
    pub fn rst(a: f64, eps_sq: f64, eps0_sq: f64) -> Result<Self> {
        Self::truncated(DesignKind::Rst, a, eps_sq, eps0_sq)
    }

    fn truncated(kind: DesignKind, a: f64, eps_sq: f64, eps0_sq: f64) -> Result<Self> {
        check_a(a)?;
        if !(eps_sq > 0.0 && eps_sq.is_finite()) {
            return Err(Error::param("eps2", "truncation parameter must be positive"));
        }
        if !(eps0_sq >= eps_sq && eps0_sq.is_finite()) {
            return Err(Error::param(
                "eps0sq",
                format!("eps0^2 = {eps0_sq} must not be below eps^2 = {eps_sq}"),
            ));
        }
        let m0 = floor_count(a / eps0_sq);
        let m_max = floor_count(a / eps_sq);
        if m0 < 2 {
            return Err(Error::InvalidDesign(format!(
                "initial sample size floor(a/eps0^2) = {m0} must be at least 2"
            )));
        }
        Ok(Self {
            kind,
            a,
            eps_sq,
            eps0_sq,
            // unused by this kind; finite so that designs compare equal
            b: 0.0,
            group: 1,
            overshoot: 0.0,
            boundary_scale: BoundaryScale::Known,
            m0,
            m_max,
        })
    }

    /// One-sided triangular test with looks every `group` observations.
    pub fn triangular(
        a: f64,
        b: f64,
        group: u64,
        overshoot: f64,
        boundary_scale: BoundaryScale,
    ) -> Result<Self> {
        check_a(a)?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("b", "slope must be positive"));
        }
        if group < 2 {
            return Err(Error::param("group", "group size must be at least 2"));
        }
        if !(overshoot >= 0.0 && overshoot.is_finite()) {
            return Err(Error::param("overshoot", "must be finite and non-negative"));
        }
        // the two boundaries meet at n = (a - overshoot) / b
        let apex = ((a - overshoot) / b).max(0.0);
        let looks = ((apex / group as f64) - 1e-12).ceil().max(1.0) as u64;
        Ok(Self {
            kind: DesignKind::Triangular,
            a,
            eps_sq: 0.0,
            eps0_sq: 0.0,
            b,
            group,
            overshoot,
            boundary_scale,
            m0: group,
            m_max: group * looks,
        })
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eps_sq(&self) -> Option<f64> {
        (self.kind != DesignKind::Triangular).then_some(self.eps_sq)
    }

    pub fn eps0_sq(&self) -> Option<f64> {
        (self.kind != DesignKind::Triangular).then_some(self.eps0_sq)
    }

    pub fn b(&self) -> Option<f64> {
        (self.kind == DesignKind::Triangular).then_some(self.b)
    }

    pub fn group(&self) -> u64 {
        self.group
    }

    pub fn overshoot(&self) -> f64 {
        self.overshoot
    }

    pub fn boundary_scale(&self) -> BoundaryScale {
        self.boundary_scale
    }

    pub fn m0(&self) -> u64 {
        self.m0
    }

    pub fn m_max(&self) -> u64 {
        self.m_max
    }

    /// Whether `rho` depends on `sigma1`.
    pub fn rho_uses_sigma1(&self) -> bool {
        self.kind == DesignKind::Triangular
    }

    pub fn q_value(&self, y: f64) -> f64 {
        match self.kind {
            DesignKind::Sprt => y.abs(),
            DesignKind::Rst => y * y,
            DesignKind::Triangular => (y - self.b).max(3.0 * self.b - y),
        }
    }

    /// Limit of `sqrt(a / N)` as `a` grows.
    pub fn rho(&self, theta1: f64, sigma1: f64) -> f64 {
        match self.kind {
            DesignKind::Sprt => theta1
                .abs()
                .sqrt()
                .min(self.eps0_sq.sqrt())
                .max(self.eps_sq.sqrt()),
            DesignKind::Rst => theta1.abs().min(self.eps0_sq.sqrt()).max(self.eps_sq.sqrt()),
            DesignKind::Triangular => self.q_value(theta1 / sigma1).sqrt(),
        }
    }

    /// Derivative of [`rho`](Self::rho) with respect to `theta1`.
    ///
    /// Zero on the clamped plateaus. At the triangular kink `y = 2b` the
    /// right derivative is used.
    pub fn rho10(&self, theta1: f64, sigma1: f64) -> f64 {
        match self.kind {
            DesignKind::Sprt => {
                let m = theta1.abs();
                if m > self.eps_sq && m < self.eps0_sq {
                    theta1.signum() / (2.0 * m.sqrt())
                } else if m == 0.0 && self.eps_sq == 0.0 {
                    f64::INFINITY.copysign(theta1)
                } else {
                    0.0
                }
            }
            DesignKind::Rst => {
                let m = theta1.abs();
                if m > self.eps_sq.sqrt() && m < self.eps0_sq.sqrt() {
                    theta1.signum()
                } else {
                    0.0
                }
            }
            DesignKind::Triangular => {
                let y = theta1 / sigma1;
                let slope = if y >= 2.0 * self.b { 1.0 } else { -1.0 };
                slope / (2.0 * sigma1 * self.q_value(y).sqrt())
            }
        }
    }

    /// Decide whether to stop after `stats.n` observations.
    ///
    /// `sigma1` is the known first-component standard deviation; only the
    /// triangular test with [`BoundaryScale::Known`] reads it.
    pub fn should_stop(&self, stats: &SufficientStats, sigma1: f64) -> Result<StopDecision> {
        let n = stats.n;
        if n < 1 {
            return Err(Error::InsufficientData { needed: 1, have: 0 });
        }
        match self.kind {
            DesignKind::Sprt | DesignKind::Rst => {
                if n < self.m0 {
                    return Ok(StopDecision::go_on(n));
                }
                let crossed = match self.kind {
                    // n q(S/n) >= a, written without the division
                    DesignKind::Sprt => stats.s1.abs() >= self.a,
                    _ => stats.s1 * stats.s1 / n as f64 >= self.a,
                };
                Ok(if crossed {
                    StopDecision::stop(n, Verdict::RejectH0)
                } else if n >= self.m_max {
                    StopDecision::stop(n, Verdict::TruncatedAtMax)
                } else {
                    StopDecision::go_on(n)
                })
            }
            DesignKind::Triangular => {
                // the estimated scale needs two observations before a look
                if n < 2 || n % self.group != 0 {
                    return Ok(StopDecision::go_on(n));
                }
                let z = self.standardised_sum(stats, sigma1)?;
                let nf = n as f64;
                if n >= self.m_max {
                    let verdict = if z >= 2.0 * self.b * nf {
                        Verdict::RejectH0
                    } else {
                        Verdict::AcceptH0
                    };
                    return Ok(StopDecision::stop(n, verdict));
                }
                let upper = self.a + self.b * nf - self.overshoot;
                let lower = -self.a + 3.0 * self.b * nf + self.overshoot;
                Ok(if z >= upper {
                    StopDecision::stop(n, Verdict::RejectH0)
                } else if z <= lower {
                    StopDecision::stop(n, Verdict::AcceptH0)
                } else {
                    StopDecision::go_on(n)
                })
            }
        }
    }

    fn standardised_sum(&self, stats: &SufficientStats, sigma1: f64) -> Result<f64> {
        let scale = match self.boundary_scale {
            BoundaryScale::Known => {
                if !(sigma1 > 0.0) {
                    return Err(Error::param("sigma1", "known boundary scale must be positive"));
                }
                sigma1
            }
            BoundaryScale::Estimated => stats.sd1()?,
        };
        Ok(if scale > 0.0 {
            stats.s1 / scale
        } else if stats.s1 == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(stats.s1)
        })
    }

    /// Run one trial, drawing observations from `next` until the rule stops.
    pub fn run_trial_with<F>(&self, sigma1: f64, mut next: F) -> Result<Trial>
    where
        F: FnMut() -> (f64, f64),
    {
        let mut stats = SufficientStats::new();
        loop {
            let (x1, x2) = next();
            stats.push(x1, x2);
            let decision = self.should_stop(&stats, sigma1)?;
            if decision.stopped {
                return Ok(Trial {
                    n: stats.n,
                    stats,
                    verdict: decision.verdict,
                });
            }
        }
    }

    /// Run one trial on bivariate normal data drawn from `rng`.
    pub fn run_trial(&self, params: &TrueParams, rng: &mut RngStream) -> Result<Trial> {
        params.validate()?;
        self.run_trial_with(params.sigma1, || sample_bivariate(rng, params))
    }
}

fn check_a(a: f64) -> Result<()> {
    if a >= 1.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::param("a", format!("boundary parameter must be >= 1, got {a}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sprt() -> DesignSpec {
        DesignSpec::sprt(10.0, 0.1, 5.0).unwrap()
    }

    fn rst() -> DesignSpec {
        DesignSpec::rst(10.0, 0.1, 2.0).unwrap()
    }

    fn tri(scale: BoundaryScale) -> DesignSpec {
        DesignSpec::triangular(5.495, 0.2726, 2, TRIANGULAR_OVERSHOOT, scale).unwrap()
    }

    fn stats_with_sum(n: u64, s1: f64) -> SufficientStats {
        SufficientStats {
            n,
            s1,
            ..Default::default()
        }
    }

    #[test]
    fn derived_sizes() {
        assert_eq!((sprt().m0(), sprt().m_max()), (2, 100));
        assert_eq!((rst().m0(), rst().m_max()), (5, 100));
        assert_eq!(tri(BoundaryScale::Known).m_max(), 20);
    }

    #[test]
    fn design_validation() {
        assert!(DesignSpec::sprt(0.5, 0.1, 5.0).is_err());
        assert!(DesignSpec::sprt(10.0, 0.1, 0.05).is_err());
        assert!(DesignSpec::sprt(10.0, 0.0, 5.0).is_err());
        // m0 = floor(10 / 6) = 1
        assert!(DesignSpec::sprt(10.0, 0.1, 6.0).is_err());
        assert!(DesignSpec::triangular(5.0, 0.0, 2, 0.583, BoundaryScale::Known).is_err());
        assert!(DesignSpec::triangular(5.0, 0.2, 1, 0.583, BoundaryScale::Known).is_err());
        // degenerate fixed-sample design is allowed
        let fixed = DesignSpec::sprt(10.0, 0.5, 0.5).unwrap();
        assert_eq!((fixed.m0(), fixed.m_max()), (20, 20));
    }

    #[test]
    fn q_values() {
        assert_eq!(sprt().q_value(0.5), 0.5);
        assert_eq!(rst().q_value(-0.5), 0.25);
        assert_abs_diff_eq!(tri(BoundaryScale::Known).q_value(0.6), 0.3274, epsilon = 1e-12);
    }

    #[test]
    fn rho_branches() {
        assert_abs_diff_eq!(sprt().rho(0.6, 1.0), 0.774_597, epsilon = 1e-6);
        assert_abs_diff_eq!(rst().rho(0.3, 1.0), 0.316_228, epsilon = 1e-6);
        assert_abs_diff_eq!(tri(BoundaryScale::Known).rho(0.3, 0.5), 0.572_188, epsilon = 1e-6);
        assert!(sprt().rho(0.0, 1.0) > 0.0);
    }

    #[test]
    fn rho10_branches() {
        assert_abs_diff_eq!(sprt().rho10(0.6, 1.0), 0.645_497, epsilon = 1e-6);
        assert_abs_diff_eq!(sprt().rho10(-0.6, 1.0), -0.645_497, epsilon = 1e-6);
        assert_eq!(rst().rho10(0.3, 1.0), 0.0);
        assert_eq!(rst().rho10(-0.6, 1.0), -1.0);
        assert_abs_diff_eq!(tri(BoundaryScale::Known).rho10(0.3, 0.5), 1.747_675, epsilon = 1e-6);
        assert_eq!(sprt().rho10(0.0, 1.0), 0.0);
        assert_eq!(sprt().rho10(7.0, 1.0), 0.0);
    }

    #[test]
    fn triangular_boundaries() {
        let d = tri(BoundaryScale::Known);
        let up = d.should_stop(&stats_with_sum(10, 8.0), 1.0).unwrap();
        assert_eq!(up, StopDecision::stop(10, Verdict::RejectH0));
        let down = d.should_stop(&stats_with_sum(10, 3.0), 1.0).unwrap();
        assert_eq!(down, StopDecision::stop(10, Verdict::AcceptH0));
        let mid = d.should_stop(&stats_with_sum(10, 5.0), 1.0).unwrap();
        assert!(!mid.stopped);
        // not a look
        assert!(!d.should_stop(&stats_with_sum(9, 100.0), 1.0).unwrap().stopped);
        // forced final look decided by the midline 2bn = 10.904
        let last = d.should_stop(&stats_with_sum(20, 10.5), 1.0).unwrap();
        assert_eq!(last.verdict, Verdict::AcceptH0);
        let last = d.should_stop(&stats_with_sum(20, 11.0), 1.0).unwrap();
        assert_eq!(last.verdict, Verdict::RejectH0);
    }

    #[test]
    fn triangular_waits_for_two_points() {
        let d = tri(BoundaryScale::Estimated);
        let first = d.should_stop(&SufficientStats::new().accumulate(1.0, 0.0), 1.0).unwrap();
        assert!(!first.stopped);
        // S = -4.5, sd = 0.354: S / sd = -12.7, below the lower boundary -3.276
        let s = SufficientStats::from_pairs([(-2.0, 0.0), (-2.5, 0.0)]);
        let dec = d.should_stop(&s, 99.0).unwrap();
        assert_eq!(dec.verdict, Verdict::AcceptH0);
    }

    #[test]
    fn sprt_boundary_equivalence() {
        let dec = sprt().should_stop(&stats_with_sum(2, 11.0), 1.0).unwrap();
        assert_eq!(dec, StopDecision::stop(2, Verdict::RejectH0));
        let dec = sprt().should_stop(&stats_with_sum(1, 11.0), 1.0).unwrap();
        assert!(!dec.stopped);
    }

    #[test]
    fn injected_streams() {
        let xs = [6.0, 5.0, 100.0];
        let mut i = 0;
        let t = sprt()
            .run_trial_with(1.0, || {
                i += 1;
                (xs[i - 1], 0.0)
            })
            .unwrap();
        assert_eq!((t.n, t.verdict), (2, Verdict::RejectH0));

        let t = sprt().run_trial_with(1.0, || (0.0, 0.0)).unwrap();
        assert_eq!((t.n, t.verdict), (100, Verdict::TruncatedAtMax));
        assert_eq!(t.stats.n, 100);
    }

    #[test]
    fn designs_equal_themselves() {
        let t = DesignSpec::triangular(5.495, 0.2726, 2, TRIANGULAR_OVERSHOOT, BoundaryScale::Known).unwrap();
        let s = DesignSpec::sprt(10.0, 0.1, 5.0).unwrap();
        assert_eq!(t, t);
        assert_eq!(s, s);
        assert_eq!(t.eps_sq(), None);
        assert_eq!(s.b(), None);
    }

    #[test]
    fn seeded_trials_repeat() {
        let p = TrueParams::new(0.6, 1.0, 1.0, 1.0, 0.4).unwrap();
        let a = sprt().run_trial(&p, &mut RngStream::new(99, 4)).unwrap();
        let b = sprt().run_trial(&p, &mut RngStream::new(99, 4)).unwrap();
        assert_eq!(a, b);
    }
}
