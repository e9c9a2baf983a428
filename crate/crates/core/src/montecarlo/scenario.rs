use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{binomial_se, mean_se, par_replicates};
use crate::corrections::{
    build_correction, corrected_pivot, critical_value, Case, Correction, DfMode, KnownParams,
    RhoSigma,
};
use crate::designs::{DesignKind, DesignSpec, Verdict};
use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::model::{Estimates, TrueParams, VarianceDivisor};

/// One simulation cell: a design, the true parameters and the covariance
/// case under which the corrected pivot is formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub design: DesignSpec,
    pub params: TrueParams,
    pub case: Case,
    pub replicates: u64,
    pub seed: u64,
    /// Reference distributions for the corrected pivot in cases C2 and C3.
    /// Ignored for C0 and C1, which always use the normal.
    pub df_modes: Vec<DfMode>,
    /// Two-sided nominal levels; level `1 - 2p` yields the `Lp`/`Up` columns.
    pub levels: Vec<f64>,
    pub rho_sigma: RhoSigma,
    /// Divisor for the variance and covariance estimates fed to the pivots.
    pub variance_divisor: VarianceDivisor,
}

impl Scenario {
    /// Scenario with levels 0.90 and 0.95, every df mode, and the design's
    /// default `sigma1` source inside `rho`.
    pub fn new(
        design: DesignSpec,
        params: TrueParams,
        case: Case,
        replicates: u64,
        seed: u64,
    ) -> Self {
        Self {
            design,
            params,
            case,
            replicates,
            seed,
            df_modes: vec![DfMode::StudentN, DfMode::StudentARho],
            levels: vec![0.90, 0.95],
            rho_sigma: RhoSigma::default_for(&design),
            variance_divisor: VarianceDivisor::Unbiased,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replicates < 1 {
            return Err(Error::param("replicates", "must be at least 1"));
        }
        if self.levels.is_empty() {
            return Err(Error::param("levels", "need at least one level"));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::param("levels", format!("{l} is outside (0, 1)")));
        }
        if self.case.estimates_sigma2() && self.df_modes.is_empty() {
            return Err(Error::param("df_modes", "cases c2 and c3 need at least one df mode"));
        }
        Ok(())
    }

    /// Pivots tallied for this scenario, naive first.
    pub fn pivot_kinds(&self) -> Vec<PivotKind> {
        let mut kinds = vec![PivotKind::Naive];
        if self.case.estimates_sigma2() {
            for m in &self.df_modes {
                let k = PivotKind::Corrected(*m);
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
        } else {
            kinds.push(PivotKind::Corrected(DfMode::Normal));
        }
        kinds
    }
}

/// Which pivot a tally refers to.
///
/// `Naive` is `sqrt(N)(theta2 - theta2_hat) / s` with `s` the known `sigma2`
/// in cases C0, C1 and `sigma2_hat` in C2, C3, always against the normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotKind {
    Naive,
    Corrected(DfMode),
}

impl PivotKind {
    pub fn label(&self) -> &'static str {
        match self {
            PivotKind::Naive => "naive",
            PivotKind::Corrected(DfMode::Normal) => "corrected_normal",
            PivotKind::Corrected(DfMode::StudentN) => "corrected_t_n",
            PivotKind::Corrected(DfMode::StudentARho) => "corrected_t_arho",
        }
    }
}

/// Noncoverage counts for one pivot at one two-sided level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelTally {
    pub level: f64,
    pub lower_count: u64,
    pub upper_count: u64,
    /// Fraction with pivot below `-q`: the true value lies above the interval.
    pub lower: f64,
    /// Fraction with pivot above `q`.
    pub upper: f64,
    pub coverage: f64,
    pub lower_se: f64,
    pub upper_se: f64,
    pub coverage_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSummary {
    pub pivot: PivotKind,
    pub levels: Vec<LevelTally>,
}

impl PivotSummary {
    pub fn at(&self, level: f64) -> Option<&LevelTally> {
        self.levels.iter().find(|t| (t.level - level).abs() < 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub design: DesignKind,
    pub params: TrueParams,
    pub case: Case,
    pub replicates: u64,
    pub seed: u64,
    pub expected_n: f64,
    pub expected_n_se: f64,
    /// Fraction rejecting H0; triangular test only.
    pub power: Option<f64>,
    pub power_se: Option<f64>,
    pub mean_a_over_n: f64,
    pub mean_a_over_n_se: f64,
    /// `rho^2` at the true parameters, the limit of `a / N`.
    pub rho_sq: f64,
    /// Replicates stopped by the truncation point rather than a boundary.
    pub truncated: u64,
    /// Replicates where an estimate was degenerate (zero `sigma_hat` or
    /// `|gamma_hat| = 1`); they are still tallied.
    pub degenerate: u64,
    pub pivots: Vec<PivotSummary>,
}

impl ScenarioReport {
    pub fn pivot(&self, kind: PivotKind) -> Option<&PivotSummary> {
        self.pivots.iter().find(|p| p.pivot == kind)
    }

    pub fn tally(&self, kind: PivotKind, level: f64) -> Option<&LevelTally> {
        self.pivot(kind)?.at(level)
    }
}

struct Outcome {
    n: u64,
    verdict: Verdict,
    degenerate: bool,
    // one entry per pivot kind: (z, df)
    pivots: Vec<(f64, f64)>,
}

fn ratio_or_limit(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(num)
    }
}

fn replicate(sc: &Scenario, kinds: &[PivotKind], r: u64) -> Result<Outcome> {
    let p = &sc.params;
    let mut rng = RngStream::new(sc.seed, r);
    let trial = sc.design.run_trial(p, &mut rng)?;
    let est = Estimates::from_stats(&trial.stats)?.with_divisor(sc.variance_divisor);
    let s2_hat = est.sigma2_hat();
    let mut degenerate = est.sigma1_hat() == 0.0 || s2_hat == 0.0 || est.gamma_hat.abs() >= 1.0;

    let slot = if sc.case.estimates_sigma2() { s2_hat } else { p.sigma2 };
    let raw = ratio_or_limit(est.sqrt_n() * (p.theta2 - est.theta2_hat), slot);

    let known = KnownParams::all(p.sigma1, p.sigma2, p.gamma);
    let corr = match build_correction(sc.case, &sc.design, &est, &known, sc.rho_sigma) {
        Ok(c) => c,
        Err(Error::Degenerate(_)) => {
            degenerate = true;
            Correction::identity(sc.case, sc.design.a(), f64::NAN)
        }
        Err(e) => return Err(e),
    };

    let pivots = kinds
        .iter()
        .map(|k| match k {
            PivotKind::Naive => (raw, f64::INFINITY),
            PivotKind::Corrected(mode) => {
                let pv = corrected_pivot(raw, &corr, *mode, est.n);
                (pv.z, pv.df)
            }
        })
        .collect();
    Ok(Outcome {
        n: trial.n,
        verdict: trial.verdict,
        degenerate,
        pivots,
    })
}

fn pivot_mode(kind: PivotKind) -> DfMode {
    match kind {
        PivotKind::Naive => DfMode::Normal,
        PivotKind::Corrected(m) => m,
    }
}

/// Run every replicate of `sc` and tally naive and corrected noncoverage at
/// the true `theta2`.
pub fn simulate_scenario(sc: &Scenario) -> Result<ScenarioReport> {
    sc.validate()?;
    let kinds = sc.pivot_kinds();
    let outcomes = par_replicates(sc.replicates, |r| replicate(sc, &kinds, r))?;

    let reps = sc.replicates;
    let ns: Vec<f64> = outcomes.iter().map(|o| o.n as f64).collect();
    let (expected_n, expected_n_se) = mean_se(&ns);
    let a = sc.design.a();
    let a_over_n: Vec<f64> = ns.iter().map(|n| a / n).collect();
    let (mean_a_over_n, mean_a_over_n_se) = mean_se(&a_over_n);
    let (power, power_se) = if sc.design.kind() == DesignKind::Triangular {
        let rejected = outcomes
            .iter()
            .filter(|o| o.verdict == Verdict::RejectH0)
            .count();
        let p = rejected as f64 / reps as f64;
        (Some(p), Some(binomial_se(p, reps)))
    } else {
        (None, None)
    };
    let rho = sc.design.rho(sc.params.theta1, sc.params.sigma1);

    let mut pivots = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        let mut levels = Vec::with_capacity(sc.levels.len());
        for &level in &sc.levels {
            let alpha = 1.0 - level;
            let mut lower_count = 0u64;
            let mut upper_count = 0u64;
            // t quantiles vary per replicate; cache on df
            let mut cache: HashMap<u64, f64> = HashMap::new();
            for o in &outcomes {
                let (z, df) = o.pivots[i];
                let q = match cache.get(&df.to_bits()) {
                    Some(&q) => q,
                    None => {
                        // NaN df comes from the identity fallback on degenerate data
                        let mode = if df.is_nan() { DfMode::Normal } else { pivot_mode(*kind) };
                        let q = critical_value(mode, df, alpha)?;
                        cache.insert(df.to_bits(), q);
                        q
                    }
                };
                if z < -q {
                    lower_count += 1;
                } else if z > q {
                    upper_count += 1;
                }
            }
            let lower = lower_count as f64 / reps as f64;
            let upper = upper_count as f64 / reps as f64;
            let coverage = (reps - lower_count - upper_count) as f64 / reps as f64;
            levels.push(LevelTally {
                level,
                lower_count,
                upper_count,
                lower,
                upper,
                coverage,
                lower_se: binomial_se(lower, reps),
                upper_se: binomial_se(upper, reps),
                coverage_se: binomial_se(coverage, reps),
            });
        }
        pivots.push(PivotSummary {
            pivot: *kind,
            levels,
        });
    }

    Ok(ScenarioReport {
        design: sc.design.kind(),
        params: sc.params,
        case: sc.case,
        replicates: reps,
        seed: sc.seed,
        expected_n,
        expected_n_se,
        power,
        power_se,
        mean_a_over_n,
        mean_a_over_n_se,
        rho_sq: rho * rho,
        truncated: outcomes
            .iter()
            .filter(|o| o.verdict == Verdict::TruncatedAtMax)
            .count() as u64,
        degenerate: outcomes.iter().filter(|o| o.degenerate).count() as u64,
        pivots,
    })
}
