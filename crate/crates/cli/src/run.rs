//! Executing a [`RunConfig`]: run the job, write records, print a summary.

use std::fmt::Write as _;

use anyhow::Result;

use seqcorrect_core::intervals::{ci_naive, ci_primary, ci_secondary_known, ci_secondary_unknown};
use seqcorrect_core::montecarlo::{DiagnosticReport, ScenarioReport};
use seqcorrect_core::{
    build_correction, build_primary_correction, simulate_scenario, wald_diagnostics, Correction,
    DesignKind, DesignSpec, DfMode, Interval, Scenario,
};

use crate::config::{CiRequest, Format, Job, RunConfig};
use crate::output::{fmt_num, to_csv, to_json, write_atomic, Record};

/// Results of one run, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: &'static str,
    pub meta: Record,
    pub records: Vec<Record>,
    pub summary: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => to_csv(&self.records),
            Format::Json => to_json(self.command, &self.meta, &self.records),
        }
    }
}

/// Run the job and emit its output; the summary goes to stdout, or to
/// stderr when the data itself is written to stdout.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let outcome = compute(&cfg.job)?;
    if let Some(path) = &cfg.output.path {
        write_atomic(path, &outcome.render(cfg.output.format))?;
    }
    if cfg.output.to_stdout() {
        eprint!("{}", outcome.summary);
    } else {
        print!("{}", outcome.summary);
        if let Some(path) = &cfg.output.path {
            println!("wrote {} ({})", path.display(), cfg.output.format.as_str());
        }
    }
    Ok(())
}

/// Run the job without writing anything.
pub fn compute(job: &Job) -> Result<Outcome> {
    match job {
        Job::Simulate(scenarios) => scenario_outcome("simulate", "simulate", scenarios),
        Job::Table(id, scenarios) => scenario_outcome("table", id.as_str(), scenarios),
        Job::Ci(req) => ci_outcome(req),
        Job::Diagnose(sc) => diagnose_outcome(sc),
    }
}

pub fn describe_design(d: &DesignSpec) -> String {
    match d.kind() {
        DesignKind::Sprt | DesignKind::Rst => format!(
            "{} a={} eps2={} eps0sq={} (m0={}, m={})",
            d.kind().as_str(),
            d.a(),
            d.eps_sq().unwrap_or(f64::NAN),
            d.eps0_sq().unwrap_or(f64::NAN),
            d.m0(),
            d.m_max()
        ),
        DesignKind::Triangular => format!(
            "triangular a={} b={} group={} overshoot={} scale={:?} (max n={})",
            d.a(),
            d.b().unwrap_or(f64::NAN),
            d.group(),
            d.overshoot(),
            d.boundary_scale(),
            d.m_max()
        ),
    }
}

fn design_fields(rec: &mut Record, d: &DesignSpec) {
    rec.push("design", d.kind().as_str())
        .push("a", d.a())
        .push("eps2", d.eps_sq())
        .push("eps0sq", d.eps0_sq())
        .push("b", d.b());
}

// 0.05 rather than 0.04999999999999999
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn scenario_record(label: &str, sc: &Scenario, r: &ScenarioReport) -> Record {
    let p = &r.params;
    let mut rec = Record::new();
    rec.push("label", label);
    design_fields(&mut rec, &sc.design);
    rec.push("case", r.case.as_str())
        .push("divisor", sc.variance_divisor.as_str())
        .push("theta1", p.theta1)
        .push("theta2", p.theta2)
        .push("sigma1", p.sigma1)
        .push("sigma2", p.sigma2)
        .push("gamma", p.gamma)
        .push("replicates", r.replicates)
        .push("seed", r.seed)
        .push_se("expected_n", r.expected_n, Some(r.expected_n_se))
        .push_se("power", r.power, r.power_se)
        .push_se("mean_a_over_n", r.mean_a_over_n, Some(r.mean_a_over_n_se))
        .push("rho_sq", r.rho_sq)
        .push("truncated", r.truncated)
        .push("degenerate", r.degenerate);
    for piv in &r.pivots {
        let name = piv.pivot.label();
        for t in &piv.levels {
            let tail = short((1.0 - t.level) / 2.0);
            rec.push_se(format!("{name}_L{tail}"), t.lower, Some(t.lower_se))
                .push_se(format!("{name}_U{tail}"), t.upper, Some(t.upper_se))
                .push_se(format!("{name}_cov{}", short(t.level)), t.coverage, Some(t.coverage_se));
        }
    }
    rec
}

fn scenario_outcome(command: &'static str, label: &str, scenarios: &[Scenario]) -> Result<Outcome> {
    let mut records = Vec::new();
    let mut summary = String::new();
    if let Some(first) = scenarios.first() {
        let _ = writeln!(
            summary,
            "{label}: {}, case {}, divisor {}, {} replicates, seed {}",
            describe_design(&first.design),
            first.case,
            first.variance_divisor.as_str(),
            first.replicates,
            first.seed
        );
    }
    for sc in scenarios {
        let r = simulate_scenario(sc)?;
        let p = &r.params;
        let _ = write!(
            summary,
            "  ({:.2}, {:.2}, {:.2})  E[N] {:>7.2}",
            p.theta1, p.theta2, p.gamma, r.expected_n
        );
        if let Some(pw) = r.power {
            let _ = write!(summary, "  power {pw:.3}");
        }
        for piv in &r.pivots {
            let _ = write!(summary, "  | {}", piv.pivot.label());
            for t in &piv.levels {
                let _ = write!(
                    summary,
                    " {}: L {:.3} U {:.3} cov {:.3}",
                    short(t.level),
                    t.lower,
                    t.upper,
                    t.coverage
                );
            }
        }
        summary.push('\n');
        records.push(scenario_record(label, sc, &r));
    }
    let mut meta = Record::new();
    meta.push("label", label);
    Ok(Outcome {
        command,
        meta,
        records,
        summary,
    })
}

fn interval_record(name: &str, ci: &Interval, corr: Option<&Correction>, df: f64) -> Record {
    let mut rec = Record::new();
    rec.push("interval", name)
        .push("method", ci.method.as_str())
        .push("level", ci.level)
        .push("lower", ci.lo)
        .push("upper", ci.hi)
        .push("center", ci.center())
        .push("width", ci.width())
        .push("kappa_hat", corr.map(|c| c.kappa_hat))
        .push("mu_hat", corr.map(|c| c.mu_hat))
        .push("tau_hat", corr.map(|c| c.tau_hat))
        .push("rho_hat", corr.map(|c| c.rho_hat))
        .push("df", df);
    rec
}

fn ci_outcome(req: &CiRequest) -> Result<Outcome> {
    let est = &req.estimates;
    let alpha = 1.0 - req.level;
    let corr = build_correction(req.case, &req.design, est, &req.known, req.rho_sigma)?;

    // the naive interval uses the known sigma2 when there is one
    let (naive, corrected, df) = if req.case.estimates_sigma2() {
        let naive = ci_naive(est, est.sigma2_hat(), alpha)?;
        let c = ci_secondary_unknown(est, &corr, alpha, req.df)?;
        (naive, c, corr.df(req.df, est.n))
    } else {
        let s2 = req.known.sigma2.expect("validated at parse time");
        let naive = ci_naive(est, s2, alpha)?;
        let c = ci_secondary_known(est, s2, &corr, alpha)?;
        (naive, c, corr.df(DfMode::Normal, est.n))
    };

    let mut records = vec![
        interval_record("naive", &naive, None, f64::INFINITY),
        interval_record("corrected", &corrected, Some(&corr), df),
    ];
    let primary = match req.primary_sigma1 {
        Some(s1) => {
            let pc = build_primary_correction(&req.design, est, s1)?;
            let ci = ci_primary(est, s1, &pc, alpha)?;
            records.push(interval_record("primary_corrected", &ci, Some(&pc), f64::INFINITY));
            Some(ci)
        }
        None => None,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}, case {}, N = {}, level {}",
        describe_design(&req.design),
        req.case,
        est.n,
        short(req.level)
    );
    let _ = writeln!(
        s,
        "  kappa_hat {}  mu_hat {}  tau_hat {}  rho_hat {}",
        fmt_num(corr.kappa_hat),
        fmt_num(corr.mu_hat),
        fmt_num(corr.tau_hat),
        fmt_num(corr.rho_hat)
    );
    if req.rho_sigma1_from_estimate {
        let _ = writeln!(s, "  rho uses sigma1_hat = {} (no --sigma1 given)", est.sigma1_hat());
    }
    let line = |s: &mut String, name: &str, ci: &Interval| {
        let _ = writeln!(
            s,
            "  {name:<18} ({:.3}, {:.3})   [{}, {}]",
            ci.lo,
            ci.hi,
            fmt_num(ci.lo),
            fmt_num(ci.hi)
        );
    };
    line(&mut s, "naive", &naive);
    line(&mut s, &format!("corrected {}", corrected.method.as_str()), &corrected);
    if let Some(p) = &primary {
        line(&mut s, "primary corrected", p);
    }

    let mut meta = Record::new();
    meta.push("case", req.case.as_str()).push("n", est.n);
    Ok(Outcome {
        command: "ci",
        meta,
        records,
        summary: s,
    })
}

fn diagnose_outcome(sc: &Scenario) -> Result<Outcome> {
    let rep: DiagnosticReport = wald_diagnostics(sc)?;
    let p = &rep.params;
    let mut records = Vec::new();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}, theta = ({}, {}), sigma = ({}, {}), gamma = {}, {} replicates, seed {}, E[N] {:.2}",
        describe_design(&sc.design),
        p.theta1,
        p.theta2,
        p.sigma1,
        p.sigma2,
        p.gamma,
        rep.replicates,
        rep.seed,
        rep.expected_n
    );
    for c in &rep.checks {
        let mut rec = Record::new();
        design_fields(&mut rec, &sc.design);
        rec.push("theta1", p.theta1)
            .push("theta2", p.theta2)
            .push("sigma1", p.sigma1)
            .push("sigma2", p.sigma2)
            .push("gamma", p.gamma)
            .push("replicates", rep.replicates)
            .push("seed", rep.seed)
            .push("expected_n", rep.expected_n)
            .push("check", c.name.as_str())
            .push_se("estimate", c.estimate, Some(c.se))
            .push("target", c.target)
            .push("se", c.se)
            .push("z", c.z)
            .push("allowance", c.allowance)
            .push("pass", crate::output::Value::Bool(c.pass));
        records.push(rec);
        let _ = writeln!(
            s,
            "  {:<16} {:>12} vs {:>12}  z {:>6.2}  {}",
            c.name,
            fmt_num(c.estimate),
            fmt_num(c.target),
            c.z,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        s,
        "{} of {} checks pass",
        rep.checks.iter().filter(|c| c.pass).count(),
        rep.checks.len()
    );
    let mut meta = Record::new();
    meta.push("design", sc.design.kind().as_str());
    Ok(Outcome {
        command: "diagnose",
        meta,
        records,
        summary: s,
    })
}
