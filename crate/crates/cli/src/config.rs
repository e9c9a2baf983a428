//! Argument and config-file parsing into a validated [`RunConfig`].
//!
//! A config file holds flat `key = value` lines with `#` comments. Keys are
//! the long flag names of the chosen subcommand (underscores are accepted in
//! place of dashes), plus an optional `command` key naming the subcommand.
//! Config entries are applied first, so flags on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use seqcorrect_core::designs::TRIANGULAR_OVERSHOOT;
use seqcorrect_core::montecarlo::table_scenarios;
use seqcorrect_core::{
    BoundaryScale, Case, DesignKind, DesignSpec, DfMode, Estimates, KnownParams, RhoSigma,
    Scenario, TableId, TrueParams, VarianceDivisor,
};

const SUBCOMMANDS: [&str; 4] = ["simulate", "table", "ci", "diagnose"];

#[derive(Parser, Debug)]
#[command(
    name = "seqcorrect",
    version,
    about = "Corrected confidence intervals for a secondary mean after a sequential test",
    long_about = None
)]
pub struct Cli {
    /// Read `key = value` settings from FILE; command-line flags override them.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Subcommand, Debug)]
pub enum CommandArgs {
    /// Simulate coverage over a grid of (theta1, theta2, gamma).
    Simulate(SimulateArgs),
    /// Reproduce one of the reference coverage tables (t1 .. t5).
    Table(TableArgs),
    /// Naive and corrected intervals from trial summaries.
    Ci(CiArgs),
    /// Wald-identity and bias diagnostics at the stopping time.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignArg {
    Sprt,
    Rst,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    C0,
    C1,
    C2,
    C3,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::C0 => Case::C0,
            CaseArg::C1 => Case::C1,
            CaseArg::C2 => Case::C2,
            CaseArg::C3 => Case::C3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DfArg {
    /// Standard normal.
    Normal,
    /// Student t on N degrees of freedom.
    N,
    /// Student t on a / rho_hat^2 degrees of freedom.
    Arho,
}

impl From<DfArg> for DfMode {
    fn from(d: DfArg) -> Self {
        match d {
            DfArg::Normal => DfMode::Normal,
            DfArg::N => DfMode::StudentN,
            DfArg::Arho => DfMode::StudentARho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivisorArg {
    #[value(name = "n-1")]
    Unbiased,
    #[value(name = "n")]
    MaxLikelihood,
}

impl From<DivisorArg> for VarianceDivisor {
    fn from(d: DivisorArg) -> Self {
        match d {
            DivisorArg::Unbiased => VarianceDivisor::Unbiased,
            DivisorArg::MaxLikelihood => VarianceDivisor::MaxLikelihood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoSigmaArg {
    #[value(name = "true_value")]
    TrueValue,
    Estimated,
}

impl From<RhoSigmaArg> for RhoSigma {
    fn from(r: RhoSigmaArg) -> Self {
        match r {
            RhoSigmaArg::TrueValue => RhoSigma::TrueValue,
            RhoSigmaArg::Estimated => RhoSigma::Estimated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Known,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Stopping-rule flags shared by `simulate`, `ci` and `diagnose`. Omitted
/// values fall back to the designs of the reference tables.
#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    /// Stopping rule.
    #[arg(long, value_enum)]
    pub design: DesignArg,
    /// Boundary constant a [default: 10, or 5.495 for triangular].
    #[arg(long)]
    pub a: Option<f64>,
    /// Lower truncation eps^2 [default: 0.1].
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Upper truncation eps0^2 [default: 5 for sprt, 2 for rst].
    #[arg(long)]
    pub eps0sq: Option<f64>,
    /// Lower truncation eps, as an alternative to --eps2.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Upper truncation eps0, as an alternative to --eps0sq.
    #[arg(long, allow_negative_numbers = true)]
    pub eps0: Option<f64>,
    /// Triangular slope b [default: 0.2726].
    #[arg(long)]
    pub b: Option<f64>,
    /// Observations between triangular looks [default: 2].
    #[arg(long)]
    pub group: Option<u64>,
    /// Triangular overshoot adjustment [default: 0.583].
    #[arg(long)]
    pub overshoot: Option<f64>,
    /// Scale for the triangular partial sum [default: known].
    #[arg(long, value_enum)]
    pub boundary_scale: Option<ScaleArg>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write results to PATH (`-` for stdout); without it only the summary
    /// is printed.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format [default: from the --out extension, else csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Primary mean(s), comma separated.
    #[arg(long, value_parser = parse_list, allow_negative_numbers = true)]
    pub theta1: FloatList,
    /// Secondary mean(s), comma separated.
    #[arg(long, value_parser = parse_list, default_value = "1.0", allow_negative_numbers = true)]
    pub theta2: FloatList,
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Correlation(s), comma separated.
    #[arg(long, value_parser = parse_list, default_value = "0", allow_negative_numbers = true)]
    pub gamma: FloatList,
    /// Which covariance parameters the pivot treats as known.
    #[arg(long, value_enum, default_value = "c3")]
    pub case: CaseArg,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Reference distributions for the corrected pivot (c2, c3).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "n,arho")]
    pub df: Vec<DfArg>,
    /// Two-sided nominal levels, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "0.90,0.95")]
    pub levels: FloatList,
    /// Variance divisor for the estimates inside the pivots.
    #[arg(long, value_enum, default_value = "n-1")]
    pub divisor: DivisorArg,
    /// Source of sigma1 inside rho [default: true_value for triangular].
    #[arg(long, value_enum)]
    pub rho_sigma: Option<RhoSigmaArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    /// Table to reproduce: t1 .. t5.
    #[arg(long, value_parser = parse_table)]
    pub id: TableId,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the table's variance divisor (n for t2, t4, t5; n-1 otherwise).
    #[arg(long, value_enum)]
    pub divisor: Option<DivisorArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CiArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Sample size at stopping.
    #[arg(long)]
    pub n: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1_hat: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2_hat: f64,
    #[arg(long)]
    pub sigma1_hat: f64,
    #[arg(long)]
    pub sigma2_hat: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_hat: f64,
    /// Known sigma1 (cases c0, c1; also used inside the triangular rho).
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// Known sigma2 (cases c0, c1).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Known correlation (cases c0, c2).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "c3")]
    pub case: CaseArg,
    /// Reference distribution for the corrected interval (c2, c3).
    #[arg(long, value_enum, default_value = "n")]
    pub df: DfArg,
    /// Two-sided confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Source of sigma1 inside rho [default: true_value for triangular].
    #[arg(long, value_enum)]
    pub rho_sigma: Option<RhoSigmaArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

fn parse_list(s: &str) -> std::result::Result<FloatList, String> {
    let values = s
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{v}` is not a finite number"))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    Ok(FloatList(values))
}

fn parse_table(s: &str) -> std::result::Result<TableId, String> {
    s.parse::<TableId>().map_err(|e| e.to_string())
}

/// Where and how to write results.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// `None` prints only the summary; `Some("-")` writes to stdout.
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    pub fn to_stdout(&self) -> bool {
        self.path.as_deref() == Some(Path::new("-"))
    }
}

/// A one-shot interval request.
#[derive(Debug, Clone, PartialEq)]
pub struct CiRequest {
    pub design: DesignSpec,
    pub estimates: Estimates,
    pub case: Case,
    pub known: KnownParams,
    pub df: DfMode,
    pub level: f64,
    pub rho_sigma: RhoSigma,
    /// `sigma1_hat` stood in for the unknown sigma1 inside rho.
    pub rho_sigma1_from_estimate: bool,
    /// Known sigma1 given explicitly; enables the primary interval.
    pub primary_sigma1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Simulate(Vec<Scenario>),
    Table(TableId, Vec<Scenario>),
    Ci(CiRequest),
    Diagnose(Scenario),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Simulate(_) => "simulate",
            Job::Table(..) => "table",
            Job::Ci(_) => "ci",
            Job::Diagnose(_) => "diagnose",
        }
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    pub output: Output,
}

/// Parse `argv` (including the program name), merging any `--config` file.
pub fn parse_args(argv: &[String]) -> Result<RunConfig> {
    let (config_path, rest) = split_config_flag(argv.get(1..).unwrap_or_default())?;
    let entries = match &config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            parse_config_text(&text).with_context(|| format!("in config file {}", p.display()))?
        }
        None => Vec::new(),
    };
    parse_merged(&entries, &rest)
}

/// One `key = value` line of a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Split config text into entries, rejecting malformed and repeated keys.
pub fn parse_config_text(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {line:?}", i + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let value = v.trim().to_string();
        if key.is_empty() {
            bail!("line {}: missing key", i + 1);
        }
        if value.is_empty() {
            bail!("line {}: missing value for `{key}`", i + 1);
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            bail!("line {}: `{key}` already set on line {}", i + 1, prev.line);
        }
        out.push(ConfigEntry {
            key,
            value,
            line: i + 1,
        });
    }
    Ok(out)
}

fn split_config_flag(args: &[String]) -> Result<(Option<PathBuf>, Vec<String>)> {
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let found = if a == "--config" {
            Some(
                it.next()
                    .cloned()
                    .ok_or_else(|| anyhow!("--config needs a file path"))?,
            )
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        };
        match found {
            Some(p) if path.is_some() => bail!("--config given more than once (again as {p:?})"),
            Some(p) => path = Some(PathBuf::from(p)),
            None => rest.push(a.clone()),
        }
    }
    Ok((path, rest))
}

fn command() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    for name in SUBCOMMANDS {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    cmd
}

fn parse_merged(entries: &[ConfigEntry], rest: &[String]) -> Result<RunConfig> {
    let mut rest = rest.to_vec();
    let sub_pos = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let from_file = entries.iter().find(|e| e.key == "command");
    let sub = match (sub_pos, from_file) {
        (Some(i), _) => rest.remove(i),
        (None, Some(e)) => {
            if !SUBCOMMANDS.contains(&e.value.as_str()) {
                bail!(
                    "config line {}: unknown command `{}`; expected one of {}",
                    e.line,
                    e.value,
                    SUBCOMMANDS.join(", ")
                );
            }
            e.value.clone()
        }
        // let clap report the missing subcommand (or print help)
        (None, None) => {
            let mut argv = vec!["seqcorrect".to_string()];
            argv.extend(rest);
            command().try_get_matches_from(argv)?;
            bail!("no command given");
        }
    };

    let cmd = command();
    let subcmd = cmd
        .find_subcommand(&sub)
        .expect("subcommand names are fixed");
    let known: Vec<String> = subcmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "help" && l != "config")
        .collect();

    let mut argv = vec!["seqcorrect".to_string(), sub.clone()];
    for e in entries.iter().filter(|e| e.key != "command") {
        if !known.contains(&e.key) {
            bail!(
                "config line {}: unknown key `{}` for `{sub}`; valid keys: {}",
                e.line,
                e.key,
                known.join(", ")
            );
        }
        argv.push(format!("--{}={}", e.key, e.value));
    }
    argv.extend(rest);

    let matches = cmd.try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    validate(cli.command)
}

fn validate(cmd: CommandArgs) -> Result<RunConfig> {
    match cmd {
        CommandArgs::Simulate(a) => {
            let output = resolve_output(&a.output);
            Ok(RunConfig {
                job: Job::Simulate(simulate_scenarios(&a)?),
                output,
            })
        }
        CommandArgs::Table(a) => {
            check_reps(a.reps)?;
            let mut scenarios = table_scenarios(a.id, a.reps, a.seed)?;
            if let Some(d) = a.divisor {
                for sc in &mut scenarios {
                    sc.variance_divisor = d.into();
                }
            }
            Ok(RunConfig {
                job: Job::Table(a.id, scenarios),
                output: resolve_output(&a.output),
            })
        }
        CommandArgs::Ci(a) => Ok(RunConfig {
            job: Job::Ci(ci_request(&a)?),
            output: resolve_output(&a.output),
        }),
        CommandArgs::Diagnose(a) => {
            check_reps(a.reps)?;
            let design = build_design(&a.design)?;
            let params = TrueParams::new(a.theta1, a.theta2, a.sigma1, a.sigma2, a.gamma)?;
            let sc = Scenario::new(design, params, Case::C3, a.reps, a.seed);
            sc.validate()?;
            Ok(RunConfig {
                job: Job::Diagnose(sc),
                output: resolve_output(&a.output),
            })
        }
    }
}

fn resolve_output(o: &OutputArgs) -> Output {
    let format = o.format.unwrap_or_else(|| {
        let json = o
            .out
            .as_deref()
            .and_then(Path::extension)
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            Format::Json
        } else {
            Format::Csv
        }
    });
    Output {
        path: o.out.clone(),
        format,
    }
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    Ok(())
}

fn simulate_scenarios(a: &SimulateArgs) -> Result<Vec<Scenario>> {
    check_reps(a.reps)?;
    let design = build_design(&a.design)?;
    if a.df.is_empty() {
        bail!("--df needs at least one of normal, n, arho");
    }
    let mut out = Vec::new();
    for &t1 in &a.theta1.0 {
        for &t2 in &a.theta2.0 {
            for &g in &a.gamma.0 {
                let params = TrueParams::new(t1, t2, a.sigma1, a.sigma2, g)?;
                let mut sc = Scenario::new(design, params, a.case.into(), a.reps, a.seed);
                sc.df_modes = a.df.iter().map(|&d| d.into()).collect();
                sc.levels = a.levels.0.clone();
                sc.variance_divisor = a.divisor.into();
                if let Some(r) = a.rho_sigma {
                    sc.rho_sigma = r.into();
                }
                sc.validate()?;
                out.push(sc);
            }
        }
    }
    Ok(out)
}

fn ci_request(a: &CiArgs) -> Result<CiRequest> {
    let design = build_design(&a.design)?;
    let estimates = Estimates::from_summary(
        a.n,
        a.theta1_hat,
        a.theta2_hat,
        a.sigma1_hat,
        a.sigma2_hat,
        a.gamma_hat,
    )?;
    if !(a.level > 0.0 && a.level < 1.0) {
        bail!("--level must lie in (0, 1), got {}", a.level);
    }
    for (name, v) in [("sigma1", a.sigma1), ("sigma2", a.sigma2)] {
        if let Some(s) = v {
            if !(s > 0.0 && s.is_finite()) {
                bail!("--{name} must be positive, got {s}");
            }
        }
    }
    if let Some(g) = a.gamma {
        if !(g.abs() <= 1.0) {
            bail!("--gamma must lie in [-1, 1], got {g}");
        }
    }

    let case: Case = a.case.into();
    let needed: &[(&str, bool)] = match case {
        Case::C0 => &[
            ("sigma1", a.sigma1.is_some()),
            ("sigma2", a.sigma2.is_some()),
            ("gamma", a.gamma.is_some()),
        ],
        Case::C1 => &[("sigma1", a.sigma1.is_some()), ("sigma2", a.sigma2.is_some())],
        Case::C2 => &[("gamma", a.gamma.is_some())],
        Case::C3 => &[],
    };
    if let Some((name, _)) = needed.iter().find(|(_, given)| !given) {
        bail!("case {case} needs the known value --{name}");
    }

    let rho_sigma = a
        .rho_sigma
        .map(RhoSigma::from)
        .unwrap_or_else(|| RhoSigma::default_for(&design));
    let mut known = KnownParams {
        sigma1: a.sigma1,
        sigma2: a.sigma2,
        gamma: a.gamma,
    };
    let fallback =
        design.rho_uses_sigma1() && rho_sigma == RhoSigma::TrueValue && known.sigma1.is_none();
    if fallback {
        if !(a.sigma1_hat > 0.0) {
            bail!("rho needs sigma1: pass --sigma1 or a positive --sigma1-hat");
        }
        known.sigma1 = Some(a.sigma1_hat);
    }
    Ok(CiRequest {
        design,
        estimates,
        case,
        known,
        df: a.df.into(),
        level: a.level,
        rho_sigma,
        rho_sigma1_from_estimate: fallback,
        primary_sigma1: a.sigma1,
    })
}

// squared value from either the squared or the plain flag
fn squared(sq_name: &str, sq: Option<f64>, name: &str, plain: Option<f64>) -> Result<Option<f64>> {
    match (sq, plain) {
        (Some(_), Some(_)) => bail!("give either --{sq_name} or --{name}, not both"),
        (Some(v), None) => {
            if !(v > 0.0 && v.is_finite()) {
                bail!("--{sq_name} must be positive, got {v}");
            }
            Ok(Some(v))
        }
        (None, Some(v)) => {
            if !(v > 0.0 && v.is_finite()) {
                bail!("--{name} must be positive, got {v}");
            }
            Ok(Some(v * v))
        }
        (None, None) => Ok(None),
    }
}

/// Build and validate the stopping rule, filling table defaults.
pub fn build_design(d: &DesignArgs) -> Result<DesignSpec> {
    let kind = match d.design {
        DesignArg::Sprt => DesignKind::Sprt,
        DesignArg::Rst => DesignKind::Rst,
        DesignArg::Triangular => DesignKind::Triangular,
    };
    if let Some(a) = d.a {
        if !(a > 1.0 && a.is_finite()) {
            bail!("--a must exceed 1, got {a}");
        }
    }
    let design = match kind {
        DesignKind::Sprt | DesignKind::Rst => {
            let tri_only = [
                ("b", d.b.is_some()),
                ("group", d.group.is_some()),
                ("overshoot", d.overshoot.is_some()),
                ("boundary-scale", d.boundary_scale.is_some()),
            ];
            if let Some((name, _)) = tri_only.iter().find(|(_, set)| *set) {
                bail!("--{name} only applies to --design triangular");
            }
            let a = d.a.unwrap_or(10.0);
            let eps2 = squared("eps2", d.eps2, "eps", d.eps)?.unwrap_or(0.1);
            let default_eps0 = if kind == DesignKind::Sprt { 5.0 } else { 2.0 };
            let eps0sq = squared("eps0sq", d.eps0sq, "eps0", d.eps0)?.unwrap_or(default_eps0);
            if !(eps0sq > eps2) {
                bail!("eps0 must exceed eps (got eps0^2 = {eps0sq}, eps^2 = {eps2})");
            }
            if kind == DesignKind::Sprt {
                DesignSpec::sprt(a, eps2, eps0sq)?
            } else {
                DesignSpec::rst(a, eps2, eps0sq)?
            }
        }
        DesignKind::Triangular => {
            let truncation = [
                ("eps2", d.eps2.is_some()),
                ("eps0sq", d.eps0sq.is_some()),
                ("eps", d.eps.is_some()),
                ("eps0", d.eps0.is_some()),
            ];
            if let Some((name, _)) = truncation.iter().find(|(_, set)| *set) {
                bail!("--{name} does not apply to --design triangular");
            }
            let scale = match d.boundary_scale.unwrap_or(ScaleArg::Known) {
                ScaleArg::Known => BoundaryScale::Known,
                ScaleArg::Estimated => BoundaryScale::Estimated,
            };
            DesignSpec::triangular(
                d.a.unwrap_or(5.495),
                d.b.unwrap_or(0.2726),
                d.group.unwrap_or(2),
                d.overshoot.unwrap_or(TRIANGULAR_OVERSHOOT),
                scale,
            )?
        }
    };
    Ok(design)
}
