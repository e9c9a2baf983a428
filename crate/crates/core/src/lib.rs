//! Corrected confidence intervals for the mean of the second component of a
//! bivariate normal process whose first component drives a sequential
//! stopping rule.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: normal and Student-t CDFs/quantiles and seeded
//!   bivariate normal sampling.
//! * [`model`]: streaming sufficient statistics, estimates and the joint
//!   log-density.
//! * [`designs`]: truncated SPRT, repeated significance test and triangular
//!   test stopping rules together with their limiting `rho` functions.
//! * [`corrections`]: mean/variance correction terms, the capping rules and
//!   the renormalised pivots.
//! * [`intervals`]: naive and corrected confidence intervals.
//! * [`montecarlo`]: the replicated-trial engine, table reproduction and
//!   Wald-identity diagnostics.

pub mod corrections;
pub mod designs;
pub mod distributions;
mod error;
pub mod intervals;
pub mod model;
pub mod montecarlo;

pub use corrections::{
    build_correction, build_primary_correction, corrected_pivot, raw_pivot_secondary, Case,
    Correction, DfMode, KnownParams, PivotValue, RhoSigma,
};
pub use designs::{BoundaryScale, DesignKind, DesignSpec, StopDecision, Trial, Verdict};
pub use distributions::RngStream;
pub use error::{Error, Result};
pub use intervals::{Interval, IntervalMethod};
pub use model::{Estimates, SufficientStats, TrueParams, VarianceDivisor};
pub use montecarlo::{
    reproduce_table, simulate_scenario, wald_diagnostics, DiagnosticReport, Scenario,
    ScenarioReport, TableId,
};
