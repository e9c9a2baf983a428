use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scenario::{simulate_scenario, Scenario, ScenarioReport};
use crate::corrections::{Case, DfMode};
use crate::designs::{BoundaryScale, DesignSpec, TRIANGULAR_OVERSHOOT};
use crate::error::{Error, Result};
use crate::model::{TrueParams, VarianceDivisor};

/// The five reference coverage tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    /// SPRT, known standard deviations (C1).
    T1,
    /// SPRT, everything estimated (C3).
    T2,
    /// Repeated significance test, C1.
    T3,
    /// Repeated significance test, C3.
    T4,
    /// Triangular test, C3.
    T5,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5];

    pub fn as_str(&self) -> &'static str {
        match self {
            TableId::T1 => "t1",
            TableId::T2 => "t2",
            TableId::T3 => "t3",
            TableId::T4 => "t4",
            TableId::T5 => "t5",
        }
    }

    pub fn case(&self) -> Case {
        match self {
            TableId::T1 | TableId::T3 => Case::C1,
            _ => Case::C3,
        }
    }

    pub fn design(&self) -> DesignSpec {
        let d = match self {
            TableId::T1 | TableId::T2 => DesignSpec::sprt(10.0, 0.1, 5.0),
            TableId::T3 | TableId::T4 => DesignSpec::rst(10.0, 0.1, 2.0),
            TableId::T5 => DesignSpec::triangular(
                5.495,
                0.2726,
                2,
                TRIANGULAR_OVERSHOOT,
                BoundaryScale::Known,
            ),
        };
        d.expect("built-in table designs are valid")
    }

    /// `(theta1, theta2, gamma)` rows in reference order, with
    /// `(sigma1, sigma2)`.
    pub fn grid(&self) -> (Vec<(f64, f64, f64)>, (f64, f64)) {
        match self {
            TableId::T5 => (
                vec![
                    (0.0, 0.07, 0.4),
                    (0.0, 0.07, 0.8),
                    (0.3, 0.07, 0.4),
                    (0.3, 0.07, 0.8),
                    (0.5, 0.07, 0.4),
                    (0.5, 0.07, 0.8),
                ],
                (0.5, 0.1),
            ),
            _ => (
                vec![
                    (0.3, 1.0, 0.4),
                    (0.6, 1.0, 0.4),
                    (0.8, 1.0, 0.4),
                    (0.3, 1.0, 0.8),
                    (0.6, 1.0, 0.8),
                    (0.8, 1.0, 0.8),
                ],
                (1.0, 1.0),
            ),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::param("table", format!("unknown table {s:?}; expected t1..t5")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub id: TableId,
    pub rows: Vec<ScenarioReport>,
}

/// Scenarios behind every row of a table; all rows share `seed`. Tables
/// that estimate the standard deviations use divisor `N`.
pub fn table_scenarios(id: TableId, replicates: u64, seed: u64) -> Result<Vec<Scenario>> {
    let design = id.design();
    let (rows, (s1, s2)) = id.grid();
    rows.into_iter()
        .map(|(t1, t2, g)| {
            let params = TrueParams::new(t1, t2, s1, s2, g)?;
            let mut sc = Scenario::new(design, params, id.case(), replicates, seed);
            sc.df_modes = vec![DfMode::StudentN, DfMode::StudentARho];
            // the estimated-sigma tables were produced with divisor N
            if id.case() == Case::C3 {
                sc.variance_divisor = VarianceDivisor::MaxLikelihood;
            }
            Ok(sc)
        })
        .collect()
}

pub fn reproduce_table(id: TableId, replicates: u64, seed: u64) -> Result<TableReport> {
    let rows = table_scenarios(id, replicates, seed)?
        .iter()
        .map(simulate_scenario)
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport { id, rows })
}
