//! CSV result tables: a version comment, a header row, then one row per
//! instant with every number printed with 17 significant digits.

use std::fmt::Write as _;

use qbm_core::experiments::{ErReport, ExclusivityReport, IncompatibilityReport, OracleReport, PodReport};

use crate::RunError;

pub const CSV_HEADER: &str = "# qbm-structures v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Fails with a conditioning error rather than writing a non-finite value.
    pub fn to_csv(&self) -> Result<String, RunError> {
        let mut out = String::new();
        let _ = writeln!(out, "{CSV_HEADER}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let mut fields = Vec::with_capacity(row.len());
            for (cell, name) in row.iter().zip(&self.columns) {
                fields.push(match *cell {
                    Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
                    Cell::Num(v) => {
                        return Err(RunError::Model(qbm_core::Error::Conditioning(format!(
                            "non-finite value {v} in column `{name}`"
                        ))))
                    }
                    Cell::Flag(b) => u8::from(b).to_string(),
                });
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        Ok(out)
    }
}

fn num(v: f64) -> Cell {
    Cell::Num(v)
}

pub fn pod_table(r: &PodReport) -> Table {
    let mut columns = vec!["t", "purity_1", "purity_Sp", "neg_12", "neg_SpEp"];
    let coherence = r.coherence_1.as_ref().zip(r.coherence_sp.as_ref());
    if coherence.is_some() {
        columns.extend(["coherence_1", "coherence_Sp"]);
    }
    let rows = (0..r.times.len())
        .map(|i| {
            let mut row = vec![
                num(r.times[i]),
                num(r.purity_1[i]),
                num(r.purity_sp[i]),
                num(r.neg_12[i]),
                num(r.neg_spep[i]),
            ];
            if let Some((c1, csp)) = coherence {
                row.extend([num(c1[i]), num(csp[i])]);
            }
            row
        })
        .collect();
    Table { columns, rows }
}

pub fn er_table(r: &ErReport) -> Table {
    Table {
        columns: vec!["t", "neg_12", "neg_SpEp", "witnessed"],
        rows: (0..r.times.len())
            .map(|i| {
                vec![
                    num(r.times[i]),
                    num(r.neg_12[i]),
                    num(r.neg_spep[i]),
                    Cell::Flag(r.witnessed[i]),
                ]
            })
            .collect(),
    }
}

pub fn exclusivity_table(r: &ExclusivityReport) -> Table {
    Table {
        columns: vec!["t", "neg_SpEp", "excluding"],
        rows: (0..r.times.len())
            .map(|i| vec![num(r.times[i]), num(r.neg_spep[i]), Cell::Flag(r.excluding[i])])
            .collect(),
    }
}

pub fn marginal_table(reports: &[IncompatibilityReport]) -> Table {
    Table {
        columns: vec!["t", "mean_Sp", "var_Sp", "mean_relabeled", "var_relabeled", "l1_distance"],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    num(r.t),
                    num(r.true_density.0),
                    num(r.true_density.1),
                    num(r.relabeled_density.0),
                    num(r.relabeled_density.1),
                    num(r.l1_distance),
                ]
            })
            .collect(),
    }
}

/// Missing decoherence factors (coherent initial state) are written as 0 and
/// flagged through the `has_coherence` column.
pub fn oracle_table(r: &OracleReport) -> Table {
    Table {
        columns: vec![
            "t",
            "purity_gauss",
            "purity_fock",
            "moments_diff",
            "has_coherence",
            "coherence_gauss",
            "coherence_fock",
            "convergence",
            "max_abs_diff",
        ],
        rows: r
            .rows
            .iter()
            .map(|row| {
                vec![
                    num(row.t),
                    num(row.purity_gauss),
                    num(row.purity_fock),
                    num(row.moments_diff),
                    Cell::Flag(row.coherence_gauss.is_some()),
                    num(row.coherence_gauss.unwrap_or(0.0)),
                    num(row.coherence_fock.unwrap_or(0.0)),
                    num(row.convergence),
                    num(row.max_abs_diff),
                ]
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_round_trip() {
        let table = Table {
            columns: vec!["t", "value", "flag"],
            rows: vec![vec![Cell::Num(0.0), Cell::Num(0.1), Cell::Flag(true)]],
        };
        let csv = table.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "t,value,flag");
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields[2], "1");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn non_finite_values_are_refused() {
        let table = Table {
            columns: vec!["t"],
            rows: vec![vec![Cell::Num(f64::NAN)]],
        };
        let err = table.to_csv().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
