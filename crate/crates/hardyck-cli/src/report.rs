//! Report records and their on-disk forms.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Flat per-problem summary; one CSV row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: String,
    pub admissible: Option<bool>,
    pub which: Option<String>,
    /// Numeric value or `divergent`.
    pub value: Option<String>,
    pub argmax: Option<f64>,
    pub sandwich_upper: Option<f64>,
    pub max_ratio: Option<f64>,
    pub verdict: String,
    pub ok: bool,
}

/// Row plus the vectors behind it.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Record {
    #[serde(flatten)]
    pub row: Row,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refinement_trend: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fk_ratios: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub near_extremizer_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Two-column plot series keyed by file stem.
    #[serde(skip)]
    pub plots: Vec<(String, Vec<(f64, f64)>)>,
}

/// One sweep sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub problem: String,
    pub axis: String,
    pub value: f64,
    pub admissible: Option<bool>,
    pub b_value: Option<String>,
    pub verdict: String,
    /// `*` where the verdict differs from the previous sample.
    pub transition: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Entries {
    Records(Vec<Record>),
    Sweep(Vec<SweepRow>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub records: Entries,
}

impl Report {
    pub fn all_ok(&self) -> bool {
        match &self.records {
            Entries::Records(r) => r.iter().all(|r| r.row.ok),
            Entries::Sweep(_) => true,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(vec![]);
        let err = |e: csv::Error| CliError::Output(e.to_string());
        match &self.records {
            Entries::Records(records) => {
                if records.is_empty() {
                    w.write_record(ROW_HEADER).map_err(err)?;
                }
                for r in records {
                    w.serialize(&r.row).map_err(err)?;
                }
            }
            Entries::Sweep(rows) => {
                if rows.is_empty() {
                    w.write_record(SWEEP_HEADER).map_err(err)?;
                }
                for r in rows {
                    w.serialize(r).map_err(err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }

    /// Writes `report.json`, `report.csv` and `plotdata/*.dat` as enabled.
    pub fn write(&self, dir: &Path, json: bool, csv: bool, plotdata: bool) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        if json {
            fs::write(dir.join("report.json"), self.to_json()?).map_err(io)?;
        }
        if csv {
            fs::write(dir.join("report.csv"), self.to_csv()?).map_err(io)?;
        }
        if let (true, Entries::Records(records)) = (plotdata, &self.records) {
            let plot_dir = dir.join("plotdata");
            for r in records {
                for (stem, pts) in &r.plots {
                    fs::create_dir_all(&plot_dir).map_err(io)?;
                    fs::write(plot_dir.join(format!("{stem}.dat")), two_column(pts)).map_err(io)?;
                }
            }
        }
        Ok(())
    }
}

const ROW_HEADER: [&str; 10] =
    ["name", "kind", "admissible", "which", "value", "argmax", "sandwich_upper", "max_ratio", "verdict", "ok"];

const SWEEP_HEADER: [&str; 7] = ["problem", "axis", "value", "admissible", "b_value", "verdict", "transition"];

fn two_column(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:e} {y:e}\n")).collect()
}

/// File stem safe for any problem name.
pub fn stem(name: &str, suffix: &str) -> String {
    let clean: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{clean}_{suffix}")
}
