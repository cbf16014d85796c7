//! Structured experiment reports: per-run rows, fitted slopes, pass/fail
//! checks, and plot-data emission. All writers are atomic and byte-stable
//! for a fixed report.

use crate::config::SimConfig;
use crate::error::Result;
use crate::fields::io::atomic_write;
use serde::Serialize;
use std::path::Path;

/// A slope (or other scalar) fit compared against a reference value.
#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// Tolerance interpreted relative to the reference (`true`) or absolute.
    pub relative: bool,
    pub pass: bool,
}

impl FitSummary {
    pub fn relative(name: &str, value: f64, reference: f64, tol: f64) -> Self {
        let pass = ((value - reference) / reference).abs() <= tol;
        Self {
            name: name.into(),
            value,
            reference,
            tolerance: tol,
            relative: true,
            pass,
        }
    }

    pub fn absolute(name: &str, value: f64, reference: f64, tol: f64) -> Self {
        let pass = (value - reference).abs() <= tol;
        Self {
            name: name.into(),
            value,
            reference,
            tolerance: tol,
            relative: false,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckOp {
    /// pass iff value <= threshold
    AtMost,
    /// pass iff value >= threshold
    AtLeast,
}

/// A scalar acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub op: CheckOp,
    pub pass: bool,
}

impl CheckSummary {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            op: CheckOp::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            op: CheckOp::AtLeast,
            pass: value >= threshold,
        }
    }
}

/// Reference overlay for a figure (a straight line in log-log axes).
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceCurve {
    pub description: String,
    pub log_log_slope: f64,
    pub anchor_x: f64,
    pub anchor_y: f64,
}

/// One plottable series: points with symmetric error bars.
#[derive(Debug, Clone, Serialize)]
pub struct Figure {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64, f64)>,
    pub reference: Option<ReferenceCurve>,
}

/// One numeric result row; the seed column makes every row reproducible in
/// isolation.
#[derive(Debug, Clone)]
pub struct Row {
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: SimConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub fits: Vec<FitSummary>,
    pub checks: Vec<CheckSummary>,
    pub figures: Vec<Figure>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    config: &'a SimConfig,
    row_count: usize,
    fits: &'a [FitSummary],
    checks: &'a [CheckSummary],
    all_pass: bool,
    figures: Vec<FigureEntry<'a>>,
}

#[derive(Serialize)]
struct FigureEntry<'a> {
    name: &'a str,
    file: String,
    x_label: &'a str,
    y_label: &'a str,
    reference: &'a Option<ReferenceCurve>,
}

impl ExperimentReport {
    pub fn new(config: SimConfig, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            figures: Vec::new(),
        }
    }

    pub fn push_row(&mut self, seed: u64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row { seed, values });
    }

    pub fn all_pass(&self) -> bool {
        self.fits.iter().all(|f| f.pass) && self.checks.iter().all(|c| c.pass)
    }

    /// RFC-4180-style CSV with a header row; floats in shortest round-trip
    /// form, so identical reports serialise to identical bytes.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("seed");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.seed.to_string());
            for v in &row.values {
                out.push(',');
                if v.is_finite() {
                    out.push_str(&v.to_string());
                } else {
                    out.push_str("nan");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,value,threshold,op,pass\n");
        for c in &self.checks {
            let op = match c.op {
                CheckOp::AtMost => "at-most",
                CheckOp::AtLeast => "at-least",
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name, c.value, c.threshold, op, c.pass
            ));
        }
        for f in &self.fits {
            let kind = if f.relative {
                "fit-relative"
            } else {
                "fit-absolute"
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                f.name,
                f.value - f.reference,
                f.tolerance,
                kind,
                f.pass
            ));
        }
        out
    }

    /// Write `rows.csv`, `checks.csv`, `summary.json`, and the per-figure
    /// plot data under `figures/`; everything stays inside `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        atomic_write(&dir.join("rows.csv"), self.rows_csv().as_bytes())?;
        atomic_write(&dir.join("checks.csv"), self.checks_csv().as_bytes())?;

        let fig_dir = dir.join("figures");
        std::fs::create_dir_all(&fig_dir)?;
        let mut entries = Vec::new();
        for fig in &self.figures {
            let file = format!("{}.csv", fig.name);
            let mut csv = String::from("x,y,yerr\n");
            for (x, y, e) in &fig.points {
                csv.push_str(&format!("{x},{y},{e}\n"));
            }
            atomic_write(&fig_dir.join(&file), csv.as_bytes())?;
            entries.push(FigureEntry {
                name: &fig.name,
                file: format!("figures/{file}"),
                x_label: &fig.x_label,
                y_label: &fig.y_label,
                reference: &fig.reference,
            });
        }
        let doc = SummaryDoc {
            config: &self.config,
            row_count: self.rows.len(),
            fits: &self.fits,
            checks: &self.checks,
            all_pass: self.all_pass(),
            figures: entries,
        };
        let json = serde_json::to_string_pretty(&doc)?;
        atomic_write(&dir.join("summary.json"), json.as_bytes())?;
        Ok(())
    }
}
