//! Scaling observations in (CSV), fit reports and plot tables out.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{LogCountFit, LogProportionFit, ScalingPoint};
use crate::error::{Error, Result};

use super::FORMAT_VERSION;

pub const REPORT_FORMAT: &str = "manipkit.fit-report";

/// Read `x,sr` observations; the header row is required.
pub fn read_scaling_csv(path: &Path) -> Result<Vec<ScalingPoint>> {
    let text = fs::read_to_string(path)?;
    parse_scaling_csv(&text)
}

pub fn parse_scaling_csv(text: &str) -> Result<Vec<ScalingPoint>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?;
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols.len() < 2 || cols[0] != "x" || cols[1] != "sr" {
        return Err(Error::Format(format!(
            "expected header 'x,sr', found '{header}'"
        )));
    }
    let mut points = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(Error::Format(format!("line {}: need x,sr", lineno + 1)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("line {}: bad number '{s}'", lineno + 1)))
        };
        points.push(ScalingPoint {
            x: parse(fields[0])?,
            sr: parse(fields[1])?,
        });
    }
    Ok(points)
}

/// Fit report document, tagged by model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub format: String,
    pub version: String,
    #[serde(flatten)]
    pub body: FitReportBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum FitReportBody {
    LogProportion(LogProportionFit),
    LogCount(LogCountFit),
}

impl FitReport {
    pub fn log_proportion(fit: LogProportionFit) -> Self {
        FitReport {
            format: REPORT_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            body: FitReportBody::LogProportion(fit),
        }
    }

    pub fn log_count(fit: LogCountFit) -> Self {
        FitReport {
            format: REPORT_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            body: FitReportBody::LogCount(fit),
        }
    }

    pub fn to_pretty_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Fitted value at an observation point.
    pub fn predict(&self, x: f64) -> f64 {
        match &self.body {
            FitReportBody::LogProportion(f) => f.k * (1.0 - x).ln() + f.b,
            FitReportBody::LogCount(f) => f.a * x.ln() + f.c,
        }
    }
}

pub fn write_fit_report(path: &Path, report: &FitReport) -> Result<()> {
    fs::write(path, report.to_pretty_string())?;
    Ok(())
}

/// Plot-ready table of (x, fitted sr) rows for external tooling.
pub fn plot_csv_string(report: &FitReport, xs: &[f64]) -> String {
    let mut out = String::from("x,fitted_sr\n");
    for &x in xs {
        out.push_str(&format!("{},{}\n", x, report.predict(x)));
    }
    out
}

pub fn write_plot_csv(path: &Path, report: &FitReport, xs: &[f64]) -> Result<()> {
    fs::write(path, plot_csv_string(report, xs))?;
    Ok(())
}
