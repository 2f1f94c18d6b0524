//! CSV and `key: value` summary output.
//!
//! Floats use nine significant digits in scientific notation so that output
//! is stable across platforms.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use wpt_core::units::watts_to_dbm;
use wpt_core::ActivationVerdict;
use wpt_core::CoverageReport;

use crate::error::HarnessError;

pub const FIELD_HEADER: &str = "position_m,avg_power_w,avg_power_dbm,active";
pub const SWEEP_HEADER: &str = "required_power_w,required_power_dbm,coverage";
pub const TRAJECTORY_HEADER: &str = "time_s,voltage_v";

/// Nine significant digits; `inf` and `nan` pass through unchanged.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_field_csv<W: Write>(report: &CoverageReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{FIELD_HEADER}")?;
    let mut rows: Vec<usize> = (0..report.positions.len()).collect();
    rows.sort_by(|&a, &b| report.positions[a].total_cmp(&report.positions[b]));
    for i in rows {
        let p = report.avg_power[i];
        writeln!(
            w,
            "{},{},{},{}",
            sig9(report.positions[i]),
            sig9(p),
            sig9(watts_to_dbm(p)),
            u8::from(report.active[i])
        )?;
    }
    w.flush()
}

pub fn emit_field_csv(report: &CoverageReport, path: &Path) -> Result<(), HarnessError> {
    if report.positions.is_empty() {
        return Err(HarnessError::Usage("coverage report has no samples".into()));
    }
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_field_csv(report, BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))
}

pub fn write_sweep_csv<W: Write>(curve: &[(f64, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for &(p, c) in curve {
        writeln!(w, "{},{},{}", sig9(p), sig9(watts_to_dbm(p)), sig9(c))?;
    }
    w.flush()
}

pub fn write_trajectory_csv<W: Write>(verdict: &ActivationVerdict, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for &(t, v) in &verdict.trajectory {
        writeln!(w, "{},{}", sig9(t), sig9(v))?;
    }
    w.flush()
}

/// Writes through `write` into a new file at `path`.
pub fn to_file(path: &Path, write: impl FnOnce(BufWriter<File>) -> io::Result<()>) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write(BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))
}

/// Ordered `key: value` lines.
#[derive(Debug, Default)]
pub struct Summary(Vec<(&'static str, String)>);

impl Summary {
    pub fn add(&mut self, key: &'static str, value: impl Display) -> &mut Self {
        self.0.push((key, value.to_string()));
        self
    }

    pub fn float(&mut self, key: &'static str, value: f64) -> &mut Self {
        self.add(key, sig9(value))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k}: {v}")?;
        }
        Ok(())
    }
}
