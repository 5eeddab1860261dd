//! CSV artifacts.
//!
//! * profile: `x,u,q`, one row per cell;
//! * grid: `x,y,u,q`, row-major by `y` then `x`;
//! * convergence: `M,N,E,EOC,cpu_seconds,C_max_computed`, with empty fields
//!   where a value does not exist (no EOC on the first rung, no error
//!   without a reference, failed runs).
//!
//! Floats are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SolverError};
use crate::experiments::{ConvergenceRow, PresetReport, StudyReport};
use crate::setup::Profile;

pub const PROFILE_HEADER: [&str; 3] = ["x", "u", "q"];
pub const GRID_HEADER: [&str; 4] = ["x", "y", "u", "q"];
pub const CONVERGENCE_HEADER: [&str; 6] = ["M", "N", "E", "EOC", "cpu_seconds", "C_max_computed"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> SolverError {
    SolverError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::File::create(path).map_err(|e| io_err(path, e))
}

/// Profile rows as strings (1D: `x,u,q`; 2D: `x,y,u,q`).
pub fn profile_records(profile: &Profile) -> (Vec<&'static str>, Vec<Vec<String>>) {
    match profile {
        Profile::OneD { x, u, q } => (
            PROFILE_HEADER.to_vec(),
            (0..x.len()).map(|i| vec![num(x[i]), num(u[i]), num(q[i])]).collect(),
        ),
        Profile::TwoD { x, y, u, q } => {
            let mut rows = Vec::with_capacity(u.len());
            for (j, yj) in y.iter().enumerate() {
                for (i, xi) in x.iter().enumerate() {
                    let k = j * x.len() + i;
                    rows.push(vec![num(*xi), num(*yj), num(u[k]), num(q[k])]);
                }
            }
            (GRID_HEADER.to_vec(), rows)
        }
    }
}

pub fn convergence_records(rows: &[ConvergenceRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.cells.to_string(),
                r.steps.to_string(),
                opt(r.error),
                opt(r.eoc),
                num(r.cpu_seconds),
                num(r.courant),
            ]
        })
        .collect()
}

/// Writes a 1D profile (`x,u,q`) or a 2D grid (`x,y,u,q`).
pub fn write_profile_csv(path: &Path, profile: &Profile) -> Result<()> {
    let (header, rows) = profile_records(profile);
    let f = create(path)?;
    write_rows(f, &header, rows.into_iter()).map_err(|e| io_err(path, e))
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let f = create(path)?;
    write_rows(f, &CONVERGENCE_HEADER, convergence_records(rows).into_iter()).map_err(|e| io_err(path, e))
}

/// One line per check, prefixed `PASS` or `FAIL`.
pub fn summary_lines(studies: &[StudyReport]) -> Vec<String> {
    let mut out = Vec::new();
    for s in studies {
        for c in &s.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push(format!("{tag} {}: {}", s.label, c.description));
        }
        for (row, o) in s.rows.iter().zip(&s.outcomes) {
            if let Err(e) = o {
                out.push(format!("NOTE {} M={}: {e}", s.label, row.cells));
            }
        }
    }
    out
}

/// Writes `<label>-convergence.csv` per study, `profiles/<name>.csv` per
/// profile and `summary.txt` under `dir`.
pub fn write_report(dir: &Path, report: &PresetReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for s in &report.studies {
        write_convergence_csv(&dir.join(format!("{}-convergence.csv", s.label)), &s.rows)?;
    }
    for (name, p) in &report.profiles {
        write_profile_csv(&dir.join("profiles").join(format!("{name}.csv")), p)?;
    }
    let path = dir.join("summary.txt");
    let mut text = summary_lines(&report.studies).join("\n");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}
