//! Convergence tables and their CSV / sidecar output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::experiment::SweepResult;

/// One column per configuration, one row per iteration; `None` is written as `NaN`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTable {
    columns: Vec<(String, Vec<Option<f64>>)>,
}

impl ConvergenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) {
        self.columns.push((name.into(), values));
    }

    pub fn columns(&self) -> &[(String, Vec<Option<f64>>)] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0)
    }

    pub fn get(&self, column: usize, row: usize) -> Option<f64> {
        self.columns.get(column).and_then(|(_, v)| v.get(row).copied().flatten())
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for row in 0..self.n_rows() {
            let _ = write!(out, "{row}");
            for (_, values) in &self.columns {
                out.push(',');
                out.push_str(&format_value(values.get(row).copied().flatten()));
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => {
            let a = x.abs();
            if a == 0.0 || (1e-4..1e15).contains(&a) {
                format!("{x}")
            } else {
                format!("{x:e}")
            }
        }
        _ => "NaN".to_string(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn emit_csv(table: &ConvergenceTable, path: &Path) -> Result<()> {
    write_file(path, &table.to_csv())
}

/// Sidecar text: per column and level the step, CFL and timings.
pub fn render_meta(sweep: &SweepResult) -> String {
    let mut out = String::new();
    for (j, (name, outcome)) in sweep.columns.iter().enumerate() {
        let _ = writeln!(out, "column.{j}.name = {name}");
        match outcome {
            Ok(r) => {
                let status = match r.record.diverged_at {
                    Some(it) => format!("diverged at iteration {it}"),
                    None => "ok".to_string(),
                };
                let _ = writeln!(out, "column.{j}.status = {status}");
                let _ = writeln!(out, "column.{j}.serial_max_cfl = {}", r.serial.max_cfl_observed);
                let _ = writeln!(out, "column.{j}.serial_wall_time = {:.6}", r.serial.wall_time);
                let _ = writeln!(out, "column.{j}.mgrit_wall_time = {:.6}", r.record.wall_time);
                for (l, level) in r.levels.iter().enumerate() {
                    let _ = writeln!(out, "column.{j}.level.{l}.n_steps = {}", level.n_steps);
                    let _ = writeln!(out, "column.{j}.level.{l}.dt = {}", level.dt);
                    let _ = writeln!(out, "column.{j}.level.{l}.cfl = {}", level.cfl);
                }
            }
            Err(e) => {
                let _ = writeln!(out, "column.{j}.status = failed: {}", e.to_string().replace('\n', " "));
            }
        }
    }
    out
}

/// Writes `path` and its `.meta` sidecar.
pub fn emit_sweep(sweep: &SweepResult, path: &Path) -> Result<()> {
    emit_csv(&sweep.table(), path)?;
    write_file(&path.with_extension("meta"), &render_meta(sweep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        assert_eq!(ConvergenceTable::new().to_csv(), "iteration\n");
        let mut t = ConvergenceTable::new();
        t.push_column("a", vec![Some(0.5), Some(0.25)]);
        assert_eq!(t.to_csv(), "iteration,a\n0,0.5\n1,0.25\n");
        let mut t = ConvergenceTable::new();
        t.push_column("x", vec![Some(1.0), None]);
        t.push_column("y", vec![Some(3e-12)]);
        assert_eq!(t.to_csv(), "iteration,x,y\n0,1,3e-12\n1,NaN,NaN\n");
    }

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-7, 123456.789, 1e20, 0.0, -4.2e-5] {
            assert_eq!(format_value(Some(x)).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_value(Some(f64::INFINITY)), "NaN");
    }

    #[test]
    fn writes_files_and_creates_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        let mut t = ConvergenceTable::new();
        t.push_column("c", vec![Some(0.5)]);
        emit_csv(&t, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "iteration,c\n0,0.5\n");
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_csv(&ConvergenceTable::new(), &blocker.join("out.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
