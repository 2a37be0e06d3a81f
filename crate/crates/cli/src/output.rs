//! CSV tables and plain-text reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Floats with 12 significant digits in scientific notation. Negative zero is
/// printed as zero so that sign noise cannot change the bytes.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_float(*x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "CSV row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Int(i) => i as f64,
                    Cell::Float(x) => x,
                })
                .collect(),
        )
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
    List(Vec<f64>),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(x) => fmt_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(t) => t.clone(),
            Value::List(xs) => xs
                .iter()
                .map(|x| fmt_float(*x))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

/// Metrics in insertion order, free-form detail lines and warnings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub metrics: Vec<(String, Value)>,
    pub details: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report {
            experiment: experiment.to_string(),
            ..Default::default()
        }
    }

    pub fn metric(&mut self, key: &str, v: Value) {
        self.metrics.push((key.to_string(), v));
    }

    pub fn float(&mut self, key: &str, x: f64) {
        self.metric(key, Value::Float(x));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("# {}\n", self.experiment);
        let width = self.metrics.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.metrics {
            let _ = writeln!(s, "{k:<width$}  {}", v.render());
        }
        for d in &self.details {
            let _ = writeln!(s, "{d}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// One `KEY=VALUE` line per metric.
    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metrics {
            let _ = writeln!(s, "{}={}", k.to_uppercase(), v.render());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub report: Report,
    pub csv: CsvTable,
}

impl ExperimentOutput {
    /// Writes `<name>.csv`, `<name>.report.txt` and `<name>.summary` into
    /// `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let name = &self.report.experiment;
        let files = [
            (dir.join(format!("{name}.csv")), self.csv.render()),
            (
                dir.join(format!("{name}.report.txt")),
                self.report.render_text(),
            ),
            (
                dir.join(format!("{name}.summary")),
                self.report.render_summary(),
            ),
        ];
        let mut written = Vec::new();
        for (path, body) in files {
            fs::write(&path, body).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width() {
        assert_eq!(fmt_float(1.0), "1.00000000000e0");
        assert_eq!(fmt_float(-0.0), fmt_float(0.0));
        assert_eq!(fmt_float(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(fmt_float(-2.5e-7), "-2.50000000000e-7");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["run", "x"]);
        t.push(vec![Cell::from(3usize), Cell::from(0.5)]);
        assert_eq!(t.render(), "run,x\n3,5.00000000000e-1\n");
        assert_eq!(t.column("x"), Some(vec![0.5]));
    }

    #[test]
    fn summary_lines() {
        let mut r = Report::new("gate-full");
        r.float("fidelity", 0.25);
        r.metric("runs", Value::Int(3));
        assert_eq!(r.render_summary(), "FIDELITY=2.50000000000e-1\nRUNS=3\n");
        assert!(r.render_text().starts_with("# gate-full\n"));
    }
}
