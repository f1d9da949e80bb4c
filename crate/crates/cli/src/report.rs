//! Run reports, checks and their JSON/CSV emission.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Counts towards the exit status.
    Check,
    /// Reported measurement with no pass/fail meaning.
    Finding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value / oracle - 1| <= tolerance`
    Relative,
    /// `|value - oracle| <= tolerance`
    Absolute,
    /// `value >= tolerance`
    AtLeast,
    /// `value <= tolerance`
    AtMost,
    Reported,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub oracle: Option<f64>,
    /// Where the oracle value comes from.
    pub source: String,
    pub comparison: Comparison,
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub kind: CheckKind,
}

impl Check {
    fn new(name: &str, value: f64, oracle: Option<f64>, source: &str, cmp: Comparison, tol: Option<f64>) -> Self {
        let passed = value.is_finite()
            && match (cmp, oracle, tol) {
                (Comparison::Relative, Some(o), Some(t)) => (value / o - 1.0).abs() <= t,
                (Comparison::Absolute, Some(o), Some(t)) => (value - o).abs() <= t,
                (Comparison::AtLeast, _, Some(t)) => value >= t,
                (Comparison::AtMost, _, Some(t)) => value <= t,
                (Comparison::Reported, ..) => true,
                _ => false,
            };
        Self {
            name: name.into(),
            value,
            oracle,
            source: source.into(),
            comparison: cmp,
            tolerance: tol,
            passed,
            kind: CheckKind::Check,
        }
    }

    pub fn relative(name: &str, value: f64, oracle: f64, tol: f64, source: &str) -> Self {
        Self::new(name, value, Some(oracle), source, Comparison::Relative, Some(tol))
    }

    pub fn absolute(name: &str, value: f64, oracle: f64, tol: f64, source: &str) -> Self {
        Self::new(name, value, Some(oracle), source, Comparison::Absolute, Some(tol))
    }

    pub fn at_least(name: &str, value: f64, bound: f64, source: &str) -> Self {
        Self::new(name, value, None, source, Comparison::AtLeast, Some(bound))
    }

    pub fn at_most(name: &str, value: f64, bound: f64, source: &str) -> Self {
        Self::new(name, value, None, source, Comparison::AtMost, Some(bound))
    }

    pub fn finding(name: &str, value: f64, source: &str) -> Self {
        Self {
            kind: CheckKind::Finding,
            ..Self::new(name, value, None, source, Comparison::Reported, None)
        }
    }
}

/// Tabular output written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Some(v)).collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()))?;
        }
        w.flush().with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub scenario: String,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub outputs: Value,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn new(scenario: &str, seed: Option<u64>, inputs: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            seed,
            inputs,
            outputs: Value::Null,
            checks: Vec::new(),
            table: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Check)
            .all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Write `<dir>/<stem>.json` and, when there is a table, `<dir>/<stem>.csv`.
    pub fn emit(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&json, self.to_json()?).with_context(|| format!("cannot write {}", json.display()))?;
        let mut paths = vec![json];
        if let Some(t) = &self.table {
            let csv = dir.join(format!("{stem}.csv"));
            t.write(&csv)?;
            paths.push(csv);
        }
        Ok(paths)
    }

    /// One line per check, for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match (c.kind, c.passed) {
                (CheckKind::Finding, _) => "NOTE",
                (_, true) => "PASS",
                (_, false) => "FAIL",
            };
            let oracle = c.oracle.map(|o| format!(" oracle={o:e}")).unwrap_or_default();
            let tol = c.tolerance.map(|t| format!(" tol={t:e}")).unwrap_or_default();
            out += &format!("{tag} {} value={:e}{oracle}{tol} [{}]\n", c.name, c.value, c.source);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_comparisons() {
        assert!(Check::relative("a", 1.005, 1.0, 0.01, "x").passed);
        assert!(!Check::relative("a", 1.02, 1.0, 0.01, "x").passed);
        assert!(Check::absolute("a", 1e-13, 0.0, 1e-12, "x").passed);
        assert!(Check::at_least("a", 2.0, 1.9, "x").passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0, "x").passed);
        assert!(Check::finding("a", 3.0, "x").passed);
    }

    #[test]
    fn findings_do_not_affect_status() {
        let mut r = RunReport::new("t", None, Value::Null);
        r.check(Check::finding("f", f64::NAN, "x"));
        assert!(r.all_passed());
        r.check(Check::at_most("c", 2.0, 1.0, "x"));
        assert!(!r.all_passed());
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        Table::new(&["a", "b"]).write(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n");
    }
}
