//! CSV reports and the summary index.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Lt,
    Gt,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub cmp: Cmp,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, cmp: Cmp, limit: f64) -> Check {
        let passed = match cmp {
            Cmp::Le => value <= limit,
            Cmp::Ge => value >= limit,
            Cmp::Lt => value < limit,
            Cmp::Gt => value > limit,
        };
        Check { name: name.into(), value, cmp, limit, passed }
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Check {
        Check::new(name, if ok { 1.0 } else { 0.0 }, Cmp::Ge, 1.0)
    }

    pub fn describe(&self) -> String {
        format!("{}={:?} ({} {:?})", self.name, self.value, self.cmp.symbol(), self.limit)
    }
}

/// Table, key numbers and assertions of one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: &str, kind: &str, columns: &[&str]) -> Report {
        Report {
            name: name.into(),
            kind: kind.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Metadata comment, header row, data rows, then one comment per check.
    pub fn to_csv(&self, version: &str, seed: u64, digest: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# hopf-lab {version} kind={} seed={seed} config-sha256={digest}", self.kind);
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(s, "# metric {k}={v:?}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "# check {} {}", if c.passed { "PASS" } else { "FAIL" }, c.describe());
        }
        s
    }
}

/// Shortest round-trip formatting of a float for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str = "report,kind,status,checks,detail";

/// Index of every report in `dir`: one row per CSV file (sorted by name)
/// with PASS/FAIL, the check count, and the failing checks or key metrics.
pub fn emit_summary(dir: &Path) -> Result<String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv") && p.file_name().is_some_and(|n| n != SUMMARY_FILE))
        .collect();
    files.sort();
    let mut out = format!("{SUMMARY_HEADER}\n");
    for path in files {
        let text = std::fs::read_to_string(&path)?;
        let mut kind = String::new();
        let mut checks = 0usize;
        let mut failed = Vec::new();
        let mut metrics = Vec::new();
        for line in text.lines().filter(|l| l.starts_with('#')) {
            if let Some(k) = line.split_whitespace().find_map(|w| w.strip_prefix("kind=")) {
                kind = k.to_string();
            } else if let Some(rest) = line.strip_prefix("# check ") {
                checks += 1;
                if let Some(desc) = rest.strip_prefix("FAIL ") {
                    failed.push(desc.to_string());
                }
            } else if let Some(m) = line.strip_prefix("# metric ") {
                metrics.push(m.to_string());
            }
        }
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let (status, detail) =
            if failed.is_empty() { ("PASS", metrics.join("; ")) } else { ("FAIL", failed.join("; ")) };
        let _ = writeln!(out, "{stem},{kind},{status},{checks},\"{}\"", detail.replace('"', "'"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, pass: bool) {
        let mut r = Report::new(name, "delta", &["t", "delta"]);
        r.row(vec![num(1.0), num(0.5)]);
        r.metric("delta", 0.5);
        r.check(Check::new("error", if pass { 0.001 } else { 0.3 }, Cmp::Le, 0.02));
        std::fs::write(dir.join(format!("{name}.csv")), r.to_csv("0.1.0", 0, "ab")).unwrap();
    }

    #[test]
    fn summary_of_empty_directory_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(emit_summary(dir.path()).unwrap(), format!("{SUMMARY_HEADER}\n"));
    }

    #[test]
    fn summary_marks_pass_and_fail() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a", true);
        write(dir.path(), "b", true);
        let s = emit_summary(dir.path()).unwrap();
        assert_eq!(s.lines().filter(|l| l.contains(",PASS,")).count(), 2);
        write(dir.path(), "c", false);
        let s = emit_summary(dir.path()).unwrap();
        let bad = s.lines().find(|l| l.starts_with("c,")).unwrap();
        assert!(bad.contains("FAIL") && bad.contains("error=0.3"), "{bad}");
    }

    #[test]
    fn checks_compare_as_labelled() {
        assert!(Check::new("x", 1.0, Cmp::Le, 1.0).passed);
        assert!(!Check::new("x", 1.0, Cmp::Lt, 1.0).passed);
        assert!(!Check::new("x", f64::NAN, Cmp::Ge, 0.0).passed);
        assert!(!Check::flag("x", false).passed);
    }
}
