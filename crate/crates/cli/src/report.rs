//! Report types, exit-status aggregation and CSV emission.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// `rhs < 0`: flagged, never a failure.
    Vacuous,
    /// Cusp, atom on the boundary and similar numerical rejections.
    Rejected,
    /// The check's inputs were inconsistent (e.g. `U ⊄ E`).
    Invalid,
}

/// Tabular plot data with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub index: usize,
    pub kind: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl CheckOutcome {
    pub fn new(index: usize, kind: &'static str, status: Status, details: Value) -> Self {
        Self {
            index,
            kind,
            status,
            message: None,
            details,
            curves: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn from_error(index: usize, kind: &'static str, err: &liouville_iso::Error) -> Self {
        let status = if err.is_numerical_rejection() {
            Status::Rejected
        } else {
            Status::Invalid
        };
        Self {
            message: Some(err.to_string()),
            ..Self::new(index, kind, status, Value::Null)
        }
    }
}

pub fn exit_code<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> i32 {
    let mut code = EXIT_PASS;
    for s in statuses {
        let c = match s {
            Status::Pass | Status::Vacuous => EXIT_PASS,
            Status::Fail => EXIT_FAIL,
            Status::Rejected => EXIT_REJECTED,
            Status::Invalid => EXIT_CONFIG,
        };
        // Severity order: config > rejection > failure > pass.
        let rank = |c: i32| [0, 1, 3, 2].iter().position(|x| *x == c).unwrap();
        if rank(c) > rank(code) {
            code = c;
        }
    }
    code
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub metric: String,
    pub checks: Vec<CheckOutcome>,
    pub exit_code: i32,
}

/// Writes every table as `check<index>_<name>.csv` and records the file names.
pub fn write_tables(dir: &Path, checks: &mut [CheckOutcome]) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for c in checks {
        for t in &c.tables {
            let file = format!("check{}_{}.csv", c.index, t.name);
            let path = dir.join(&file);
            std::fs::write(&path, t.to_csv())?;
            c.curves.push(file);
            written.push(path);
        }
    }
    Ok(written)
}
