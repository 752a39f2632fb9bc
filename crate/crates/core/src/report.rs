//! Tabular reports: CSV with a mandatory header and a JSON summary object.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Fixed-column numeric table, one row per bin, per epsilon or per box size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Header plus rows; floats use Rust's shortest round-trip formatting,
    /// which is locale independent.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    /// `{experiment, model_hash, plan, columns, rows}`. Non-finite cells become `null`.
    pub fn summary(&self, experiment: &str, model_hash: u64, plan: Value) -> Value {
        json!({
            "experiment": experiment,
            "model_hash": format!("{model_hash:016x}"),
            "plan": plan,
            "columns": self.columns,
            "rows": self.rows,
        })
    }
}

/// Writes `contents` to `path` through a sibling temp file and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_roundtrip_floats() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![0.1, 1.0]).unwrap();
        t.push(vec![1e-20, -2.5]).unwrap();
        assert_eq!(t.to_csv(), "a,b\n0.1,1\n0.00000000000000000001,-2.5\n");
        assert!(t.push(vec![1.0]).is_err());
        assert_eq!(t.column("b").unwrap(), vec![1.0, -2.5]);
    }

    #[test]
    fn summary_shape() {
        let mut t = Table::new(["x"]);
        t.push(vec![2.0]).unwrap();
        let s = t.summary("wegner", 0xab, json!({"M": 3}));
        assert_eq!(s["experiment"], "wegner");
        assert_eq!(s["model_hash"], "00000000000000ab");
        assert_eq!(s["rows"][0][0], 2.0);
        assert_eq!(s["columns"][0], "x");
    }
}
