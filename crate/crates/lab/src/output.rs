//! Run directory writer. Every file written through it is recorded for the
//! manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabError;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table assembled in memory and written in one piece.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| LabError::Format(e.to_string()))
    }
}

#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, LabError> {
        std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(RunDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Relative paths written so far, in order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<(), LabError> {
        self.write(name, &table.to_bytes()?)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), LabError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_f64(1e300).parse::<f64>().unwrap(), 1e300);
    }

    #[test]
    fn table_writes_header_then_rows() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "a,b\n1,x\n");
    }
}
