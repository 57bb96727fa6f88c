//! Result tables written as CSV with a JSON metadata sidecar.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(v) => write!(f, "{v}"),
            Self::Float(v) if v.is_infinite() && *v > 0.0 => f.write_str("inf"),
            Self::Float(v) if v.is_infinite() => f.write_str("-inf"),
            Self::Float(v) => write!(f, "{v}"),
            Self::Bool(v) => write!(f, "{v}"),
            Self::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableMeta {
    pub experiment: String,
    pub config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
}

pub fn version_string() -> String {
    match option_env!("CCS_RADAR_GIT_DESCRIBE") {
        Some(d) => d.to_owned(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    pub meta: TableMeta,
}

impl ResultTable {
    pub fn new(columns: &[&str], experiment: &str, config_hash: &str) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: TableMeta {
                experiment: experiment.to_owned(),
                config_hash: config_hash.to_owned(),
                version: version_string(),
                wall_time_s: 0.0,
            },
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "row of {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| invalid(format!("no column {column:?}")))
    }

    pub fn column(&self, column: &str) -> Result<Vec<&Cell>> {
        let i = self.index(column)?;
        Ok(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn column_f64(&self, column: &str) -> Result<Vec<f64>> {
        self.column(column)?
            .into_iter()
            .map(|c| match c {
                Cell::Float(v) => Ok(*v),
                Cell::Int(v) => Ok(*v as f64),
                other => Err(invalid(format!("cell {other} in {column:?} is not numeric"))),
            })
            .collect()
    }

    /// CSV body with a trailing `config_hash` column; byte-identical for
    /// identical inputs.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(String::as_str).chain(["config_hash"]))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string).chain([self.meta.config_hash.clone()]))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`; returns the CSV path.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{name}.csv"));
        fs::write(&csv_path, self.to_csv()?)?;
        let meta = serde_json::to_vec_pretty(&self.meta).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(dir.join(format!("{name}.meta.json")), meta)?;
        Ok(csv_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_hash_column_and_rejects_ragged_rows() {
        let mut t = ResultTable::new(&["n", "db", "ok"], "pslr_sweep", "abcd");
        t.push(vec![256usize.into(), 17.5.into(), true.into()]).unwrap();
        t.push(vec![512usize.into(), f64::INFINITY.into(), false.into()]).unwrap();
        assert!(t.push(vec![1usize.into()]).is_err());
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "n,db,ok,config_hash\n256,17.5,true,abcd\n512,inf,false,abcd\n");
        assert_eq!(t.column_f64("db").unwrap()[0], 17.5);
        assert!(t.column_f64("ok").is_err());
        assert!(t.column("missing").is_err());
    }

    #[test]
    fn write_creates_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = ResultTable::new(&["x"], "demo", "ff");
        t.meta.wall_time_s = 1.5;
        t.push(vec!["a".into()]).unwrap();
        let path = t.write(dir.path(), "demo").unwrap();
        assert!(path.exists());
        let meta: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("demo.meta.json")).unwrap()).unwrap();
        assert_eq!(meta["config_hash"], "ff");
        assert_eq!(meta["wall_time_s"], 1.5);
    }
}
