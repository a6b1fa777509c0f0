//! Output artifacts are assembled in memory and written only once a command
//! has finished computing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Column data sharing an `x` column.
#[derive(Debug, Clone)]
pub struct Columns {
    pub header: Vec<String>,
    pub x: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl Columns {
    pub fn new(x: &[f64]) -> Self {
        Self {
            header: vec!["x".into()],
            x: x.to_vec(),
            columns: Vec::new(),
        }
    }

    pub fn push(mut self, name: impl Into<String>, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), self.x.len());
        self.header.push(name.into());
        self.columns.push(values.to_vec());
        self
    }
}

#[derive(Debug, Clone)]
pub enum Content {
    Csv(Columns),
    Json(serde_json::Value),
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub path: PathBuf,
    pub content: Content,
}

impl Artifact {
    pub fn csv(path: impl Into<PathBuf>, columns: Columns) -> Self {
        Self {
            path: path.into(),
            content: Content::Csv(columns),
        }
    }

    pub fn json(path: impl Into<PathBuf>, value: &impl Serialize) -> Self {
        Self {
            path: path.into(),
            content: Content::Json(serde_json::to_value(value).expect("report types serialise")),
        }
    }

    /// Same artifact under `dir`.
    pub fn nested(mut self, dir: &Path) -> Self {
        self.path = dir.join(self.path);
        self
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, c: &Columns) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&c.header)?;
    let mut row = Vec::with_capacity(c.columns.len() + 1);
    for (i, &x) in c.x.iter().enumerate() {
        row.clear();
        row.push(format_float(x));
        row.extend(c.columns.iter().map(|col| format_float(col[i])));
        w.write_record(&row)?;
    }
    w.flush()
}

fn write_json(path: &Path, v: &serde_json::Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes every artifact below `root`, creating directories as needed.
pub fn write_all(root: &Path, artifacts: &[Artifact]) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = root.join(&a.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        match &a.content {
            Content::Csv(c) => write_csv(&path, c)?,
            Content::Json(v) => write_json(&path, v)?,
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_header_and_x_first() {
        let dir = tempfile::tempdir().unwrap();
        let c = Columns::new(&[0.0, 1.0]).push("V", &[2.0, 3.0]);
        write_all(dir.path(), &[Artifact::csv("sub/p.csv", c)]).unwrap();
        let text = fs::read_to_string(dir.path().join("sub/p.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,V");
        assert_eq!(lines[2], "1.0000000000000000e0,3.0000000000000000e0");
    }
}
