//! CSV tables with a leading `# key=value` comment block.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.comments.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write(&self, mut out: impl Write) -> Result<()> {
        for (k, v) in &self.comments {
            writeln!(out, "# {k}={v}").map_err(io_err)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io_err)?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn read(input: impl BufRead) -> Result<Self> {
        let mut comments = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line.map_err(io_err)?;
            match line.strip_prefix("# ") {
                Some(c) if body.is_empty() => {
                    let (k, v) = c.split_once('=').unwrap_or((c, ""));
                    comments.push((k.to_string(), v.to_string()));
                }
                _ => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers().map_err(io_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()
            .map_err(io_err)?;
        Ok(Self {
            comments,
            header,
            rows,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read(std::io::BufReader::new(file))
    }
}

/// Scientific notation for error rates and probabilities; empty for a
/// missing value.
pub fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6e}"),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

/// Shortest round-trip decimal; empty for a missing value.
pub fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
