//! CSV tables with a metadata block, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Lines written before the header of every table.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub scenario: String,
    pub scenario_sha256: String,
    pub command: &'static str,
    pub seed: u64,
}

impl Metadata {
    pub fn new(scenario_name: &str, scenario_text: &str, command: &'static str, seed: u64) -> Self {
        let digest = Sha256::digest(scenario_text.as_bytes());
        let hex = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Self {
            scenario: scenario_name.to_owned(),
            scenario_sha256: hex,
            command,
            seed,
        }
    }
}

/// One cell of a table row.
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i8> for Cell {
    fn from(v: i8) -> Self {
        Cell::Int(v as i64)
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
    } else {
        s.to_owned()
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        // shortest round-trip representation
        Cell::Num(v) => format!("{v}"),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) => quote(s),
        Cell::Empty => String::new(),
    }
}

/// In-memory table; `header` names carry their unit suffixes.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Metadata, extra: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool: rabi-rigidity {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# scenario: {}", meta.scenario);
        let _ = writeln!(out, "# scenario_sha256: {}", meta.scenario_sha256);
        let _ = writeln!(out, "# command: {}", meta.command);
        let _ = writeln!(out, "# seed: {}", meta.seed);
        for line in extra {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}
