//! Report files: JSON case records, CSV tables and plot series.
//!
//! Output is deterministic: floats in CSV use 17 significant digits, JSON
//! objects are key-sorted, and rows keep the order they were produced in.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Params;
use crate::error::CliError;

/// The leading columns of every sweep table.
pub const SWEEP_COLUMNS: [&str; 7] = ["n", "nu", "k", "p", "q", "s", "value"];

/// One checked quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub case: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub diagnostics: Value,
}

impl Case {
    /// A case passing when `value <= tolerance`.
    pub fn at_most(case: impl Into<String>, value: f64, tolerance: f64, diagnostics: Value) -> Self {
        Case { case: case.into(), value, tolerance: Some(tolerance), pass: value <= tolerance, diagnostics }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    config_hash: &'a str,
    config: &'a std::collections::BTreeMap<&'static str, String>,
    pass: bool,
    cases: &'a [Case],
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<&'a Value>,
}

/// 17 significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::I(i as i64)
    }
}

impl From<u8> for Cell {
    fn from(i: u8) -> Self {
        Cell::I(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::S(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// The sweep columns followed by `extra`.
    pub fn sweep(extra: &[&str]) -> Self {
        let mut h: Vec<&str> = SWEEP_COLUMNS.to_vec();
        h.extend_from_slice(extra);
        Self::new(&h)
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from the header");
        self.rows.push(row);
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

/// SHA-256 of the command's canonical configuration, hex-encoded.
pub fn config_hash(params: &Params) -> String {
    let digest = Sha256::digest(params.canonical().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Where and how a command writes its files.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    /// File stem, e.g. `strichartz_scan`.
    pub stem: String,
    pub emit_plot_data: bool,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, stem: &str, emit_plot_data: bool) -> Self {
        Output { dir: dir.to_path_buf(), stem: stem.into(), emit_plot_data, written: Vec::new() }
    }

    fn write(&mut self, name: String, text: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// `<stem>.json` with the cases and an optional run record.
    pub fn json(&mut self, params: &Params, cases: &[Case], record: Option<&Value>) -> Result<bool, CliError> {
        let pass = cases.iter().all(|c| c.pass);
        let hash = config_hash(params);
        let doc = Document { command: params.section, config_hash: &hash, config: params.entries(), pass, cases, record };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        text.push('\n');
        self.write(format!("{}.json", self.stem), &text)?;
        Ok(pass)
    }

    /// `<stem>[.<suffix>].csv`.
    pub fn csv(&mut self, suffix: Option<&str>, table: &Table) -> Result<(), CliError> {
        let name = match suffix {
            Some(s) => format!("{}.{s}.csv", self.stem),
            None => format!("{}.csv", self.stem),
        };
        self.write(name, &table.render())
    }

    /// `<stem>.<name>.dat`: whitespace-separated `(x, y, …)` rows under a
    /// `#` header, written only with plot data enabled.
    pub fn plot(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        if !self.emit_plot_data {
            return Ok(());
        }
        let mut s = format!("# {}\n", columns.join(" "));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        self.write(format!("{}.{name}.dat", self.stem), &s)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn tables_render_in_order() {
        let mut t = Table::sweep(&["tag"]);
        t.push(vec![3u8.into(), 0.5.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, 1.0.into(), "x".into()]);
        assert_eq!(t.render(), "n,nu,k,p,q,s,value,tag\n3,5.0000000000000000e-1,,,,,1.0000000000000000e0,x\n");
    }
}
