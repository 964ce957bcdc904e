//! Text formats for matrices, channels and joint sources, plus CSV output.
//!
//! Matrix: a header line `q l n`, then `l` lines of `n` space-separated
//! residues. Channel and joint source: a header line with the two alphabet
//! sizes, then the row-major probabilities, one row per line. Lines starting
//! with `#` are comments in the probability formats.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use sidecode_core::gf::{FieldSpec, LinearMap};
use sidecode_core::source::{Channel, JointSource, SpectrumHistogram, SpectrumKind};

use crate::error::{LabError, Result};

fn parse_err(msg: impl Into<String>) -> LabError {
    LabError::parse(None, msg)
}

fn token<T: FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(format!("bad {what} `{tok}`")))
}

pub fn parse_matrix(text: &str) -> Result<LinearMap> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty matrix file"))?;
    let mut head = header.split_whitespace();
    let q: u16 = token(head.next(), "modulus")?;
    let l: usize = token(head.next(), "row count")?;
    let n: usize = token(head.next(), "column count")?;
    if head.next().is_some() {
        return Err(parse_err("header must be `q l n`"));
    }
    let field = FieldSpec::new(q)?;
    let mut entries = Vec::with_capacity(l * n);
    for i in 0..l {
        let line = lines.next().ok_or_else(|| parse_err(format!("expected {l} rows, found {i}")))?;
        let row: Vec<u16> = line.split_whitespace().map(|t| token(Some(t), "residue")).collect::<Result<_>>()?;
        if row.len() != n {
            return Err(parse_err(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        entries.extend(row);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(parse_err("trailing content after matrix rows"));
    }
    Ok(LinearMap::new(field, l, n, entries)?)
}

pub fn format_matrix(a: &LinearMap) -> String {
    let mut out = format!("{} {} {}\n", a.field().modulus(), a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(u16::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Alphabet sizes and the probability table of a channel or joint file.
fn parse_table(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut body = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = body.next().ok_or_else(|| parse_err("empty probability file"))?;
    let mut head = header.split_whitespace();
    let a: usize = token(head.next(), "first alphabet size")?;
    let b: usize = token(head.next(), "second alphabet size")?;
    let probs: Vec<f64> = body.flat_map(str::split_whitespace).map(|t| token(Some(t), "probability")).collect::<Result<_>>()?;
    if probs.len() != a * b {
        return Err(parse_err(format!("expected {} probabilities, found {}", a * b, probs.len())));
    }
    Ok((a, b, probs))
}

fn format_table(a: usize, b: usize, probs: &[f64]) -> String {
    let mut out = format!("{a} {b}\n");
    for row in probs.chunks(b) {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// `inputs outputs`, then `W(y|x)` with one input per line.
pub fn parse_channel(text: &str) -> Result<Channel> {
    let (k, m, probs) = parse_table(text)?;
    Ok(Channel::new(k, m, probs)?)
}

pub fn format_channel(ch: &Channel) -> String {
    format_table(ch.inputs(), ch.outputs(), ch.probs())
}

/// `|X| |Y|`, then `p(x, y)` with one `x` per line.
pub fn parse_joint(text: &str) -> Result<JointSource> {
    let (k, m, probs) = parse_table(text)?;
    Ok(JointSource::new(k, m, probs)?)
}

pub fn format_joint(src: &JointSource) -> String {
    format_table(src.x_size(), src.y_size(), src.joint_table())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| LabError::Io { path: Some(path.to_path_buf()), source: e })
}

/// Attaches the file name to parse errors.
pub fn read_with<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    parse(&read_text(path)?).map_err(|e| match e {
        LabError::Parse { path: None, message } => LabError::Parse { path: Some(path.to_path_buf()), message },
        other => other,
    })
}

/// Rows of string cells under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header and rows as CSV, without any comment line.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io { path: None, source: e.into_error() })?;
        Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
    }

    /// Writes a `#` comment line with the run time, then the CSV.
    pub fn write_file(&self, path: &Path, title: &str) -> Result<()> {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut text = String::new();
        writeln!(text, "# {title}, generated at unix time {stamp}").unwrap();
        text.push_str(&self.to_csv()?);
        let io = |e| LabError::Io { path: Some(path.to_path_buf()), source: e };
        let mut f = fs::File::create(path).map_err(io)?;
        f.write_all(text.as_bytes()).map_err(io)
    }
}

/// Result rows of a CSV file written by [`Table::write_file`], ignoring comment lines.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = read_text(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

pub fn histogram_table(h: &SpectrumHistogram, seed: u64) -> Table {
    let kind = match h.kind {
        SpectrumKind::InfEntropy => "inf-entropy",
        SpectrumKind::CondSupEntropy => "cond-sup-entropy",
    };
    let mut t = Table::new(vec!["kind", "n", "trials", "mean", "std", "lo", "hi", "count", "seed"]);
    for b in &h.bins {
        t.push(vec![
            kind.into(),
            h.n.to_string(),
            h.trials.to_string(),
            h.mean.to_string(),
            h.std.to_string(),
            b.lo.to_string(),
            b.hi.to_string(),
            b.count.to_string(),
            seed.to_string(),
        ]);
    }
    t
}
