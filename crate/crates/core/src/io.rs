//! CSV for array data, JSON for reports.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64` exactly.

use crate::bifurcation::{AlphaStar, BifurcationDiagram, PointOutcome};
use crate::error::{Error, Result};
use crate::grid::{Density, Grid};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(field: &str, column: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {column}: cannot parse {field:?} as a real")))
}

fn parse_count(field: &str, column: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {column}: cannot parse {field:?} as a count")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Writes `x,p` rows, one per grid node.
pub fn write_density_csv<W: Write>(writer: W, d: &Density) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "p"])?;
    for (x, p) in d.grid().nodes().iter().zip(d.values()) {
        w.write_record([format_real(*x), format_real(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a density written by [`write_density_csv`], rebuilding its grid.
pub fn read_density_csv<R: Read>(reader: R) -> Result<Density> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &["x", "p"])?;
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 2 {
            return Err(Error::Parse(format!("expected 2 fields, found {}", row.len())));
        }
        xs.push(parse_real(&row[0], "x")?);
        ps.push(parse_real(&row[1], "p")?);
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Parse(format!("a density needs at least 3 nodes, found {n}")));
    }
    let c = (n / 2) as f64;
    let half_width = -xs[0] * (c + 1.0) / c;
    let grid = Grid::new(half_width, n)?;
    for (i, x) in xs.iter().enumerate() {
        if (grid.node(i) - x).abs() > 1e-9 * half_width {
            return Err(Error::Parse(format!(
                "row {i}: x = {x} is not on a uniform symmetric grid"
            )));
        }
    }
    Density::new(grid, ps)
}

pub fn save_density(path: &Path, d: &Density) -> Result<()> {
    write_density_csv(std::fs::File::create(path)?, d)
}

pub fn load_density(path: &Path) -> Result<Density> {
    read_density_csv(std::fs::File::open(path)?)
}

pub const DIAGRAM_HEADER: [&str; 9] = [
    "b",
    "alpha",
    "epsilon",
    "modality",
    "modes",
    "peak_height",
    "excess_kurtosis",
    "residual_inf",
    "status",
];

/// One parsed row of a diagram CSV. Failed points have `None` numerics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramRow {
    pub b: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub modality: Option<usize>,
    pub modes: Vec<f64>,
    pub peak_height: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub residual_inf: Option<f64>,
    /// `ok` or the error kind.
    pub status: String,
}

pub fn write_diagram_csv<W: Write>(writer: W, diagram: &BifurcationDiagram) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DIAGRAM_HEADER)?;
    for ((b, alpha, epsilon), outcome) in diagram.axes.points().into_iter().zip(&diagram.points) {
        let head = [format_real(b), format_real(alpha), format_real(epsilon)];
        let tail = match outcome {
            PointOutcome::Solved { record, .. } => [
                record.modality.to_string(),
                record
                    .mode_locations
                    .iter()
                    .map(|x| format_real(*x))
                    .collect::<Vec<_>>()
                    .join(";"),
                format_real(record.peak_height),
                format_real(record.excess_kurtosis),
                format_real(record.residual_inf),
                "ok".to_string(),
            ],
            PointOutcome::Failed { kind, .. } => [
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                (*kind).to_string(),
            ],
        };
        w.write_record(head.iter().chain(tail.iter()))?;
    }
    w.flush()?;
    Ok(())
}

fn optional<T>(field: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field).map(Some)
    }
}

pub fn read_diagram_csv<R: Read>(reader: R) -> Result<Vec<DiagramRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &DIAGRAM_HEADER)?;
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let modes = if row[4].is_empty() {
            Vec::new()
        } else {
            row[4]
                .split(';')
                .map(|s| parse_real(s, "modes"))
                .collect::<Result<_>>()?
        };
        rows.push(DiagramRow {
            b: parse_real(&row[0], "b")?,
            alpha: parse_real(&row[1], "alpha")?,
            epsilon: parse_real(&row[2], "epsilon")?,
            modality: optional(&row[3], |s| parse_count(s, "modality"))?,
            modes,
            peak_height: optional(&row[5], |s| parse_real(s, "peak_height"))?,
            excess_kurtosis: optional(&row[6], |s| parse_real(s, "excess_kurtosis"))?,
            residual_inf: optional(&row[7], |s| parse_real(s, "residual_inf"))?,
            status: row[8].to_string(),
        });
    }
    Ok(rows)
}

pub const ALPHA_STAR_HEADER: [&str; 5] = ["b", "epsilon", "alpha_star", "bracket_lo", "bracket_hi"];

pub fn write_alpha_star_csv<W: Write>(writer: W, curve: &[AlphaStar]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ALPHA_STAR_HEADER)?;
    for a in curve {
        w.write_record([a.b, a.epsilon, a.alpha_star, a.bracket_lo, a.bracket_hi].map(format_real))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of `(b, epsilon, alpha_star, bracket_lo, bracket_hi)`.
pub fn read_alpha_star_csv<R: Read>(reader: R) -> Result<Vec<[f64; 5]>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &ALPHA_STAR_HEADER)?;
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let mut out = [0.0; 5];
        for (k, name) in ALPHA_STAR_HEADER.iter().enumerate() {
            out[k] = parse_real(row.get(k).unwrap_or(""), name)?;
        }
        rows.push(out);
    }
    Ok(rows)
}

/// Run metadata; the only field allowed to differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub timestamp_unix: u64,
}

impl Metadata {
    pub fn now() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Wraps a serializable report with [`Metadata`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<T> {
    pub metadata: Metadata,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(body: T) -> Self {
        Self {
            metadata: Metadata::now(),
            body,
        }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Machine-readable error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}
