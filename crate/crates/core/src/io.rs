//! File formats for matrices, frames and reports.
//!
//! Matrices: `{"rows": m, "cols": n, "data": [[re, im], ...]}` row-major, or
//! CSV with `m` rows of `2n` interleaved `re,im` values.
//! Frames: `{"dim": d, "vectors": [[[re, im], ...], ...]}`, or CSV with one
//! vector per row.
//!
//! Floats are written so that reading them back is bit-exact: JSON uses a
//! fixed 17-significant-digit scientific form, CSV the shortest
//! round-tripping decimal.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::linalg::{Mat, Operator, C64, DEFAULT_RANK_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixFile> for Operator {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.data.len() != file.rows * file.cols {
            return Err(Error::Parse(format!(
                "{}x{} matrix needs {} entries, found {}",
                file.rows,
                file.cols,
                file.rows * file.cols,
                file.data.len()
            )));
        }
        let entries = Mat::from_row_iterator(
            file.rows,
            file.cols,
            file.data.iter().map(|&[re, im]| C64::new(re, im)),
        );
        Operator::with_rank_tol(entries, DEFAULT_RANK_TOL)
    }
}

impl From<Operator> for MatrixFile {
    fn from(op: Operator) -> Self {
        let m = op.matrix();
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixFile { rows, cols, data }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<FrameFile> for Frame {
    type Error = Error;

    fn try_from(file: FrameFile) -> Result<Self> {
        let vectors = file
            .vectors
            .iter()
            .map(|v| v.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        Frame::new(file.dim, vectors).map_err(|e| match e {
            Error::ShapeMismatch { .. } => Error::Parse(e.to_string()),
            e => e,
        })
    }
}

impl From<Frame> for FrameFile {
    fn from(f: Frame) -> Self {
        FrameFile {
            dim: f.dim(),
            vectors: f
                .vectors()
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// Compact JSON formatter printing every float with 17 significant digits.
/// Non-finite values become `null`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedFloat;

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Deterministic JSON: field order follows the struct, floats use [`FixedFloat`].
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn matrix_from_json(text: &str) -> Result<Operator> {
    let file: MatrixFile = parse_json(text)?;
    Operator::try_from(file)
}

pub fn frame_from_json(text: &str) -> Result<Frame> {
    let file: FrameFile = parse_json(text)?;
    Frame::try_from(file)
}

fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "row {} has an odd number of columns ({})",
                rows.len() + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV input".into()));
    }
    Ok(rows)
}

fn pairs(row: &[f64]) -> impl Iterator<Item = C64> + '_ {
    row.chunks_exact(2).map(|p| C64::new(p[0], p[1]))
}

pub fn matrix_from_csv(text: &str) -> Result<Operator> {
    let rows = csv_rows(text)?;
    let cols = rows[0].len() / 2;
    let entries = Mat::from_row_iterator(rows.len(), cols, rows.iter().flat_map(|r| pairs(r)));
    Operator::new(entries)
}

pub fn frame_from_csv(text: &str) -> Result<Frame> {
    let rows = csv_rows(text)?;
    let dim = rows[0].len() / 2;
    Frame::try_from(FrameFile {
        dim,
        vectors: rows
            .iter()
            .map(|r| r.chunks_exact(2).map(|p| [p[0], p[1]]).collect())
            .collect(),
    })
}

fn csv_line<'a>(values: impl Iterator<Item = &'a C64>) -> String {
    let mut line = values
        .map(|z| format!("{:?},{:?}", z.re, z.im))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

pub fn matrix_to_csv(op: &Operator) -> String {
    let m = op.matrix();
    (0..m.nrows())
        .map(|r| csv_line(m.row(r).iter()))
        .collect()
}

pub fn frame_to_csv(f: &Frame) -> String {
    f.vectors().iter().map(|v| csv_line(v.iter())).collect()
}

pub fn matrix_to_json(op: &Operator) -> Result<String> {
    to_json(op)
}

pub fn frame_to_json(f: &Frame) -> Result<String> {
    to_json(f)
}
