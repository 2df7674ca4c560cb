//! File formats: JSON with fixed 17-significant-digit floats, CSV series,
//! and a small row-major matrix layout in CSV or binary.
//!
//! Binary matrices (`.bmat`): magic `BMAT`, `u32` version 1, `u64` rows,
//! `u64` cols, `u8` dtype tag (1 = f64), 7 zero bytes, then `rows·cols`
//! little-endian `f64` in row-major order.
//!
//! CSV matrices: a header line `rows,cols,f64`, then one line per row.

use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

pub const BMAT_MAGIC: &[u8; 4] = b"BMAT";
pub const BMAT_VERSION: u32 = 1;
pub const DTYPE_F64: u8 = 1;

/// Pretty JSON whose floats always carry 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `{:.16e}`: 17 significant digits, exact round trip.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// A plot-ready table with a fixed column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    /// File stem.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn series_csv(series: &Series) -> Vec<u8> {
    let mut out = series.columns.join(",");
    out.push('\n');
    for row in &series.rows {
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn matrix_csv(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = format!("{},{},f64\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn matrix_bin(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * m.len());
    out.extend_from_slice(BMAT_MAGIC);
    out.extend_from_slice(&BMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    out.push(DTYPE_F64);
    out.extend_from_slice(&[0u8; 7]);
    for i in 0..m.nrows() {
        for v in m.row(i).iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn read_matrix_bin(bytes: &[u8]) -> io::Result<DMatrix<f64>> {
    if bytes.len() < 32 || &bytes[..4] != BMAT_MAGIC {
        return Err(bad("not a BMAT file"));
    }
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes")) as usize;
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != BMAT_VERSION || bytes[24] != DTYPE_F64 {
        return Err(bad("unsupported BMAT version or dtype"));
    }
    let (rows, cols) = (u64_at(8), u64_at(16));
    let data = &bytes[32..];
    if data.len() != 8 * rows * cols {
        return Err(bad("BMAT payload length does not match dimensions"));
    }
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn read_matrix_csv(text: &str) -> io::Result<DMatrix<f64>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty matrix file"))?.split(',').collect();
    if header.len() != 3 || header[2] != "f64" {
        return Err(bad("matrix header must be rows,cols,f64"));
    }
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
    let (rows, cols) = (parse_dim(header[0])?, parse_dim(header[1])?);
    let values = lines
        .flat_map(|l| l.split(','))
        .map(|c| c.parse::<f64>().map_err(|_| bad("bad matrix entry")))
        .collect::<io::Result<Vec<f64>>>()?;
    if values.len() != rows * cols {
        return Err(bad("matrix entry count does not match dimensions"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)
}
