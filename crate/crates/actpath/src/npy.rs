//! Reader and writer for version 1.0 `.npy` tensor files holding 2-D
//! little-endian `f4`/`f8` arrays in C order.

use std::fs;
use std::path::Path;

use actpath_core::Matrix;

use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE: usize = 10;
const ALIGN: usize = 64;
/// Spare header room numpy reserves so the leading axis can grow in place.
const GROWTH_DIGITS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F4,
    F8,
}

impl Dtype {
    fn descr(self) -> &'static str {
        match self {
            Dtype::F4 => "<f4",
            Dtype::F8 => "<f8",
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F4 => 4,
            Dtype::F8 => 8,
        }
    }
}

/// A decoded tensor. Values are widened to `f64`; `dtype` remembers the
/// stored width so the file can be written back unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dtype: Dtype,
    pub matrix: Matrix,
}

fn bad(message: impl Into<String>) -> String {
    message.into()
}

struct Header {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Parses the Python dict literal of a v1.0 header.
fn parse_header(text: &str) -> Result<Header, String> {
    let body = text.trim_end_matches(['\n', ' ']);
    let inner = body
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| bad("header is not a dict"))?;
    let mut descr = None;
    let mut fortran = None;
    let mut shape = None;
    let mut rest = inner.trim_start();
    while !rest.is_empty() {
        let (key, after) = quoted(rest).ok_or_else(|| bad("expected a quoted key"))?;
        let after = after.trim_start().strip_prefix(':').ok_or_else(|| bad("expected ':'"))?;
        let after = after.trim_start();
        rest = match key {
            "descr" => {
                let (v, r) = quoted(after).ok_or_else(|| bad("descr must be a string"))?;
                descr = Some(v.to_string());
                r
            }
            "fortran_order" => {
                if let Some(r) = after.strip_prefix("False") {
                    fortran = Some(false);
                    r
                } else if let Some(r) = after.strip_prefix("True") {
                    fortran = Some(true);
                    r
                } else {
                    return Err(bad("fortran_order must be True or False"));
                }
            }
            "shape" => {
                let close = after.find(')').ok_or_else(|| bad("unterminated shape"))?;
                let tuple = after
                    .strip_prefix('(')
                    .ok_or_else(|| bad("shape must be a tuple"))?;
                let dims = tuple[..close - 1]
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| bad(format!("bad dimension {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                shape = Some(dims);
                &after[close + 1..]
            }
            other => return Err(bad(format!("unexpected header key {other:?}"))),
        };
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(bad("expected ',' between header entries"));
        }
    }
    Ok(Header {
        descr: descr.ok_or_else(|| bad("header lacks descr"))?,
        fortran_order: fortran.ok_or_else(|| bad("header lacks fortran_order"))?,
        shape: shape.ok_or_else(|| bad("header lacks shape"))?,
    })
}

fn quoted(s: &str) -> Option<(&str, &str)> {
    let q = s.chars().next().filter(|&c| c == '\'' || c == '"')?;
    let end = s[1..].find(q)? + 1;
    Some((&s[1..end], &s[end + 1..]))
}

pub fn decode(bytes: &[u8]) -> Result<Tensor, String> {
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(bad("not an .npy file (bad magic)"));
    }
    if bytes[6..8] != [1, 0] {
        return Err(format!("unsupported .npy version {}.{}", bytes[6], bytes[7]));
    }
    let hlen = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let start = PREAMBLE + hlen;
    if bytes.len() < start {
        return Err(bad("truncated header"));
    }
    let text = std::str::from_utf8(&bytes[PREAMBLE..start]).map_err(|_| bad("header is not text"))?;
    let header = parse_header(text)?;
    let dtype = match header.descr.as_str() {
        "<f4" => Dtype::F4,
        "<f8" => Dtype::F8,
        other => return Err(format!("unsupported element type {other:?}")),
    };
    if header.fortran_order {
        return Err(bad("fortran_order arrays are not supported"));
    }
    let &[rows, cols] = header.shape.as_slice() else {
        return Err(format!("expected a 2-D array, found {} dimensions", header.shape.len()));
    };
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| bad("shape overflows"))?;
    let payload = &bytes[start..];
    let expected = count * dtype.width();
    if payload.len() != expected {
        return Err(format!(
            "payload holds {} bytes, shape {rows}x{cols} needs {expected}",
            payload.len()
        ));
    }
    let data: Vec<f64> = match dtype {
        Dtype::F4 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F8 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    let matrix = Matrix::new(rows, cols, data).map_err(|e| e.to_string())?;
    Ok(Tensor { dtype, matrix })
}

/// Encodes with the header layout numpy itself writes.
pub fn encode(matrix: &Matrix, dtype: Dtype) -> Vec<u8> {
    let mut header = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': ({}, {}), }}",
        dtype.descr(),
        matrix.rows(),
        matrix.cols()
    );
    let lead = matrix.rows().to_string().len();
    header.push_str(&" ".repeat(GROWTH_DIGITS.saturating_sub(lead)));
    let pad = (ALIGN - (PREAMBLE + header.len() + 1) % ALIGN) % ALIGN;
    header.push_str(&" ".repeat(pad));
    header.push('\n');

    let mut out = Vec::with_capacity(PREAMBLE + header.len() + matrix.as_slice().len() * dtype.width());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for &v in matrix.as_slice() {
        match dtype {
            Dtype::F4 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::F8 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|message| Error::Tensor {
        path: path.to_path_buf(),
        message,
    })
}

pub fn write_tensor(path: &Path, matrix: &Matrix, dtype: Dtype) -> Result<()> {
    fs::write(path, encode(matrix, dtype)).map_err(|e| Error::io(path, e))
}
