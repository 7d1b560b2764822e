//! Matrix file formats.
//!
//! * text: a header line (`n` for square matrices, `rows cols` for
//!   rectangular ones), then one line per row holding alternating real and
//!   imaginary parts. Lines starting with `#` are comments.
//! * binary: magic `HAFM1`, little-endian `u64` n, then n² `(re, im)` pairs of
//!   little-endian `f64` in row-major order. Rectangular matrices use magic
//!   `HAFR1` followed by `u64` rows and `u64` cols.
//! * json: `{"n": .., "re": [[..]], "im": [[..]]}`; rectangular matrices carry
//!   `"rows"` and `"cols"` instead of `"n"`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, SymmetricMatrix, SymmetryMode};

pub const SQUARE_MAGIC: &[u8; 5] = b"HAFM1";
pub const RECT_MAGIC: &[u8; 5] = b"HAFR1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    #[default]
    Text,
    Binary,
    Json,
}

impl MatrixFormat {
    /// Guesses the format from a file extension, defaulting to text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin" | "hafm") => MatrixFormat::Binary,
            Some("json") => MatrixFormat::Json,
            _ => MatrixFormat::Text,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(MatrixFormat::Text),
            "binary" | "bin" => Ok(MatrixFormat::Binary),
            "json" => Ok(MatrixFormat::Json),
            other => Err(Error::Parse {
                line: 0,
                column: 0,
                message: format!("unknown matrix format '{other}'"),
            }),
        }
    }
}

/// Reads a square matrix and validates its symmetry in strict mode.
pub fn read_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<SymmetricMatrix> {
    let raw = read_complex_matrix(path, format)?;
    SymmetricMatrix::new(raw, SymmetryMode::Strict)
}

/// Reads a matrix of any shape.
pub fn read_complex_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<ComplexMatrix> {
    let bytes = fs::read(path)?;
    decode(&bytes, format)
}

pub fn write_matrix(a: &ComplexMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    fs::write(path, encode(a, format))?;
    Ok(())
}

pub fn decode(bytes: &[u8], format: MatrixFormat) -> Result<ComplexMatrix> {
    match format {
        MatrixFormat::Text => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
                line: 0,
                column: 0,
                message: format!("invalid utf-8: {e}"),
            })?;
            parse_text(text)
        }
        MatrixFormat::Binary => from_binary(bytes),
        MatrixFormat::Json => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
                line: 0,
                column: 0,
                message: format!("invalid utf-8: {e}"),
            })?;
            parse_json(text)
        }
    }
}

/// Square matrices get the square header variant, everything else the rectangular one.
pub fn encode(a: &ComplexMatrix, format: MatrixFormat) -> Vec<u8> {
    match format {
        MatrixFormat::Text => to_text(a).into_bytes(),
        MatrixFormat::Binary => to_binary(a),
        MatrixFormat::Json => to_json(a).into_bytes(),
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Whitespace-separated tokens with 1-based column of their first character.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let base = line.as_ptr() as usize;
    line.split_whitespace()
        .map(move |tok| (tok.as_ptr() as usize - base + 1, tok))
}

fn parse_usize(line: usize, (column, tok): (usize, &str)) -> Result<usize> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            column,
            format!("expected a non-negative integer, found '{tok}'"),
        )
    })
}

pub fn parse_text(text: &str) -> Result<ComplexMatrix> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "missing header line"))?;
    let head: Vec<_> = tokens(header).collect();
    let (rows, cols) = match head.as_slice() {
        [n] => {
            let n = parse_usize(hline, *n)?;
            (n, n)
        }
        [r, c] => (parse_usize(hline, *r)?, parse_usize(hline, *c)?),
        _ => return Err(parse_err(hline, 1, "header must be 'n' or 'rows cols'")),
    };

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0usize;
    for (lineno, line) in lines {
        if seen_rows == rows {
            return Err(Error::DimensionMismatch(format!(
                "line {lineno}: more than the declared {rows} rows"
            )));
        }
        let mut count = 0usize;
        let mut pending_re = None;
        for (column, tok) in tokens(line) {
            let x: f64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, column, format!("invalid number '{tok}'")))?;
            count += 1;
            match pending_re.take() {
                None => pending_re = Some(x),
                Some(re) => data.push(Complex64::new(re, x)),
            }
        }
        if count != 2 * cols {
            return Err(Error::DimensionMismatch(format!(
                "line {lineno}: expected {} numbers ({cols} complex entries), found {count}",
                2 * cols
            )));
        }
        seen_rows += 1;
    }
    // rows of a zero-column matrix carry no numbers, so they leave no lines
    if seen_rows != rows && !(cols == 0 && seen_rows == 0) {
        return Err(Error::DimensionMismatch(format!(
            "declared {rows} rows, found {seen_rows}"
        )));
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn to_text(a: &ComplexMatrix) -> String {
    let mut out = String::new();
    if a.is_square() {
        let _ = writeln!(out, "{}", a.rows());
    } else {
        let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    }
    for i in 0..a.rows() {
        let row: Vec<String> = a
            .row(i)
            .iter()
            .map(|z| format!("{:e} {:e}", z.re, z.im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn to_binary(a: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + 16 * a.as_slice().len());
    if a.is_square() {
        out.extend_from_slice(SQUARE_MAGIC);
        out.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    } else {
        out.extend_from_slice(RECT_MAGIC);
        out.extend_from_slice(&(a.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    }
    for z in a.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<ComplexMatrix> {
    fn read_u64(bytes: &[u8], at: usize) -> Result<u64> {
        bytes
            .get(at..at + 8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| parse_err(0, at, "truncated header"))
    }

    let magic = bytes
        .get(..5)
        .ok_or_else(|| parse_err(0, 0, "missing magic"))?;
    let (rows, cols, offset) = if magic == SQUARE_MAGIC {
        let n = read_u64(bytes, 5)? as usize;
        (n, n, 13)
    } else if magic == RECT_MAGIC {
        (
            read_u64(bytes, 5)? as usize,
            read_u64(bytes, 13)? as usize,
            21,
        )
    } else {
        return Err(parse_err(0, 0, "bad magic, expected HAFM1 or HAFR1"));
    };
    let entries = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::DimensionMismatch(format!("{rows}x{cols} overflows")))?;
    let payload = &bytes[offset..];
    if payload.len() != entries * 16 {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} matrix needs {} payload bytes, found {}",
            entries * 16,
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    cols: Option<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn to_json(a: &ComplexMatrix) -> String {
    let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..a.rows())
            .map(|i| a.row(i).iter().map(f).collect())
            .collect()
    };
    let (n, rows, cols) = if a.is_square() {
        (Some(a.rows()), None, None)
    } else {
        (None, Some(a.rows()), Some(a.cols()))
    };
    let doc = JsonMatrix {
        n,
        rows,
        cols,
        re: part(|z| z.re),
        im: part(|z| z.im),
    };
    serde_json::to_string(&doc).expect("plain numeric document serializes")
}

pub fn parse_json(text: &str) -> Result<ComplexMatrix> {
    let doc: JsonMatrix =
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
    let (rows, cols) = match (doc.n, doc.rows, doc.cols) {
        (Some(n), None, None) => (n, n),
        (None, Some(r), Some(c)) => (r, c),
        _ => {
            return Err(parse_err(
                1,
                1,
                "expected either \"n\" or both \"rows\" and \"cols\"",
            ))
        }
    };
    if doc.re.len() != rows || doc.im.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "declared {rows} rows, found {} real and {} imaginary rows",
            doc.re.len(),
            doc.im.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, (re, im)) in doc.re.iter().zip(&doc.im).enumerate() {
        if re.len() != cols || im.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "row {i}: expected {cols} columns"
            )));
        }
        data.extend(re.iter().zip(im).map(|(&r, &m)| Complex64::new(r, m)));
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_text_example() {
        let m = parse_text("2\n0 0 1 0\n1 0 0 0\n").unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn tiny_values_round_trip_through_every_format() {
        let m = ComplexMatrix::from_rows(&[[
            Complex64::new(0.0, -8.096678842496917e-97),
            Complex64::new(-0.0, 5e-324),
        ]])
        .unwrap();
        for format in [MatrixFormat::Text, MatrixFormat::Binary, MatrixFormat::Json] {
            let back = decode(&encode(&m, format), format).unwrap();
            for (x, y) in back.as_slice().iter().zip(m.as_slice()) {
                assert_eq!(
                    (x.re.to_bits(), x.im.to_bits()),
                    (y.re.to_bits(), y.im.to_bits()),
                    "{format:?}"
                );
            }
        }
    }

    #[test]
    fn zero_column_matrices_round_trip() {
        let m = ComplexMatrix::zeros(3, 0);
        for format in [MatrixFormat::Text, MatrixFormat::Binary, MatrixFormat::Json] {
            let back = decode(&encode(&m, format), format).unwrap();
            assert_eq!((back.rows(), back.cols()), (3, 0), "{format:?}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let m = parse_text("# header\n2\n\n0 0 1 0.5\n# middle\n1 0.5 0 0\n").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.5));
    }

    #[test]
    fn extra_row_is_a_dimension_mismatch() {
        let err = parse_text("2\n0 0 1 0\n1 0 0 0\n1 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)), "{err}");
    }

    #[test]
    fn missing_row_is_a_dimension_mismatch() {
        assert!(matches!(
            parse_text("2\n0 0 1 0\n"),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bad_token_reports_line_and_column() {
        match parse_text("2\n0 0 1 0\n1 0 x 0\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rectangular_text_header() {
        let m = parse_text("3 1\n1 0\n2 0\n3 -1\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 1));
        assert_eq!(m[(2, 0)], Complex64::new(3.0, -1.0));
        assert_eq!(parse_text(&to_text(&m)).unwrap(), m);
    }

    #[test]
    fn binary_layout() {
        let m = ComplexMatrix::from_rows(&[[Complex64::new(1.5, -2.0)]]).unwrap();
        let b = to_binary(&m);
        assert_eq!(&b[..5], b"HAFM1");
        assert_eq!(u64::from_le_bytes(b[5..13].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(b[13..21].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(b[21..29].try_into().unwrap()), -2.0);
        assert_eq!(b.len(), 29);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let m = ComplexMatrix::identity(3);
        let mut b = to_binary(&m);
        b.pop();
        assert!(matches!(from_binary(&b), Err(Error::DimensionMismatch(_))));
        assert!(from_binary(b"NOPE1").is_err());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 * 0.25));
        let s = to_json(&m);
        assert!(s.contains("\"rows\":2"));
        assert_eq!(parse_json(&s).unwrap(), m);
        let sq = parse_json(r#"{"n":1,"re":[[2.0]],"im":[[3.0]]}"#).unwrap();
        assert_eq!(sq[(0, 0)], Complex64::new(2.0, 3.0));
    }

    #[test]
    fn empty_matrix_round_trips() {
        let m = ComplexMatrix::zeros(0, 0);
        for f in [MatrixFormat::Text, MatrixFormat::Binary, MatrixFormat::Json] {
            assert_eq!(decode(&encode(&m, f), f).unwrap(), m);
        }
    }
}
