//! Matrix text and JSON formats.
//!
//! Text: a header line `rows cols`, then `rows` lines of `cols`
//! whitespace-separated decimals. JSON: `{"rows": [[...], ...]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Serialized matrix: an array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: Vec<Vec<f64>>,
}

impl From<&DenseMatrix> for MatrixJson {
    fn from(m: &DenseMatrix) -> Self {
        Self {
            rows: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self, origin: &str) -> Result<DenseMatrix> {
        let rows = self.rows.len();
        let cols = self.rows.first().map_or(0, Vec::len);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != cols {
                return Err(parse_error(
                    origin,
                    0,
                    format!("row {} has {} entries, expected {cols}", i + 1, row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(parse_error(
                    origin,
                    0,
                    format!("non-finite entry at row {}, column {}", i + 1, j + 1),
                ));
            }
        }
        Ok(DenseMatrix::from_fn(rows, cols, |i, j| self.rows[i][j]))
    }
}

fn parse_error(origin: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

pub fn matrix_to_json(m: &DenseMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("finite matrix serializes")
}

pub fn matrix_from_json(text: &str, origin: &str) -> Result<DenseMatrix> {
    let parsed: MatrixJson = serde_json::from_str(text).map_err(|e| parse_error(origin, e.line(), e.to_string()))?;
    parsed.to_matrix(origin)
}

/// Parses either format; JSON is recognized by a leading `{`.
pub fn parse_matrix(text: &str, origin: &str) -> Result<DenseMatrix> {
    if text.trim_start().starts_with('{') {
        return matrix_from_json(text, origin);
    }
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_error(origin, 1, "empty input, expected `rows cols` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [rows, cols] = dims.as_slice() else {
        return Err(parse_error(origin, header_line, "header must be `rows cols`"));
    };
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_error(origin, header_line, format!("invalid dimension `{s}`")))
    };
    let (rows, cols) = (parse_dim(rows)?, parse_dim(cols)?);

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line_no, line) in lines {
        if seen == rows {
            return Err(parse_error(
                origin,
                line_no,
                format!("unexpected extra row, header declared {rows}"),
            ));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(origin, line_no, format!("invalid number `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_error(origin, line_no, format!("non-finite value `{tok}`")));
            }
            data.push(v);
        }
        let got = data.len() - before;
        if got != cols {
            return Err(parse_error(
                origin,
                line_no,
                format!("row has {got} entries, expected {cols}"),
            ));
        }
        seen += 1;
    }
    if seen != rows {
        let last = text.lines().count().max(1);
        return Err(parse_error(origin, last, format!("expected {rows} rows, found {seen}")));
    }
    Ok(DenseMatrix::from_row_slice(rows, cols, &data))
}

/// `#[serde(with = ...)]` adapter storing a matrix as [`MatrixJson`].
pub mod matrix_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use super::{DenseMatrix, MatrixJson};

    pub fn serialize<S: Serializer>(m: &DenseMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DenseMatrix, D::Error> {
        MatrixJson::deserialize(d)?.to_matrix("json").map_err(D::Error::custom)
    }
}

/// Optional variant of [`matrix_serde`].
pub mod opt_matrix_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use super::{DenseMatrix, MatrixJson};

    pub fn serialize<S: Serializer>(m: &Option<DenseMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DenseMatrix>, D::Error> {
        Option::<MatrixJson>::deserialize(d)?
            .map(|j| j.to_matrix("json").map_err(D::Error::custom))
            .transpose()
    }
}

pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(&origin, 0, e.to_string()))?;
    parse_matrix(&text, &origin)
}

pub fn write_matrix_text(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_text_and_json() {
        let m = parse_matrix("2 3\n1 2 3\n4 5 6\n", "t").unwrap();
        assert_eq!(m[(1, 2)], 6.0);
        let j = parse_matrix(r#"{"rows": [[1, 2], [3, 4.5]]}"#, "j").unwrap();
        assert_eq!(j[(1, 1)], 4.5);
    }

    #[test]
    fn ragged_text_reports_line() {
        let err = parse_matrix("2 2\n1 2\n3\n", "bad.txt").unwrap_err();
        match err {
            Error::Parse { path, line, .. } => {
                assert_eq!(path, "bad.txt");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_and_ragged_json() {
        assert!(parse_matrix("1 2\n1 inf\n", "x").is_err());
        assert!(parse_matrix("1 1\nNaN\n", "x").is_err());
        assert!(parse_matrix(r#"{"rows": [[1, 2], [3]]}"#, "x").is_err());
        assert!(parse_matrix("2 2\n1 2\n", "x").is_err());
        assert!(parse_matrix("1 1\n1\n2\n", "x").is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = DenseMatrix::from_row_slice(2, 2, &[0.1, -2.5e-12, 3.0, 1.0 / 3.0]);
        assert_eq!(parse_matrix(&write_matrix_text(&m), "rt").unwrap(), m);
        assert_eq!(matrix_from_json(&matrix_to_json(&m), "rt").unwrap(), m);
    }
}
