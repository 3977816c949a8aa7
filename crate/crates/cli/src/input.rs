//! Matrix and graph input formats.

use hyplat::linalg::int;
use hyplat::IntMatrix;
use num_bigint::BigInt;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("entry ({row}, {col}): {message}")]
    Entry { row: usize, col: usize, message: String },

    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("graph: {0}")]
    Graph(String),

    #[error("{0}")]
    Other(String),
}

/// A whitespace-separated token with its 1-based position.
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut start = None;
        for (c, (byte, ch)) in line.char_indices().enumerate().chain(std::iter::once((line.chars().count(), (line.len(), ' ')))) {
            if ch.is_whitespace() {
                if let Some((b0, c0)) = start.take() {
                    out.push(Token { text: &line[b0..byte], line: l + 1, column: c0 + 1 });
                }
            } else if start.is_none() {
                start = Some((byte, c));
            }
        }
    }
    out
}

fn end_position(text: &str) -> (usize, usize) {
    let lines: Vec<&str> = text.lines().collect();
    match lines.last() {
        Some(last) => (lines.len(), last.chars().count() + 1),
        None => (1, 1),
    }
}

/// Accepts ASCII and Unicode minus signs.
fn parse_int(s: &str) -> Option<BigInt> {
    s.replace('\u{2212}', "-").parse().ok()
}

fn parse_error(t: &Token<'_>, message: impl Into<String>) -> InputError {
    InputError::Parse { line: t.line, column: t.column, message: message.into() }
}

/// A symmetric integer matrix, either as `n` followed by `n^2` entries or as
/// a JSON array of rows. Lines may carry `#` comments in the token format.
pub fn parse_matrix(text: &str) -> Result<IntMatrix, InputError> {
    let m = if text.trim_start().starts_with('[') { parse_json_matrix(text)? } else { parse_token_matrix(text)? };
    for i in 0..m.rows() {
        for j in 0..i {
            if m[(i, j)] != m[(j, i)] {
                return Err(InputError::Asymmetric { row: i + 1, col: j + 1 });
            }
        }
    }
    Ok(m)
}

fn parse_token_matrix(text: &str) -> Result<IntMatrix, InputError> {
    let toks = tokens(text);
    let Some(first) = toks.first() else {
        return Err(InputError::Parse { line: 1, column: 1, message: "empty input".into() });
    };
    let n: usize = first.text.parse().map_err(|_| parse_error(first, format!("expected the dimension, found `{}`", first.text)))?;
    if n == 0 {
        return Err(parse_error(first, "dimension must be positive"));
    }
    let want = n * n;
    if toks.len() - 1 > want {
        return Err(parse_error(&toks[want + 1], format!("expected {want} entries, found {}", toks.len() - 1)));
    }
    if toks.len() - 1 < want {
        let (line, column) = end_position(text);
        return Err(InputError::Parse { line, column, message: format!("expected {want} entries, found {}", toks.len() - 1) });
    }
    let mut data = Vec::with_capacity(want);
    for t in &toks[1..] {
        data.push(parse_int(t.text).ok_or_else(|| parse_error(t, format!("`{}` is not an integer", t.text)))?);
    }
    Ok(IntMatrix::new(n, n, data))
}

fn parse_json_matrix(text: &str) -> Result<IntMatrix, InputError> {
    let rows: Vec<Vec<Value>> =
        serde_json::from_str(text).map_err(|e| InputError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    let n = rows.len();
    if n == 0 {
        return Err(InputError::Other("empty matrix".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(InputError::Entry { row: i + 1, col: row.len(), message: format!("row has {} entries, expected {n}", row.len()) });
        }
        for (j, v) in row.iter().enumerate() {
            let parsed = match v {
                Value::Number(x) => parse_int(&x.to_string()),
                Value::String(s) => parse_int(s.trim()),
                _ => None,
            };
            data.push(parsed.ok_or_else(|| InputError::Entry { row: i + 1, col: j + 1, message: format!("`{v}` is not an integer") })?);
        }
    }
    Ok(IntMatrix::new(n, n, data))
}

/// The vertex count followed by edges as pairs of 1-based vertices.
pub fn parse_edges(text: &str) -> Result<(usize, Vec<(usize, usize)>), InputError> {
    let toks = tokens(text);
    let Some(first) = toks.first() else {
        return Err(InputError::Parse { line: 1, column: 1, message: "empty input".into() });
    };
    let n: usize = first.text.parse().map_err(|_| parse_error(first, format!("expected the vertex count, found `{}`", first.text)))?;
    let mut vertices = Vec::with_capacity(toks.len() - 1);
    for t in &toks[1..] {
        vertices.push(t.text.parse::<usize>().map_err(|_| parse_error(t, format!("`{}` is not a vertex", t.text)))?);
    }
    if vertices.len() % 2 == 1 {
        let (line, column) = end_position(text);
        return Err(InputError::Parse { line, column, message: "edge list ends with an unpaired vertex".into() });
    }
    Ok((n, vertices.chunks(2).map(|c| (c[0], c[1])).collect()))
}

/// `2 I` with `-1` at the positions of adjacent vertices.
pub fn graph_to_gram(edges: &[(usize, usize)], n: usize) -> Result<IntMatrix, InputError> {
    let mut m = IntMatrix::identity(n).scale(&int(2));
    for &(a, b) in edges {
        if a == b {
            return Err(InputError::Graph(format!("self-loop at vertex {a}")));
        }
        if a == 0 || b == 0 || a > n || b > n {
            return Err(InputError::Graph(format!("edge ({a}, {b}) leaves the vertex range 1..={n}")));
        }
        if m[(a - 1, b - 1)] != int(0) {
            return Err(InputError::Graph(format!("edge ({a}, {b}) appears twice")));
        }
        m[(a - 1, b - 1)] = int(-1);
        m[(b - 1, a - 1)] = int(-1);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_format() {
        let a = parse_matrix("3 −1 −3 −1 −3 14 8 −1 8 11").unwrap();
        assert_eq!(a, IntMatrix::from_i64_rows(&[&[-1, -3, -1], &[-3, 14, 8], &[-1, 8, 11]]));
        let b = parse_matrix("2\n-1 0   # first row\n0 1\n").unwrap();
        assert_eq!(b, IntMatrix::from_i64_rows(&[&[-1, 0], &[0, 1]]));
    }

    #[test]
    fn token_count_errors_carry_positions() {
        assert_eq!(
            parse_matrix("2 -1 0\n0").unwrap_err(),
            InputError::Parse { line: 2, column: 2, message: "expected 4 entries, found 3".into() }
        );
        assert_eq!(
            parse_matrix("2 -1 0 0 1\n  7").unwrap_err(),
            InputError::Parse { line: 2, column: 3, message: "expected 4 entries, found 5".into() }
        );
        assert!(matches!(parse_matrix("2 -1 x 0 1"), Err(InputError::Parse { line: 1, column: 6, .. })));
        assert!(matches!(parse_matrix("  "), Err(InputError::Parse { .. })));
    }

    #[test]
    fn json_format() {
        assert_eq!(parse_matrix("[[-1,0],[0,1]]").unwrap(), IntMatrix::from_i64_rows(&[&[-1, 0], &[0, 1]]));
        let big = parse_matrix(r#"[["-123456789012345678901234567890", 0], [0, 1]]"#).unwrap();
        assert_eq!(big[(0, 0)].to_string(), "-123456789012345678901234567890");
        assert!(matches!(parse_matrix("[[1, 2],\n [3 4]]"), Err(InputError::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("[[1.5, 0], [0, 1]]"), Err(InputError::Entry { row: 1, col: 1, .. })));
        assert!(matches!(parse_matrix("[[1, 0, 0], [0, 1, 0]]"), Err(InputError::Entry { .. })));
    }

    #[test]
    fn symmetry_is_enforced() {
        assert_eq!(parse_matrix("2 1 2 3 1").unwrap_err(), InputError::Asymmetric { row: 2, col: 1 });
    }

    #[test]
    fn graphs() {
        let k4: Vec<(usize, usize)> = vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        let m = graph_to_gram(&k4, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], int(if i == j { 2 } else { -1 }));
            }
        }
        assert_eq!(graph_to_gram(&[(1, 2)], 2).unwrap(), IntMatrix::from_i64_rows(&[&[2, -1], &[-1, 2]]));
        assert!(graph_to_gram(&[(1, 1)], 2).is_err());
        assert!(graph_to_gram(&[(1, 3)], 2).is_err());
        assert!(graph_to_gram(&[(1, 2), (2, 1)], 2).is_err());
        assert_eq!(parse_edges("3\n1 2\n2 3").unwrap(), (3, vec![(1, 2), (2, 3)]));
        assert!(parse_edges("3\n1 2\n2").is_err());
    }
}
