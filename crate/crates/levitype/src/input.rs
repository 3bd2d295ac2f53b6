//! Text formats for structures, direction lists and points.
//!
//! A J-file holds `2n` rows of `2n` expressions separated by `;`. A
//! directions file holds one vector per line, entries separated by commas
//! or whitespace. In both, `#` starts a comment and blank lines are skipped.

use levitype_core::{Rational, TruncatedSeries};

use crate::expr::{self, parse_rational, ParseError};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn at(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Parsed J-file: the expression trees, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureMatrix {
    pub n: usize,
    pub entries: Vec<expr::Expr>,
}

impl StructureMatrix {
    pub fn degree_bound(&self) -> u32 {
        self.entries.iter().map(expr::Expr::degree_bound).max().unwrap_or(0)
    }

    pub fn to_series(&self, cap: u32) -> Result<Vec<TruncatedSeries>, ParseError> {
        self.entries.iter().map(|e| e.to_series(self.n, cap)).collect()
    }
}

pub fn parse_structure_file(text: &str, n: usize) -> Result<StructureMatrix, FormatError> {
    let d = 2 * n;
    let mut entries = Vec::with_capacity(d * d);
    let mut rows = 0;
    for (line, body) in content_lines(text) {
        let cells: Vec<&str> = body.split(';').map(str::trim).collect();
        if cells.len() != d {
            return Err(at(line, format!("expected {d} entries separated by ';', found {}", cells.len())));
        }
        for cell in cells {
            entries.push(expr::parse(cell, n).map_err(|e| at(line, format!("'{cell}': {e}")))?);
        }
        rows += 1;
    }
    if rows != d {
        return Err(at(0, format!("expected {d} rows, found {rows}")));
    }
    Ok(StructureMatrix { n, entries })
}

pub fn parse_vector(text: &str, dim: usize) -> Result<Vec<Rational>, String> {
    let parts: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != dim {
        return Err(format!("expected {dim} coordinates, found {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| parse_rational(p).ok_or_else(|| format!("'{p}' is not a rational number")))
        .collect()
}

pub fn parse_directions_file(text: &str, dim: usize) -> Result<Vec<Vec<Rational>>, FormatError> {
    content_lines(text)
        .map(|(line, body)| parse_vector(body, dim).map_err(|m| at(line, m)))
        .collect()
}
