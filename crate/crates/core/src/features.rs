//! Per-vertex feature vectors and the comma-separated feature table format
//! (`vertex_id,f1,...,fd` per line, `#` comments).

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// `n × d` row-major matrix of finite values, one row per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(Error::SizeMismatch {
                what: "feature value count",
                expected: n * d,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                line: 0,
                vertex: pos / d.max(1),
            });
        }
        Ok(FeatureMatrix { n, d, values })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.d..(v + 1) * self.d]
    }

    pub fn row_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.values[v * self.d..(v + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |v| self.row(v))
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        for v in 0..self.n {
            write!(out, "{v}")?;
            for x in self.row(v) {
                write!(out, ",{x:?}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parses a feature table and checks it covers every vertex of `graph`
/// exactly once.
pub fn load_features<R: BufRead>(source: R, graph: &DirectedGraph) -> Result<FeatureMatrix> {
    let n = graph.n();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut d: Option<usize> = None;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.split(',').map(str::trim);
        let id_token = fields.next().unwrap_or_default();
        let vertex: usize = id_token.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid vertex id '{id_token}'"),
        })?;
        if vertex >= n {
            return Err(Error::VertexOutOfBounds {
                line: line_no,
                vertex,
                n,
            });
        }
        let mut row = Vec::new();
        for token in fields {
            let x: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid feature value '{token}'"),
            })?;
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    line: line_no,
                    vertex,
                });
            }
            row.push(x);
        }
        match d {
            None => d = Some(row.len()),
            Some(expected) if expected != row.len() => {
                return Err(Error::DimensionMismatch {
                    line: line_no,
                    expected,
                    found: row.len(),
                })
            }
            _ => {}
        }
        if rows[vertex].is_some() {
            return Err(Error::DuplicateRow {
                line: line_no,
                vertex,
            });
        }
        rows[vertex] = Some(row);
    }

    let d = d.unwrap_or(0);
    let mut values = Vec::with_capacity(n * d);
    for (v, row) in rows.into_iter().enumerate() {
        values.extend(row.ok_or(Error::MissingRow(v))?);
    }
    FeatureMatrix::new(n, d, values)
}
