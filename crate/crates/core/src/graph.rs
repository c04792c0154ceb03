//! Directed graph container and the edge-list text format.
//!
//! Edge-list files are UTF-8 text. Lines starting with `#` and blank lines
//! are ignored. The first remaining line may be a single integer `n` (the
//! vertex count); every other line is `src dst` with whitespace-separated
//! decimal vertex ids. Without a header, `n` is one more than the largest id.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Immutable directed multigraph on vertices `0..n` with out- and in-edge
/// access in compressed adjacency form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph from an edge list. Parallel edges are kept; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (idx, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfBounds {
                        line: idx + 1,
                        vertex: x,
                        n,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line: idx + 1,
                    vertex: u,
                });
            }
        }
        Ok(Self::build(n, edges))
    }

    fn build(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let (out_offsets, out_targets) = compress(n, edges.iter().copied());
        let (in_offsets, in_sources) = compress(n, edges.iter().map(|&(u, v)| (v, u)));
        DirectedGraph {
            n,
            edges,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// The same vertex set with every edge reversed.
    pub fn reversed(&self) -> DirectedGraph {
        Self::build(self.n, self.edges.iter().map(|&(u, v)| (v, u)).collect())
    }

    /// Writes the graph in the edge-list format, header included.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.n)?;
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Counting-sort an edge stream into CSR offsets and neighbor ids, stable in
/// input order.
fn compress(n: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for (u, _) in pairs.clone() {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0usize; offsets[n]];
    for (u, v) in pairs {
        targets[cursor[u]] = v;
        cursor[u] += 1;
    }
    (offsets, targets)
}

/// Parses the edge-list format.
pub fn load_graph<R: BufRead>(source: R) -> Result<DirectedGraph> {
    let mut header: Option<usize> = None;
    let mut seen_content = false;
    let mut edges = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if !seen_content && tokens.len() == 1 {
            seen_content = true;
            header = Some(parse_id(tokens[0], line_no)?);
            continue;
        }
        seen_content = true;
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'src dst', found '{text}'"),
            });
        }
        let u = parse_id(tokens[0], line_no)?;
        let v = parse_id(tokens[1], line_no)?;
        if u == v {
            return Err(Error::SelfLoop {
                line: line_no,
                vertex: u,
            });
        }
        if let Some(n) = header {
            if u.max(v) >= n {
                return Err(Error::VertexOutOfBounds {
                    line: line_no,
                    vertex: u.max(v),
                    n,
                });
            }
        }
        edges.push((u, v));
    }

    let n = header.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Ok(DirectedGraph::build(n, edges))
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid vertex id '{token}'"),
    })
}
