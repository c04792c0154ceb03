//! Ordered partitions and the `vertex_id,group` assignment file format.
//!
//! Group indices are 0-based in memory (`0..k`, group `i` precedes group `j`
//! when `i < j`) and 1-based in every file and report.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    k: usize,
    assign: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(k: usize, assign: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(v) = assign.iter().position(|&g| g >= k) {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} assigned to group {} but k = {k}",
                assign[v] + 1
            )));
        }
        Ok(OrderedPartition { k, assign })
    }

    /// Everything in the first group.
    pub fn single_group(n: usize, k: usize) -> Result<Self> {
        Self::new(k, vec![0; n])
    }

    /// Builds from 1-based group labels.
    pub fn from_one_based(k: usize, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidArgument("group labels are 1-based".into()));
        }
        Self::new(k, labels.iter().map(|&g| g - 1).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn group_of(&self, v: usize) -> usize {
        self.assign[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.assign.iter().map(|&g| g + 1).collect()
    }

    pub(crate) fn set(&mut self, v: usize, group: usize) {
        debug_assert!(group < self.k);
        self.assign[v] = group;
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.assign {
            sizes[g] += 1;
        }
        sizes
    }

    /// Members of each group in ascending vertex order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (v, &g) in self.assign.iter().enumerate() {
            groups[g].push(v);
        }
        groups
    }

    pub fn empty_groups(&self) -> usize {
        self.sizes().iter().filter(|&&s| s == 0).count()
    }

    pub fn write_assignment<W: Write>(&self, mut out: W) -> Result<()> {
        for (v, &g) in self.assign.iter().enumerate() {
            writeln!(out, "{v},{}", g + 1)?;
        }
        Ok(())
    }
}

/// Reads `vertex_id,group` lines (1-based groups). `k` is the largest group
/// label seen unless given explicitly; every vertex `0..n` must appear once.
pub fn load_assignment<R: BufRead>(source: R, k: Option<usize>) -> Result<OrderedPartition> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let parse = |t: &str| -> Result<usize> {
            t.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected 'vertex_id,group', found '{text}'"),
            })
        };
        let mut fields = text.split(',');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'vertex_id,group', found '{text}'"),
            });
        };
        let (v, g) = (parse(a)?, parse(b)?);
        if g == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "group labels are 1-based".into(),
            });
        }
        pairs.push((v, g));
    }
    let n = pairs.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
    let mut labels = vec![0usize; n];
    for (idx, &(v, g)) in pairs.iter().enumerate() {
        if labels[v] != 0 {
            return Err(Error::DuplicateRow {
                line: idx + 1,
                vertex: v,
            });
        }
        labels[v] = g;
    }
    if let Some(v) = labels.iter().position(|&g| g == 0) {
        return Err(Error::MissingRow(v));
    }
    let k = k.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(1));
    OrderedPartition::from_one_based(k, &labels)
}
