//! Maximum flow / minimum s-t cut with blocking flows (Dinic).
//!
//! Capacities are [`ExtReal`]s. Before solving they are mapped to integers on
//! a `2^-40` grid and every infinite unit is replaced by the sentinel
//! `B = 1 + Σ (finite grid capacities)`, so a minimum cut first minimizes the
//! number of infinite arcs it crosses and then the finite weight. Integer
//! capacities make augmentation terminate and the cut value exact on the grid.

use std::collections::VecDeque;

use crate::penalty::ExtReal;

/// Grid resolution: capacities are rounded to multiples of `1 / GRID_SCALE`.
pub const GRID_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: ExtReal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source < nodes && sink < nodes && source != sink);
        FlowNetwork {
            nodes,
            source,
            sink,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: ExtReal) {
        assert!(from < self.nodes && to < self.nodes);
        assert!(
            capacity.infinite_units() >= 0 && capacity.finite_part() >= 0.0,
            "negative capacity {capacity:?}"
        );
        self.arcs.push(FlowArc { from, to, capacity });
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    /// The infinite-capacity stand-in on the grid.
    pub fn sentinel(&self) -> u128 {
        1 + self
            .arcs
            .iter()
            .map(|a| to_grid(a.capacity.finite_part()))
            .sum::<u128>()
    }

    /// Integer capacities on the grid, sentinel substituted.
    pub fn grid_capacities(&self) -> Vec<u128> {
        let sentinel = self.sentinel();
        self.arcs
            .iter()
            .map(|a| a.capacity.infinite_units() as u128 * sentinel + to_grid(a.capacity.finite_part()))
            .collect()
    }

    /// Total capacity of arcs leaving `source_side`.
    pub fn cut_value(&self, source_side: &[bool]) -> ExtReal {
        self.arcs
            .iter()
            .filter(|a| source_side[a.from] && !source_side[a.to])
            .map(|a| a.capacity)
            .sum()
    }

    /// [`Self::cut_value`] on the grid.
    pub fn grid_cut_value(&self, source_side: &[bool]) -> u128 {
        self.arcs
            .iter()
            .zip(self.grid_capacities())
            .filter(|(a, _)| source_side[a.from] && !source_side[a.to])
            .map(|(_, c)| c)
            .sum()
    }
}

fn to_grid(x: f64) -> u128 {
    (x * GRID_SCALE).round() as u128
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCut {
    /// Sum of the original capacities crossing the cut.
    pub value: ExtReal,
    /// Maximum flow on the grid; equals the grid weight of the cut.
    pub grid_value: u128,
    /// `true` for nodes on the source side.
    pub source_side: Vec<bool>,
}

struct Residual {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u128>,
}

impl Residual {
    fn new(net: &FlowNetwork) -> Self {
        let mut r = Residual {
            head: vec![Vec::new(); net.nodes],
            to: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
        };
        for (arc, cap) in net.arcs.iter().zip(net.grid_capacities()) {
            // edge e and its reverse e ^ 1
            r.head[arc.from].push(r.to.len());
            r.to.push(arc.to);
            r.cap.push(cap);
            r.head[arc.to].push(r.to.len());
            r.to.push(arc.from);
            r.cap.push(0);
        }
        r
    }

    fn levels(&self, s: usize, t: usize, level: &mut [u32]) -> bool {
        level.fill(u32::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if self.cap[e] > 0 && level[w] == u32::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level[t] != u32::MAX
    }

    /// Saturates the level graph; iterative so long augmenting paths are fine.
    fn blocking_flow(&mut self, s: usize, t: usize, level: &mut [u32], next: &mut [usize]) -> u128 {
        next.fill(0);
        let mut total = 0u128;
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let push = path.iter().map(|&e| self.cap[e]).min().unwrap_or(0);
                for &e in &path {
                    self.cap[e] -= push;
                    self.cap[e ^ 1] += push;
                }
                total += push;
                // retreat to the tail of the first saturated edge
                let cut = path.iter().position(|&e| self.cap[e] == 0).unwrap_or(0);
                path.truncate(cut);
                v = path.last().map_or(s, |&e| self.to[e]);
                continue;
            }
            let mut advanced = false;
            while next[v] < self.head[v].len() {
                let e = self.head[v][next[v]];
                let w = self.to[e];
                if self.cap[e] > 0 && level[w] == level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                next[v] += 1;
            }
            if advanced {
                continue;
            }
            // dead end
            level[v] = u32::MAX;
            match path.pop() {
                None => return total,
                Some(e) => {
                    v = self.to[e ^ 1];
                    next[v] += 1;
                }
            }
        }
    }

    /// Nodes that can still reach `t` in the residual graph.
    fn reaches_sink(&self, t: usize) -> Vec<bool> {
        let mut mark = vec![false; self.head.len()];
        mark[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(y) = queue.pop_front() {
            for &e in &self.head[y] {
                let x = self.to[e];
                if !mark[x] && self.cap[e ^ 1] > 0 {
                    mark[x] = true;
                    queue.push_back(x);
                }
            }
        }
        mark
    }
}

/// Minimum s-t cut. The returned source side is the largest minimum cut's
/// source side: every node that cannot reach the sink in the final residual
/// graph.
pub fn max_flow_min_cut(net: &FlowNetwork) -> MinCut {
    let (s, t) = (net.source, net.sink);
    let mut residual = Residual::new(net);
    let mut level = vec![0u32; net.nodes];
    let mut next = vec![0usize; net.nodes];
    let mut flow = 0u128;
    while residual.levels(s, t, &mut level) {
        flow += residual.blocking_flow(s, t, &mut level, &mut next);
    }
    let source_side: Vec<bool> = residual.reaches_sink(t).iter().map(|&r| !r).collect();
    debug_assert_eq!(net.grid_cut_value(&source_side), flow);
    MinCut {
        value: net.cut_value(&source_side),
        grid_value: flow,
        source_side,
    }
}
