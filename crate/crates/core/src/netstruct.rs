//! Structure of the cross-border trade network: cycle detection,
//! topological ordering, and pattern comparison.
//!
//! Domestic flows are excluded by construction; the acyclicity result is
//! about chains of trade between countries.

use crate::pattern::{Link, TradePattern};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("flow matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { n: usize, row: usize, len: usize },
    #[error("patterns cover different country sets ({a} vs {b} countries)")]
    CountryMismatch { a: usize, b: usize },
    #[error("graph contains a directed cycle: {0:?}")]
    Cycle(Vec<usize>),
}

/// Directed graph of cross-border trade: an edge j -> i whenever producer
/// j ships more than the tolerance into market i.
#[derive(Debug, Clone)]
pub struct TradeGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl TradeGraph {
    pub fn from_flows(flows: &[Vec<f64>], tolerance: f64) -> Result<TradeGraph, NetError> {
        let n = flows.len();
        for (row, r) in flows.iter().enumerate() {
            if r.len() != n {
                return Err(NetError::NotSquare {
                    n,
                    row,
                    len: r.len(),
                });
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (market, row) in flows.iter().enumerate() {
            for (producer, &q) in row.iter().enumerate() {
                if producer != market && q > tolerance {
                    adj[producer].push(market);
                }
            }
        }
        for neighbors in &mut adj {
            neighbors.sort_unstable();
        }
        Ok(TradeGraph { n, adj })
    }

    pub fn from_pattern(pattern: &TradePattern) -> TradeGraph {
        let mut adj = vec![Vec::new(); pattern.n()];
        for link in pattern.links() {
            if link.is_cross_border() {
                adj[link.producer].push(link.market);
            }
        }
        for neighbors in &mut adj {
            neighbors.sort_unstable();
        }
        TradeGraph {
            n: pattern.n(),
            adj,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (from, neighbors) in self.adj.iter().enumerate() {
            for &to in neighbors {
                out.push((from, to));
            }
        }
        out
    }
}

/// Outcome of a DAG check, with an explicit cycle witness on failure.
/// The witness lists countries in order and repeats the start at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct DagCheck {
    pub is_dag: bool,
    pub cycle: Option<Vec<usize>>,
}

/// Is the cross-border trade network acyclic?
pub fn is_dag(flows: &[Vec<f64>], tolerance: f64) -> Result<DagCheck, NetError> {
    let graph = TradeGraph::from_flows(flows, tolerance)?;
    Ok(match topological_order(&graph) {
        Ok(_) => DagCheck {
            is_dag: true,
            cycle: None,
        },
        Err(NetError::Cycle(witness)) => DagCheck {
            is_dag: false,
            cycle: Some(witness),
        },
        Err(other) => return Err(other),
    })
}

/// Kahn's algorithm with a deterministic tie-break: among ready nodes the
/// lowest index goes first. Errors with a cycle witness on cyclic input.
pub fn topological_order(graph: &TradeGraph) -> Result<Vec<usize>, NetError> {
    let n = graph.n;
    let mut indegree = vec![0usize; n];
    for neighbors in &graph.adj {
        for &to in neighbors {
            indegree[to] += 1;
        }
    }
    let mut ready = std::collections::BinaryHeap::new();
    for (v, &d) in indegree.iter().enumerate() {
        if d == 0 {
            ready.push(std::cmp::Reverse(v));
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = ready.pop() {
        order.push(v);
        for &to in &graph.adj[v] {
            indegree[to] -= 1;
            if indegree[to] == 0 {
                ready.push(std::cmp::Reverse(to));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // every leftover node keeps an incoming edge from another leftover
    // (otherwise its in-degree would have reached zero), so walking
    // predecessors must revisit one; the revisited segment is the cycle
    let leftover: Vec<usize> = (0..n).filter(|v| !order.contains(v)).collect();
    let mut incoming = vec![Vec::new(); n];
    for &u in &leftover {
        for &to in &graph.adj[u] {
            if leftover.contains(&to) {
                incoming[to].push(u);
            }
        }
    }
    for preds in &mut incoming {
        preds.sort_unstable();
    }
    let start = leftover[0];
    let mut seen = vec![false; n];
    let mut path = vec![start];
    seen[start] = true;
    let mut current = start;
    loop {
        let prev = *incoming[current]
            .first()
            .expect("leftover nodes keep an incoming edge among themselves");
        if seen[prev] {
            // path walks predecessors, so edges run path[k+1] -> path[k];
            // the forward cycle reverses the segment after its head
            let pos = path.iter().position(|&v| v == prev).expect("on path");
            let mut cycle = vec![prev];
            cycle.extend(path[pos + 1..].iter().rev());
            cycle.push(prev);
            return Err(NetError::Cycle(cycle));
        }
        seen[prev] = true;
        path.push(prev);
        current = prev;
    }
}

/// Links present in one pattern but not the other.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternDiff {
    pub added: Vec<Link>,
    pub removed: Vec<Link>,
}

/// Set difference of two trade patterns over the same country set.
pub fn pattern_diff(a: &TradePattern, b: &TradePattern) -> Result<PatternDiff, NetError> {
    if a.n() != b.n() {
        return Err(NetError::CountryMismatch { a: a.n(), b: b.n() });
    }
    Ok(PatternDiff {
        added: b.links().filter(|l| !a.contains(*l)).collect(),
        removed: a.links().filter(|l| !b.contains(*l)).collect(),
    })
}
