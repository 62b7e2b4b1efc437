//! Flow feasibility and canonical flow selection on a restricted support.
//!
//! Margins (per-producer supply, per-market demand) plus an allowed link set
//! define a transportation polytope. Feasibility is a max-flow question;
//! the canonical representative minimizes total cross-border quantity with
//! a lexicographic tie-break, solved as min-cost flow.

use crate::pattern::TradePattern;
use std::fmt;

/// Why no feasible flow matrix exists for the given margins.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// Total supply and total demand differ beyond tolerance.
    GlobalImbalance { supply: f64, demand: f64 },
    /// A set of producers whose combined supply exceeds the combined demand
    /// of every market they may ship to.
    Cut {
        producers: Vec<usize>,
        supply: f64,
        reachable_demand: f64,
    },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::GlobalImbalance { supply, demand } => {
                write!(f, "global imbalance: supply {supply} vs demand {demand}")
            }
            Infeasibility::Cut {
                producers,
                supply,
                reachable_demand,
            } => write!(
                f,
                "producers {producers:?} supply {supply} but can reach only {reachable_demand} of demand"
            ),
        }
    }
}

impl std::error::Error for Infeasibility {}

const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Successive-shortest-path min-cost max-flow on tiny graphs. Bellman-Ford
/// on every round keeps negative costs (the maximize modes) correct.
struct McmfGraph {
    nodes: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl McmfGraph {
    fn new(nodes: usize) -> Self {
        McmfGraph {
            nodes,
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Push as much flow as possible from `s` to `t`, cheapest paths first.
    /// Returns total shipped.
    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut shipped = 0.0;
        loop {
            // Bellman-Ford over residual edges.
            let mut dist = vec![f64::INFINITY; self.nodes];
            let mut parent: Vec<Option<usize>> = vec![None; self.nodes];
            dist[s] = 0.0;
            for _ in 0..self.nodes {
                let mut relaxed = false;
                for u in 0..self.nodes {
                    if !dist[u].is_finite() {
                        continue;
                    }
                    for &eid in &self.adj[u] {
                        let e = self.edges[eid];
                        if e.cap <= RESIDUAL_EPS {
                            continue;
                        }
                        let nd = dist[u] + e.cost;
                        if nd < dist[e.to] - 1e-15 {
                            dist[e.to] = nd;
                            parent[e.to] = Some(eid);
                            relaxed = true;
                        }
                    }
                }
                if !relaxed {
                    break;
                }
            }
            if !dist[t].is_finite() {
                return shipped;
            }
            // bottleneck along the parent path
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while v != s {
                let eid = parent[v].expect("path edge");
                bottleneck = bottleneck.min(self.edges[eid].cap);
                v = self.edges[eid ^ 1].to;
            }
            if bottleneck <= RESIDUAL_EPS {
                return shipped;
            }
            let mut v = t;
            while v != s {
                let eid = parent[v].expect("path edge");
                self.edges[eid].cap -= bottleneck;
                self.edges[eid ^ 1].cap += bottleneck;
                v = self.edges[eid ^ 1].to;
            }
            shipped += bottleneck;
        }
    }
}

/// Link costs for the transportation solves.
#[derive(Clone, Copy)]
enum Objective<'a> {
    /// Minimize total cross-border quantity; ties prefer lexicographically
    /// smaller (market, producer) links.
    MinExports,
    /// Maximize cross-border quantity with the reversed lexicographic
    /// preference; the opposite corner of the polytope.
    MaxExports,
    /// Minimize or maximize a weighted total of the flows.
    Weighted { weights: &'a [Vec<f64>], maximize: bool },
    /// Pure feasibility (still prefers domestic links, for determinism).
    Assignment,
}

struct TransportSetup {
    n: usize,
    graph: McmfGraph,
    link_edges: Vec<(usize, usize, usize)>, // (market, producer, edge id)
}

fn build(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    objective: Objective,
) -> TransportSetup {
    let n = supplies.len();
    let source = 0;
    let producer = |j: usize| 1 + j;
    let market = |i: usize| 1 + n + i;
    let sink = 1 + 2 * n;
    let mut graph = McmfGraph::new(2 * n + 2);
    for (j, &s) in supplies.iter().enumerate() {
        graph.add(source, producer(j), s.max(0.0), 0.0);
    }
    for (i, &d) in demands.iter().enumerate() {
        graph.add(market(i), sink, d.max(0.0), 0.0);
    }
    let lex = |i: usize, j: usize| (i * n + j + 1) as f64 / (n * n + 1) as f64;
    let mut link_edges = Vec::new();
    for link in support.links() {
        let (j, i) = (link.producer, link.market);
        let cross = if i == j { 0.0 } else { 1.0 };
        let cost = match objective {
            Objective::MinExports => cross + 1e-7 * lex(i, j),
            Objective::MaxExports => -cross + 1e-7 * lex(n - 1 - i, n - 1 - j),
            Objective::Weighted { weights, maximize } => {
                let w = weights[i][j];
                let signed = if maximize { -w } else { w };
                signed + 1e-9 * lex(i, j)
            }
            Objective::Assignment => cross + 1e-7 * lex(i, j),
        };
        let id = graph.add(producer(j), market(i), f64::INFINITY, cost);
        link_edges.push((i, j, id));
    }
    let _ = sink;
    TransportSetup {
        n,
        graph,
        link_edges,
    }
}

fn extract(setup: &TransportSetup) -> Vec<Vec<f64>> {
    let n = setup.n;
    let mut flows = vec![vec![0.0; n]; n];
    for &(i, j, eid) in &setup.link_edges {
        // flow on a link equals the residual gained by its reverse edge
        flows[i][j] = setup.graph.edges[eid ^ 1].cap;
    }
    flows
}

fn run_transport(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    objective: Objective,
) -> (Vec<Vec<f64>>, f64) {
    let n = supplies.len();
    let mut setup = build(supplies, demands, support, objective);
    let shipped = setup.graph.run(0, 1 + 2 * n);
    (extract(&setup), shipped)
}

fn cut_certificate(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    setup_flows: &[Vec<f64>],
) -> Infeasibility {
    // Producers with unsold supply, expanded to everything they can reach
    // through the support, form a Hall violator.
    let n = supplies.len();
    let sold: Vec<f64> = (0..n)
        .map(|j| setup_flows.iter().map(|row| row[j]).sum::<f64>())
        .collect();
    let mut in_set = vec![false; n];
    for j in 0..n {
        if supplies[j] - sold[j] > RESIDUAL_EPS {
            in_set[j] = true;
        }
    }
    // close under: markets of members, then producers shipping into those
    // markets with slack... for the certificate, the member producers plus
    // every producer sharing a reachable market.
    let mut changed = true;
    let mut market_reach = vec![false; n];
    while changed {
        changed = false;
        for j in 0..n {
            if !in_set[j] {
                continue;
            }
            for m in support.markets_of(j) {
                if !market_reach[m] {
                    market_reach[m] = true;
                    changed = true;
                }
            }
        }
        for link in support.links() {
            if market_reach[link.market]
                && !in_set[link.producer]
                && setup_flows[link.market][link.producer] > RESIDUAL_EPS
            {
                in_set[link.producer] = true;
                changed = true;
            }
        }
    }
    let producers: Vec<usize> = (0..n).filter(|&j| in_set[j]).collect();
    let supply: f64 = producers.iter().map(|&j| supplies[j]).sum();
    let reachable_demand: f64 = (0..n)
        .filter(|&m| market_reach[m])
        .map(|m| demands[m])
        .sum();
    Infeasibility::Cut {
        producers,
        supply,
        reachable_demand,
    }
}

fn check_balance(supplies: &[f64], demands: &[f64], tol: f64) -> Result<(), Infeasibility> {
    let s: f64 = supplies.iter().sum();
    let d: f64 = demands.iter().sum();
    if (s - d).abs() > tol * (1.0 + s.abs() + d.abs()) {
        Err(Infeasibility::GlobalImbalance { supply: s, demand: d })
    } else {
        Ok(())
    }
}

fn clean(mut flows: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    for row in &mut flows {
        for q in row.iter_mut() {
            if q.abs() <= tol {
                *q = 0.0;
            }
        }
    }
    flows
}

/// Some feasible flow matrix with the given margins on the given support,
/// or a certificate that none exists.
pub fn feasible_flows(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    tol: f64,
) -> Result<Vec<Vec<f64>>, Infeasibility> {
    check_balance(supplies, demands, tol)?;
    let (flows, shipped) = run_transport(supplies, demands, support, Objective::Assignment);
    let total: f64 = demands.iter().map(|d| d.max(0.0)).sum();
    if total - shipped > tol * (1.0 + total) {
        Err(cut_certificate(supplies, demands, support, &flows))
    } else {
        Ok(clean(flows, tol))
    }
}

/// The canonical flow representative: among feasible matrices, the one
/// minimizing total cross-border quantity, ties broken lexicographically.
pub fn canonical_flows(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    tol: f64,
) -> Result<Vec<Vec<f64>>, Infeasibility> {
    check_balance(supplies, demands, tol)?;
    let (flows, shipped) = run_transport(supplies, demands, support, Objective::MinExports);
    let total: f64 = demands.iter().map(|d| d.max(0.0)).sum();
    if total - shipped > tol * (1.0 + total) {
        Err(cut_certificate(supplies, demands, support, &flows))
    } else {
        Ok(clean(flows, tol))
    }
}

/// Does the feasible polytope on this support hold more than one vertex?
/// Probed by solving from opposite corners (min exports with forward
/// tie-breaking vs max exports with reversed tie-breaking).
pub fn has_multiple_vertices(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    tol: f64,
) -> Result<bool, Infeasibility> {
    let a = canonical_flows(supplies, demands, support, tol)?;
    let (b, _) = run_transport(supplies, demands, support, Objective::MaxExports);
    let b = clean(b, tol);
    let n = supplies.len();
    let scale = 1.0 + supplies.iter().chain(demands).fold(0.0f64, |m, &v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..n {
            if (a[i][j] - b[i][j]).abs() > tol.max(1e-9) * scale {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Flow matrix minimizing or maximizing a weighted flow total over the
/// feasible polytope. Used for tariff-revenue bounds under multiplicity.
pub fn extremal_weighted_flows(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
    weights: &[Vec<f64>],
    maximize: bool,
    tol: f64,
) -> Result<Vec<Vec<f64>>, Infeasibility> {
    check_balance(supplies, demands, tol)?;
    let (flows, shipped) = run_transport(
        supplies,
        demands,
        support,
        Objective::Weighted { weights, maximize },
    );
    let total: f64 = demands.iter().map(|d| d.max(0.0)).sum();
    if total - shipped > tol * (1.0 + total) {
        Err(cut_certificate(supplies, demands, support, &flows))
    } else {
        Ok(clean(flows, tol))
    }
}

/// Best-effort assignment for unbalanced margins: ship as much as the
/// support allows, preferring domestic links. Used inside the price
/// iteration, where supply and demand need not match yet.
pub(crate) fn assign_best_effort(
    supplies: &[f64],
    demands: &[f64],
    support: &TradePattern,
) -> Vec<Vec<f64>> {
    let (flows, _) = run_transport(supplies, demands, support, Objective::Assignment);
    flows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{Link, TradePattern};

    fn full_scenario1_support() -> TradePattern {
        // EU and USA tied on every market, China sells only at home.
        TradePattern::new(
            3,
            [
                Link::new(0, 0),
                Link::new(0, 1),
                Link::new(0, 2),
                Link::new(1, 0),
                Link::new(1, 1),
                Link::new(1, 2),
                Link::new(2, 2),
            ],
        )
        .unwrap()
    }

    const S1_SUPPLIES: [f64; 3] = [914.0 / 169.0, 576.0 / 169.0, 29.5 / 169.0];
    const S1_DEMANDS: [f64; 3] = [557.0 / 169.0, 485.0 / 169.0, 477.5 / 169.0];

    #[test]
    fn scenario1_margins_are_feasible() {
        let q = feasible_flows(&S1_SUPPLIES, &S1_DEMANDS, &full_scenario1_support(), 1e-9)
            .unwrap();
        for i in 0..3 {
            let row: f64 = q[i].iter().sum();
            assert!((row - S1_DEMANDS[i]).abs() < 1e-9);
            let col: f64 = q.iter().map(|r| r[i]).sum();
            assert!((col - S1_SUPPLIES[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn disconnected_demand_yields_cut() {
        let support = TradePattern::new(2, [Link::new(0, 0)]).unwrap();
        let err = feasible_flows(&[1.0, 0.0], &[0.0, 1.0], &support, 1e-9).unwrap_err();
        match err {
            Infeasibility::Cut { producers, .. } => assert_eq!(producers, vec![0]),
            other => panic!("expected cut certificate, got {other:?}"),
        }
    }

    #[test]
    fn zero_margins_give_zero_matrix() {
        let support = TradePattern::new(2, [Link::new(0, 0), Link::new(1, 1)]).unwrap();
        let q = feasible_flows(&[0.0, 0.0], &[0.0, 0.0], &support, 1e-9).unwrap();
        assert!(q.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn imbalance_is_certified() {
        let support = TradePattern::new(1, [Link::new(0, 0)]).unwrap();
        let err = feasible_flows(&[2.0], &[1.0], &support, 1e-9).unwrap_err();
        assert!(matches!(err, Infeasibility::GlobalImbalance { .. }));
    }

    #[test]
    fn canonical_scenario1_minimizes_exports() {
        let q = canonical_flows(&S1_SUPPLIES, &S1_DEMANDS, &full_scenario1_support(), 1e-9)
            .unwrap();
        // Domestic demand absorbed first; only China's import need crosses
        // borders: 357/169 from the EU and 91/169 from the USA.
        assert!((q[0][0] - 557.0 / 169.0).abs() < 1e-9);
        assert!((q[1][1] - 485.0 / 169.0).abs() < 1e-9);
        assert!((q[2][0] - 357.0 / 169.0).abs() < 1e-9);
        assert!((q[2][1] - 91.0 / 169.0).abs() < 1e-9);
        assert!((q[2][2] - 29.5 / 169.0).abs() < 1e-9);
        let exports: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| q[i][j])
            .sum();
        assert!((exports - 448.0 / 169.0).abs() < 1e-9);
    }

    #[test]
    fn unique_polytope_returns_the_single_matrix() {
        // One producer serving one market: margins pin the matrix.
        let support = TradePattern::new(2, [Link::new(0, 0), Link::new(1, 1)]).unwrap();
        let q = canonical_flows(&[2.0, 3.0], &[2.0, 3.0], &support, 1e-9).unwrap();
        assert_eq!(q, vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert!(!has_multiple_vertices(&[2.0, 3.0], &[2.0, 3.0], &support, 1e-9).unwrap());
    }

    #[test]
    fn single_country_is_diagonal() {
        let support = TradePattern::new(1, [Link::new(0, 0)]).unwrap();
        let q = canonical_flows(&[4.0], &[4.0], &support, 1e-9).unwrap();
        assert_eq!(q, vec![vec![4.0]]);
    }

    #[test]
    fn scenario1_polytope_has_multiple_vertices() {
        assert!(has_multiple_vertices(
            &S1_SUPPLIES,
            &S1_DEMANDS,
            &full_scenario1_support(),
            1e-9
        )
        .unwrap());
    }

    #[test]
    fn weighted_extremes_bracket_the_canonical_value() {
        let support = full_scenario1_support();
        let weights: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i != j { 1.0 } else { 0.0 }).collect())
            .collect();
        let lo = extremal_weighted_flows(&S1_SUPPLIES, &S1_DEMANDS, &support, &weights, false, 1e-9)
            .unwrap();
        let hi = extremal_weighted_flows(&S1_SUPPLIES, &S1_DEMANDS, &support, &weights, true, 1e-9)
            .unwrap();
        let value = |q: &Vec<Vec<f64>>| -> f64 {
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| weights[i][j] * q[i][j])
                .sum()
        };
        assert!(value(&lo) < value(&hi));
        assert!((value(&lo) - 448.0 / 169.0).abs() < 1e-6);
    }
}
