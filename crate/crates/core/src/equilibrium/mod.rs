//! Tariff-equilibrium solvers.
//!
//! Three routes to the same object: an exact solve on a caller-supplied
//! trade pattern, a damped price-adjustment solver that discovers the
//! pattern, and an exhaustive enumeration oracle for small economies.

mod enumerate;
mod fixed;
pub mod flows;
mod revenue;
mod selection;
mod system;
mod tatonnement;

pub use enumerate::enumerate_equilibria;
pub use fixed::solve_fixed_network;
pub use flows::{canonical_flows, feasible_flows, Infeasibility};
pub use revenue::{autarky_price, best_response, effective_revenue, EffectiveRevenue, ResponseSegment};
pub use selection::{selection_slack, verify_selection, SelectionViolation, ViolationKind};
pub use tatonnement::solve_equilibrium;

use crate::economy::Violation;
use crate::pattern::{Link, TradePattern};
use serde::Serialize;
use thiserror::Error;

/// Which solver produced an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    FixedNetwork,
    FixedNetworkExact,
    Tatonnement,
    Enumerate,
    /// Built from caller-supplied flows rather than solved.
    Provided,
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MethodTag::FixedNetwork => "fixed_network",
            MethodTag::FixedNetworkExact => "fixed_network_exact",
            MethodTag::Tatonnement => "tatonnement",
            MethodTag::Enumerate => "enumerate",
            MethodTag::Provided => "provided",
        };
        f.write_str(s)
    }
}

/// Solver selection for scenarios and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedNetwork,
    Tatonnement,
    Enumerate,
}

/// Tunable solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Convergence target for the price-adjustment solver (relative).
    pub price_tolerance: f64,
    /// Relative tolerance for membership in an argmax (tie) set.
    pub tie_tolerance: f64,
    /// Flows below this are treated as zero.
    pub flow_tolerance: f64,
    /// Initial damping factor for price updates, in (0, 1].
    pub damping: f64,
    pub max_iterations: u64,
    pub method: Method,
    /// Solve fixed-network systems in exact rational arithmetic
    /// (linear curves only).
    pub exact_rational: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            price_tolerance: 1e-6,
            tie_tolerance: 1e-7,
            flow_tolerance: 1e-9,
            damping: 0.5,
            max_iterations: 100_000,
            method: Method::Tatonnement,
            exact_rational: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let ok = self.price_tolerance > 0.0
            && self.tie_tolerance > 0.0
            && self.flow_tolerance > 0.0
            && self.damping > 0.0
            && self.damping <= 1.0
            && self.max_iterations > 0;
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidOptions(
                "tolerances must be positive and damping in (0, 1]".into(),
            ))
        }
    }
}

/// Solver health indicators attached to every equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Largest relative market-clearing / production residual.
    pub clearing_residual: f64,
    /// Largest firm-selection gap (zero when selection-consistent).
    pub selection_slack: f64,
    pub iterations: u64,
    /// Set when the feasible flow polytope on the tie support has more
    /// than one vertex, i.e. the flow matrix is one of many.
    pub multiplicity: bool,
    pub method: MethodTag,
}

/// A tariff equilibrium: prices, one flow representative, and the active
/// trade pattern.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// Consumer price per country.
    pub consumer_prices: Vec<f64>,
    /// Producer price per country.
    pub producer_prices: Vec<f64>,
    /// `flows[i][j]` is the quantity produced in `j` and consumed in `i`.
    pub flows: Vec<Vec<f64>>,
    pub pattern: TradePattern,
    pub diagnostics: Diagnostics,
}

impl Equilibrium {
    pub fn n(&self) -> usize {
        self.consumer_prices.len()
    }

    /// Total consumption of market `i` (row sum).
    pub fn consumption(&self, market: usize) -> f64 {
        self.flows[market].iter().sum()
    }

    /// Total production of country `j` (column sum).
    pub fn production(&self, producer: usize) -> f64 {
        self.flows.iter().map(|row| row[producer]).sum()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid economy: {}", format_violations(.0))]
    InvalidEconomy(Vec<Violation>),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("fixed-network solve needs a nonempty pattern")]
    EmptyPattern,
    #[error("indeterminate pattern: the link equations are singular")]
    IndeterminatePattern,
    #[error("infeasible pattern: link {producer}->{market} requires negative flow {flow}")]
    InfeasiblePattern {
        producer: usize,
        market: usize,
        flow: f64,
    },
    #[error(
        "no convergence after {iterations} iterations (residual {residual:.3e}); \
         consider the enumerate method for small economies"
    )]
    Convergence { iterations: u64, residual: f64 },
    #[error("enumeration supports at most {limit} countries, got {n}")]
    TooManyCountries { n: usize, limit: usize },
    #[error("exact rational mode requires linear curves ({0})")]
    ExactModeUnsupported(String),
    #[error("margins admit no feasible flows: {0}")]
    InfeasibleFlows(Infeasibility),
    #[error("no equilibrium found")]
    NoEquilibrium,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn ensure_valid(economy: &crate::economy::Economy) -> Result<(), SolveError> {
    let report = crate::economy::validate_economy(economy);
    if report.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidEconomy(report))
    }
}

pub(crate) fn pattern_from_flows(flows: &[Vec<f64>], tol: f64) -> TradePattern {
    TradePattern::from_flows(flows, tol).expect("square flow matrix")
}

/// Uniform residual of Eqs-style clearing for a candidate equilibrium:
/// how far row sums are from demand at the consumer price and column sums
/// from supply at the producer price.
pub(crate) fn clearing_residual(
    economy: &crate::economy::Economy,
    consumer_prices: &[f64],
    producer_prices: &[f64],
    flows: &[Vec<f64>],
) -> f64 {
    let n = economy.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        let want = economy.countries[i]
            .demand
            .inverse(consumer_prices[i])
            .unwrap_or(f64::NAN);
        let got: f64 = flows[i].iter().sum();
        worst = worst.max((want - got).abs() / (1.0 + want.abs() + got.abs()));
    }
    for j in 0..n {
        let want = economy.countries[j]
            .supply
            .inverse(producer_prices[j])
            .unwrap_or(f64::NAN);
        let got: f64 = flows.iter().map(|row| row[j]).sum();
        worst = worst.max((want - got).abs() / (1.0 + want.abs() + got.abs()));
    }
    worst
}

#[allow(unused_imports)]
pub(crate) use system::build_equilibrium;
pub(crate) use system::solve_auto_impl;

/// Solve with the policy the CLI and sweeps use: honor a preferred pattern
/// when it exists, otherwise run the full solver with an enumeration
/// fallback for small economies.
pub fn solve_auto(
    economy: &crate::economy::Economy,
    preferred: Option<&TradePattern>,
    options: &SolverOptions,
) -> Result<Equilibrium, SolveError> {
    solve_auto_impl(economy, preferred, options)
}

/// Interpret a caller-supplied flow matrix as an equilibrium candidate:
/// prices are read off the aggregate curves per the clearing conditions,
/// so only firm selection remains to be checked.
pub fn equilibrium_from_flows(
    economy: &crate::economy::Economy,
    flows: Vec<Vec<f64>>,
    options: &SolverOptions,
) -> Result<Equilibrium, SolveError> {
    ensure_valid(economy)?;
    options.validate()?;
    let n = economy.n();
    if flows.len() != n || flows.iter().any(|row| row.len() != n) {
        return Err(SolveError::InvalidOptions(format!(
            "flow matrix must be {n}x{n}"
        )));
    }
    let mut consumer_prices = vec![0.0; n];
    let mut producer_prices = vec![0.0; n];
    for k in 0..n {
        let row: f64 = flows[k].iter().sum();
        let col: f64 = flows.iter().map(|r| r[k]).sum();
        consumer_prices[k] = economy.countries[k]
            .demand
            .eval(row)
            .map_err(|e| SolveError::InvalidOptions(e.to_string()))?;
        producer_prices[k] = economy.countries[k]
            .supply
            .eval(col)
            .map_err(|e| SolveError::InvalidOptions(e.to_string()))?;
    }
    let pattern = pattern_from_flows(&flows, options.flow_tolerance);
    let mut eq = Equilibrium {
        consumer_prices,
        producer_prices,
        flows,
        pattern,
        diagnostics: Diagnostics {
            clearing_residual: 0.0,
            selection_slack: 0.0,
            iterations: 0,
            multiplicity: false,
            method: MethodTag::Provided,
        },
    };
    eq.diagnostics.clearing_residual =
        clearing_residual(economy, &eq.consumer_prices, &eq.producer_prices, &eq.flows);
    eq.diagnostics.selection_slack = selection_slack(economy, &eq, options);
    Ok(eq)
}

/// Convenience constructor for patterns given as (producer, market) pairs.
pub fn links<const K: usize>(pairs: [(usize, usize); K]) -> Vec<Link> {
    pairs.iter().map(|&(p, m)| Link::new(p, m)).collect()
}
