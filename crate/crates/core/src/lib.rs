//! Equilibrium solver for single-good trade networks under ad valorem
//! tariffs.
//!
//! Countries carry strictly monotone supply and demand curves; producers
//! ship only to the destinations with maximal tariff-adjusted revenue.
//! The crate computes the resulting prices, flow matrices, and welfare
//! decomposition, verifies firm-selection consistency and the acyclicity
//! of the cross-border network, and sweeps tariffs to locate discrete
//! trade-pattern reconfigurations.

pub mod curve;
pub mod driver;
pub mod economy;
pub mod equilibrium;
mod linsys;
pub mod netstruct;
pub mod output;
pub mod pattern;
pub mod scenario;
pub mod sweep;
pub mod welfare;

pub use curve::{cap_quantity, Curve, CurveError, CurveKind};
pub use driver::solve_scenario;
pub use economy::{validate_economy, Country, Economy, TariffMatrix, Violation};
pub use equilibrium::{
    best_response, canonical_flows, effective_revenue, enumerate_equilibria,
    equilibrium_from_flows, feasible_flows, solve_auto, solve_equilibrium, solve_fixed_network,
    verify_selection, Diagnostics, EffectiveRevenue, Equilibrium, Infeasibility, Method,
    MethodTag, ResponseSegment, SelectionViolation, SolveError, SolverOptions,
};
pub use netstruct::{is_dag, pattern_diff, topological_order, DagCheck, NetError, TradeGraph};
pub use output::{write_results, OutputFormat, Results};
pub use pattern::{Link, PatternError, TradePattern};
pub use scenario::{parse_flows, parse_scenario, write_scenario, Scenario, ScenarioError};
pub use sweep::{
    detect_regime_changes, refine_boundary, tariff_sweep, RegimeChange, SweepError, SweepResult,
    SweepRow,
};
pub use welfare::{
    consumer_surplus, firm_profits, tariff_revenue, welfare_report, welfare_report_with,
    CountryWelfare, WelfareReport,
};
