//! Exact equilibrium solve on a caller-supplied trade pattern.
//!
//! Each active link (producer j -> market i) contributes one equation:
//! the destination's consumer price net of the tariff equals the
//! producer's supply price, with prices read off the aggregate curves.
//! That is m equations in the m link flows. Firm selection is *not*
//! enforced here; `verify_selection` checks it separately, which is what
//! makes this mode suitable for replicating hand-picked configurations.

use super::{
    clearing_residual, ensure_valid, selection::max_selection_gap, Diagnostics, Equilibrium,
    MethodTag, SolveError, SolverOptions,
};
use crate::economy::Economy;
use crate::linsys::{rational_from_f64, rational_to_f64, solve_f64, solve_rational};
use crate::pattern::{Link, TradePattern};
use num_rational::BigRational;
use num_traits::Zero;

/// Solve the link-equation system on exactly the given pattern.
///
/// Markets with no incoming links consume nothing at the choke price;
/// producers with no outgoing links produce nothing at `s(0)`.
pub fn solve_fixed_network(
    economy: &Economy,
    pattern: &TradePattern,
    options: &SolverOptions,
) -> Result<Equilibrium, SolveError> {
    ensure_valid(economy)?;
    options.validate()?;
    if pattern.is_empty() {
        return Err(SolveError::EmptyPattern);
    }
    if pattern.n() != economy.n() {
        return Err(SolveError::InvalidOptions(format!(
            "pattern is over {} countries, economy has {}",
            pattern.n(),
            economy.n()
        )));
    }
    let links: Vec<Link> = pattern.links().collect();
    let (flows, iterations) = if options.exact_rational {
        (solve_links_exact(economy, &links)?, 1)
    } else {
        solve_links_iterative(economy, &links)?
    };
    build_fixed_equilibrium(economy, pattern, &links, flows, options, iterations)
}

/// Affine view of each country's aggregate curves at given row/column sums:
/// demand value `ad - bd*q`, supply value `as + bs*q` on the local segment.
fn segment_coeffs(economy: &Economy, rows: &[f64], cols: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    economy
        .countries
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let (ad, bd) = c.demand.affine_at(rows[k].max(0.0));
            let (as_, bs) = c.supply.affine_at(cols[k].max(0.0));
            (ad, bd, as_, bs)
        })
        .collect()
}

/// Assemble and solve the m x m linear system for one segment assignment.
fn solve_once(
    economy: &Economy,
    links: &[Link],
    coeffs: &[(f64, f64, f64, f64)],
) -> Option<Vec<f64>> {
    let m = links.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (row, link) in links.iter().enumerate() {
        let (i, j) = (link.market, link.producer);
        let (ad, bd, _, _) = coeffs[i];
        let (_, _, as_j, bs_j) = coeffs[j];
        let factor = 1.0 + economy.tariffs.rate(i, j);
        // d_i(row_i) = (1+t) s_j(col_j), i.e.
        // -bd*row_i + (1+t)*bs*col_j = ad - (1+t)*as
        for (var, other) in links.iter().enumerate() {
            if other.market == i {
                a[row][var] -= bd;
            }
            if other.producer == j {
                a[row][var] += factor * bs_j;
            }
        }
        b[row] = ad - factor * as_j;
    }
    solve_f64(a, b)
}

/// Iterate the segment assignment to a fixed point (a single pass for
/// linear curves).
fn solve_links_iterative(
    economy: &Economy,
    links: &[Link],
) -> Result<(Vec<f64>, u64), SolveError> {
    let n = economy.n();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    let mut flows = vec![0.0; links.len()];
    let mut iterations = 0u64;
    for _ in 0..64 {
        iterations += 1;
        let coeffs = segment_coeffs(economy, &rows, &cols);
        let solution =
            solve_once(economy, links, &coeffs).ok_or(SolveError::IndeterminatePattern)?;
        let mut new_rows = vec![0.0; n];
        let mut new_cols = vec![0.0; n];
        for (k, link) in links.iter().enumerate() {
            new_rows[link.market] += solution[k];
            new_cols[link.producer] += solution[k];
        }
        let moved = rows
            .iter()
            .chain(cols.iter())
            .zip(new_rows.iter().chain(new_cols.iter()))
            .any(|(a, b)| (a - b).abs() > 1e-13 * (1.0 + a.abs()));
        flows = solution;
        rows = new_rows;
        cols = new_cols;
        if !moved {
            return Ok((flows, iterations));
        }
    }
    // Accept if the nonlinear residual is already tight; otherwise report.
    let residual = link_residual(economy, links, &flows);
    if residual <= 1e-8 {
        Ok((flows, iterations))
    } else {
        Err(SolveError::Convergence {
            iterations,
            residual,
        })
    }
}

fn link_residual(economy: &Economy, links: &[Link], flows: &[f64]) -> f64 {
    let n = economy.n();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for (k, link) in links.iter().enumerate() {
        rows[link.market] += flows[k];
        cols[link.producer] += flows[k];
    }
    let mut worst = 0.0f64;
    for link in links {
        let (i, j) = (link.market, link.producer);
        let d = economy.countries[i].demand.raw_eval(rows[i].max(0.0));
        let s = economy.countries[j].supply.raw_eval(cols[j].max(0.0));
        let factor = 1.0 + economy.tariffs.rate(i, j);
        worst = worst.max((d - factor * s).abs() / (1.0 + d.abs() + s.abs()));
    }
    worst
}

/// Exact rational solve; requires every curve linear.
fn solve_links_exact(economy: &Economy, links: &[Link]) -> Result<Vec<f64>, SolveError> {
    let n = economy.n();
    let mut demand_lin = Vec::with_capacity(n);
    let mut supply_lin = Vec::with_capacity(n);
    for c in &economy.countries {
        let d = c.demand.as_linear().ok_or_else(|| {
            SolveError::ExactModeUnsupported(format!("country {} has a piecewise demand", c.id))
        })?;
        let s = c.supply.as_linear().ok_or_else(|| {
            SolveError::ExactModeUnsupported(format!("country {} has a piecewise supply", c.id))
        })?;
        let to_r = |x: f64| rational_from_f64(x).expect("finite coefficient");
        demand_lin.push((to_r(d.0), to_r(d.1)));
        supply_lin.push((to_r(s.0), to_r(s.1)));
    }
    let one = || BigRational::from_integer(1.into());
    let m = links.len();
    let mut a = vec![vec![BigRational::zero(); m]; m];
    let mut b = vec![BigRational::zero(); m];
    for (row, link) in links.iter().enumerate() {
        let (i, j) = (link.market, link.producer);
        let factor = one() + rational_from_f64(economy.tariffs.rate(i, j)).expect("finite rate");
        let (ad, bd) = demand_lin[i].clone();
        let (as_j, bs_j) = supply_lin[j].clone();
        for (var, other) in links.iter().enumerate() {
            if other.market == i {
                // demand slope is stored signed; subtracting it adds |slope|
                a[row][var] -= &bd;
            }
            if other.producer == j {
                a[row][var] += &factor * &bs_j;
            }
        }
        b[row] = ad - &factor * &as_j;
    }
    let x = solve_rational(a, b).ok_or(SolveError::IndeterminatePattern)?;
    // exact nonnegativity check before rounding
    for (k, v) in x.iter().enumerate() {
        if v < &BigRational::zero() {
            let f = rational_to_f64(v);
            if f < -1e-12 {
                return Err(SolveError::InfeasiblePattern {
                    producer: links[k].producer,
                    market: links[k].market,
                    flow: f,
                });
            }
        }
    }
    Ok(x.iter().map(rational_to_f64).collect())
}

fn build_fixed_equilibrium(
    economy: &Economy,
    pattern: &TradePattern,
    links: &[Link],
    link_flows: Vec<f64>,
    options: &SolverOptions,
    iterations: u64,
) -> Result<Equilibrium, SolveError> {
    let n = economy.n();
    // negative flows mean the pattern cannot carry an equilibrium
    for (k, &q) in link_flows.iter().enumerate() {
        if q < -options.flow_tolerance {
            return Err(SolveError::InfeasiblePattern {
                producer: links[k].producer,
                market: links[k].market,
                flow: q,
            });
        }
    }
    let mut flows = vec![vec![0.0; n]; n];
    for (k, link) in links.iter().enumerate() {
        flows[link.market][link.producer] = link_flows[k].max(0.0);
    }
    let mut consumer_prices = vec![0.0; n];
    let mut producer_prices = vec![0.0; n];
    for k in 0..n {
        let row: f64 = flows[k].iter().sum();
        let col: f64 = flows.iter().map(|r| r[k]).sum();
        consumer_prices[k] = economy.countries[k].demand.eval(row).expect("row sum >= 0");
        producer_prices[k] = economy.countries[k].supply.eval(col).expect("col sum >= 0");
    }
    let method = if options.exact_rational {
        MethodTag::FixedNetworkExact
    } else {
        MethodTag::FixedNetwork
    };
    let eq = Equilibrium {
        consumer_prices,
        producer_prices,
        flows: flows.clone(),
        pattern: super::pattern_from_flows(&flows, options.flow_tolerance),
        diagnostics: Diagnostics {
            clearing_residual: 0.0,
            selection_slack: 0.0,
            iterations,
            multiplicity: false,
            method,
        },
    };
    let mut eq = eq;
    eq.diagnostics.clearing_residual = clearing_residual(
        economy,
        &eq.consumer_prices,
        &eq.producer_prices,
        &eq.flows,
    );
    eq.diagnostics.selection_slack = max_selection_gap(economy, &eq, options);
    let _ = pattern;
    Ok(eq)
}
