//! Exact solving of an equal-revenue + clearing system for a fixed
//! assignment of destination sets, and assembly of full equilibria from a
//! consumer price vector. Shared by the enumeration oracle and the
//! polishing step of the price-adjustment solver.

use super::flows::{canonical_flows, has_multiple_vertices, Infeasibility};
use super::revenue::effective_revenue;
use super::selection::{selection_slack, verify_selection};
use super::{
    clearing_residual, pattern_from_flows, Diagnostics, Equilibrium, MethodTag, SolveError,
    SolverOptions,
};
use crate::economy::Economy;
use crate::pattern::{Link, TradePattern};

/// Destination sets per producer; an empty set is the zero-production
/// corner.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Assignment {
    pub dests: Vec<Vec<usize>>,
}

/// Solve the system induced by an assignment: equal revenue across each
/// producer's destinations, market clearing per component. Returns the
/// consumer price vector, or `None` when the tie constraints are
/// inconsistent or no balanced solution exists.
pub(crate) fn solve_assignment(economy: &Economy, assignment: &Assignment) -> Option<Vec<f64>> {
    let n = economy.n();
    // Multiplicative price factors relative to a per-component scalar.
    // Node indices: 0..n producers, n..2n markets.
    let mut factor = vec![f64::NAN; 2 * n];
    let mut component = vec![usize::MAX; 2 * n];
    let mut n_components = 0;
    for start in 0..n {
        if assignment.dests[start].is_empty() || component[start] != usize::MAX {
            continue;
        }
        let comp = n_components;
        n_components += 1;
        factor[start] = 1.0;
        component[start] = comp;
        let mut queue = vec![start];
        while let Some(node) = queue.pop() {
            if node < n {
                let j = node;
                for &h in &assignment.dests[j] {
                    let f = factor[j] * (1.0 + economy.tariffs.rate(h, j));
                    let m = n + h;
                    if component[m] == usize::MAX {
                        component[m] = comp;
                        factor[m] = f;
                        queue.push(m);
                    } else if (factor[m] / f - 1.0).abs() > 1e-9 {
                        return None; // inconsistent tie ratios
                    }
                }
            } else {
                let h = node - n;
                for (j, dests) in assignment.dests.iter().enumerate() {
                    if !dests.contains(&h) {
                        continue;
                    }
                    let f = factor[node] / (1.0 + economy.tariffs.rate(h, j));
                    if component[j] == usize::MAX {
                        component[j] = comp;
                        factor[j] = f;
                        queue.push(j);
                    } else if (factor[j] / f - 1.0).abs() > 1e-9 {
                        return None;
                    }
                }
            }
        }
    }

    let mut consumer_prices: Vec<f64> = (0..n)
        .map(|i| economy.countries[i].demand.value_at_zero())
        .collect();

    for comp in 0..n_components {
        let producers: Vec<usize> = (0..n).filter(|&j| component[j] == comp).collect();
        let markets: Vec<usize> = (0..n).filter(|&h| component[n + h] == comp).collect();
        let sigma = solve_component_scalar(economy, &producers, &markets, &factor)?;
        for &h in &markets {
            consumer_prices[h] = factor[n + h] * sigma;
        }
    }
    Some(consumer_prices)
}

/// Root of the component balance: total demand minus total supply as a
/// function of the component price scalar. Strictly decreasing wherever
/// any curve is unclamped; bisection brackets the root, then the local
/// affine segments give it exactly.
fn solve_component_scalar(
    economy: &Economy,
    producers: &[usize],
    markets: &[usize],
    factor: &[f64],
) -> Option<f64> {
    let n = economy.n();
    let balance = |sigma: f64| -> f64 {
        let demand: f64 = markets
            .iter()
            .map(|&h| {
                economy.countries[h]
                    .demand
                    .inverse((factor[n + h] * sigma).max(0.0))
                    .unwrap_or(f64::NAN)
            })
            .sum();
        let supply: f64 = producers
            .iter()
            .map(|&j| {
                economy.countries[j]
                    .supply
                    .inverse((factor[j] * sigma).max(0.0))
                    .unwrap_or(f64::NAN)
            })
            .sum();
        demand - supply
    };
    let mut hi = markets
        .iter()
        .map(|&h| economy.countries[h].demand.value_at_zero() / factor[n + h])
        .fold(0.0f64, f64::max);
    if !(hi > 0.0) {
        return None;
    }
    // make sure the bracket really encloses the root
    if balance(hi) > 0.0 {
        hi *= 2.0;
        if balance(hi) > 0.0 {
            return None;
        }
    }
    let mut lo = 0.0f64;
    if balance(lo) < 0.0 {
        return None;
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    // exact solve on the bracketing affine segments
    let mut a = 0.0;
    let mut b = 0.0;
    for &h in markets {
        let (ah, bh) = economy.countries[h]
            .demand
            .inverse_affine_at((factor[n + h] * sigma).max(0.0));
        a += ah;
        b += bh * factor[n + h];
    }
    for &j in producers {
        let (aj, bj) = economy.countries[j]
            .supply
            .inverse_affine_at((factor[j] * sigma).max(0.0));
        a -= aj;
        b -= bj * factor[j];
    }
    if b.abs() > 1e-15 {
        let exact = -a / b;
        if exact.is_finite() && exact > 0.0 && balance(exact).abs() <= 1e-9 {
            return Some(exact);
        }
    }
    if sigma.is_finite() && sigma > 0.0 {
        Some(sigma)
    } else {
        None
    }
}

/// Why a candidate price vector could not be completed into an equilibrium.
/// The payloads exist for Debug output when a caller logs the failure.
#[derive(Debug)]
#[allow(dead_code)]
pub(crate) enum BuildFailure {
    Imbalance { supply: f64, demand: f64 },
    Infeasible(Infeasibility),
    SelectionViolated { slack: f64 },
}

/// Complete a consumer price vector into a full equilibrium: producer
/// prices and supplies from effective revenue (with the zero-production
/// corner), demands from the curves, canonical flows on the tie support,
/// and a multiplicity probe. Fails if margins are infeasible or the result
/// violates firm selection.
pub(crate) fn build_equilibrium(
    economy: &Economy,
    consumer_prices: &[f64],
    options: &SolverOptions,
    method: MethodTag,
    iterations: u64,
) -> Result<Equilibrium, BuildFailure> {
    let n = economy.n();
    let mut producer_prices = vec![0.0; n];
    let mut supplies = vec![0.0; n];
    let mut support_links: Vec<Link> = Vec::new();
    for j in 0..n {
        let er = effective_revenue(consumer_prices, &economy.tariffs, j, options.tie_tolerance);
        let cost_at_zero = economy.countries[j].supply.value_at_zero();
        if er.max >= cost_at_zero {
            producer_prices[j] = er.max;
            supplies[j] = economy.countries[j]
                .supply
                .inverse(er.max.max(0.0))
                .unwrap_or(0.0);
            for &i in &er.argmax {
                support_links.push(Link::new(j, i));
            }
        } else {
            producer_prices[j] = cost_at_zero;
            supplies[j] = 0.0;
        }
    }
    let demands: Vec<f64> = (0..n)
        .map(|i| {
            economy.countries[i]
                .demand
                .inverse(consumer_prices[i].max(0.0))
                .unwrap_or(0.0)
        })
        .collect();
    let total_s: f64 = supplies.iter().sum();
    let total_d: f64 = demands.iter().sum();
    let imbalance = (total_s - total_d).abs() / (1.0 + total_s + total_d);
    if imbalance > 10.0 * options.price_tolerance {
        return Err(BuildFailure::Imbalance {
            supply: total_s,
            demand: total_d,
        });
    }
    // rescale demands onto the supply total so the transportation margins
    // balance exactly; the true residual is reported in diagnostics
    let scale = if total_d > 0.0 { total_s / total_d } else { 1.0 };
    let scaled: Vec<f64> = demands.iter().map(|d| d * scale).collect();
    let support = TradePattern::new(n, support_links).expect("links in range");
    let flows = canonical_flows(&supplies, &scaled, &support, options.flow_tolerance)
        .map_err(BuildFailure::Infeasible)?;
    let multiplicity = has_multiple_vertices(&supplies, &scaled, &support, options.flow_tolerance)
        .unwrap_or(false);
    let pattern = pattern_from_flows(&flows, options.flow_tolerance);
    let mut eq = Equilibrium {
        consumer_prices: consumer_prices.to_vec(),
        producer_prices,
        flows,
        pattern,
        diagnostics: Diagnostics {
            clearing_residual: 0.0,
            selection_slack: 0.0,
            iterations,
            multiplicity,
            method,
        },
    };
    eq.diagnostics.clearing_residual =
        clearing_residual(economy, &eq.consumer_prices, &eq.producer_prices, &eq.flows);
    let violations = verify_selection(economy, &eq, options);
    if !violations.is_empty() {
        let slack = violations.iter().map(|v| v.gap.abs()).fold(0.0, f64::max);
        return Err(BuildFailure::SelectionViolated { slack });
    }
    eq.diagnostics.selection_slack = selection_slack(economy, &eq, options);
    Ok(eq)
}

/// Sweep-row policy: keep a preferred pattern while it stays selection-
/// consistent, otherwise run the full solver, with the enumeration oracle
/// as a last resort on small economies.
pub(crate) fn solve_auto_impl(
    economy: &Economy,
    preferred: Option<&TradePattern>,
    options: &SolverOptions,
) -> Result<Equilibrium, SolveError> {
    if let Some(pattern) = preferred {
        if !pattern.is_empty() {
            if let Ok(eq) = super::solve_fixed_network(economy, pattern, options) {
                if verify_selection(economy, &eq, options).is_empty() {
                    return Ok(eq);
                }
            }
        }
    }
    match super::solve_equilibrium(economy, options) {
        Ok(eq) => Ok(eq),
        Err(SolveError::Convergence { iterations, residual }) => {
            if economy.n() <= 4 {
                let all = super::enumerate_equilibria(economy, options)?;
                all.into_iter()
                    .next()
                    .ok_or(SolveError::Convergence { iterations, residual })
            } else {
                Err(SolveError::Convergence { iterations, residual })
            }
        }
        Err(e) => Err(e),
    }
}
