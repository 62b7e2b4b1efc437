//! Full equilibrium solver: damped price adjustment on consumer prices.
//!
//! Each round computes producer prices and supplies from effective revenue,
//! demands from the curves, routes a best-effort assignment on the tie
//! support, and moves every consumer price by a damped relative excess.
//! Once the excess is small, the observed tie structure is solved exactly
//! and verified; the exact solution is what gets returned, so residuals end
//! up near machine precision rather than at the iteration tolerance.

use super::flows::assign_best_effort;
use super::revenue::{autarky_price, effective_revenue};
use super::system::{build_equilibrium, solve_assignment, Assignment};
use super::{ensure_valid, Equilibrium, MethodTag, SolveError, SolverOptions};
use crate::economy::Economy;
use crate::pattern::{Link, TradePattern};

/// Compute a tariff equilibrium from scratch. Errors with the final
/// residual when the iteration cap is reached; the enumerate method is the
/// fallback for small economies.
pub fn solve_equilibrium(
    economy: &Economy,
    options: &SolverOptions,
) -> Result<Equilibrium, SolveError> {
    ensure_valid(economy)?;
    options.validate()?;
    let n = economy.n();
    let mut prices: Vec<f64> = economy.countries.iter().map(autarky_price).collect();
    let mut step = vec![options.damping; n];
    let mut prev_excess = vec![0.0f64; n];
    // The common level moves separately from per-market differences:
    // near a tie the differential part chatters as the argmax flips, and
    // halving its step must not stall the level adjustment.
    let mut common_step = options.damping;
    let mut prev_common = 0.0f64;
    let mut residual = f64::INFINITY;

    for iter in 1..=options.max_iterations {
        // widen tie detection while far from the fixed point so that
        // near-ties already route flow
        let tie = options
            .tie_tolerance
            .max((residual * 0.1).min(1e-3));

        let mut producer_prices = vec![0.0; n];
        let mut supplies = vec![0.0; n];
        let mut argmax_sets: Vec<Vec<usize>> = Vec::with_capacity(n);
        for j in 0..n {
            let er = effective_revenue(&prices, &economy.tariffs, j, tie);
            let cost_at_zero = economy.countries[j].supply.value_at_zero();
            if er.max >= cost_at_zero {
                producer_prices[j] = er.max;
                supplies[j] = economy.countries[j]
                    .supply
                    .inverse(er.max.max(0.0))
                    .unwrap_or(0.0);
                argmax_sets.push(er.argmax);
            } else {
                producer_prices[j] = cost_at_zero;
                supplies[j] = 0.0;
                argmax_sets.push(Vec::new());
            }
        }
        let demands: Vec<f64> = (0..n)
            .map(|i| {
                economy.countries[i]
                    .demand
                    .inverse(prices[i].max(0.0))
                    .unwrap_or(0.0)
            })
            .collect();

        let support = TradePattern::new(
            n,
            argmax_sets.iter().enumerate().flat_map(|(j, dests)| {
                dests.iter().map(move |&i| Link::new(j, i))
            }),
        )
        .expect("links in range");
        let assigned = assign_best_effort(&supplies, &demands, &support);

        // unmet demand raises a price; unsold supply presses down on every
        // market its producer is indifferent over
        let mut pressure = vec![0.0f64; n];
        for j in 0..n {
            let sold: f64 = assigned.iter().map(|row| row[j]).sum();
            let unsold = (supplies[j] - sold).max(0.0);
            if unsold > 0.0 && !argmax_sets[j].is_empty() {
                let share = unsold / argmax_sets[j].len() as f64;
                for &i in &argmax_sets[j] {
                    pressure[i] += share;
                }
            }
        }
        let mut excess = vec![0.0f64; n];
        residual = 0.0;
        for i in 0..n {
            let received: f64 = assigned[i].iter().sum();
            let raw = (demands[i] - received) - pressure[i];
            let scale = 1.0 + demands[i] + received + pressure[i];
            excess[i] = raw / scale;
            residual = residual.max(excess[i].abs());
        }

        if std::env::var("TATO_DEBUG").is_ok() && (iter % 5000 == 0 || iter <= 20) {
            eprintln!(
                "it {iter} resid {residual:.3e} prices {prices:?} step {step:?} excess {excess:?}"
            );
        }
        let should_polish =
            residual <= options.price_tolerance || (iter % 25 == 0 && residual < 0.2);
        if should_polish {
            if let Some(eq) = try_polish(economy, &prices, options, iter) {
                return Ok(eq);
            }
            if residual <= options.price_tolerance {
                // accept the raw iterate if it already verifies end to end
                if let Ok(eq) = build_equilibrium(
                    economy,
                    &prices,
                    options,
                    MethodTag::Tatonnement,
                    iter,
                ) {
                    if eq.diagnostics.clearing_residual <= 10.0 * options.price_tolerance {
                        return Ok(eq);
                    }
                }
            }
        }

        let common = excess.iter().sum::<f64>() / n as f64;
        if common * prev_common < 0.0 {
            common_step = (common_step * 0.5).max(1e-3 * options.damping);
        } else {
            common_step = (common_step * 1.05).min(options.damping);
        }
        prev_common = common;
        for i in 0..n {
            let diff = excess[i] - common;
            if diff * prev_excess[i] < 0.0 {
                step[i] = (step[i] * 0.5).max(1e-3 * options.damping);
            } else {
                step[i] = (step[i] * 1.05).min(options.damping);
            }
            prev_excess[i] = diff;
            let choke = economy.countries[i].demand.value_at_zero();
            let factor = (1.0 + common_step * common + step[i] * diff).clamp(0.5, 2.0);
            prices[i] = (prices[i] * factor).clamp(1e-9, choke);
        }
    }
    Err(SolveError::Convergence {
        iterations: options.max_iterations,
        residual,
    })
}

/// Snap the current iterate to an exact equilibrium: read the tie structure
/// off the prices at increasingly generous tolerances, solve that system
/// exactly, and keep the first solution that verifies in full.
fn try_polish(
    economy: &Economy,
    prices: &[f64],
    options: &SolverOptions,
    iterations: u64,
) -> Option<Equilibrium> {
    let n = economy.n();
    for tie in [options.tie_tolerance, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2] {
        let mut dests = Vec::with_capacity(n);
        for j in 0..n {
            let er = effective_revenue(prices, &economy.tariffs, j, tie);
            let cost_at_zero = economy.countries[j].supply.value_at_zero();
            // a producer priced out of every market is idle
            if er.max < cost_at_zero - options.price_tolerance * (1.0 + er.max.abs()) {
                dests.push(Vec::new());
            } else {
                dests.push(er.argmax);
            }
        }
        let assignment = Assignment { dests };
        let Some(solution) = solve_assignment(economy, &assignment) else {
            continue;
        };
        if let Ok(eq) = build_equilibrium(
            economy,
            &solution,
            options,
            MethodTag::Tatonnement,
            iterations,
        ) {
            if eq.diagnostics.clearing_residual <= options.price_tolerance {
                return Some(eq);
            }
        }
    }
    None
}
