//! Firm-selection verification: producers must earn the maximal effective
//! revenue and ship only to destinations attaining it.

use super::revenue::effective_revenue;
use super::{Equilibrium, SolverOptions};
use crate::economy::Economy;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// An active producer's price differs from its best effective revenue.
    PriceGap,
    /// An active shipment goes to a destination outside the argmax set.
    OffArgmax { active_market: usize },
    /// An idle producer whose marginal cost at zero is below the best
    /// effective revenue (it should be producing).
    IdleBelowBest,
}

/// One failed selection check, naming the producer, the destination it
/// should (also) serve, and the revenue gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionViolation {
    pub producer: usize,
    pub better_market: usize,
    pub gap: f64,
    pub kind: ViolationKind,
}

impl fmt::Display for SelectionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::PriceGap => write!(
                f,
                "producer {} earns less than destination {} offers (gap {:.6})",
                self.producer, self.better_market, self.gap
            ),
            ViolationKind::OffArgmax { active_market } => write!(
                f,
                "producer {} ships to {} while destination {} pays more (gap {:.6})",
                self.producer, active_market, self.better_market, self.gap
            ),
            ViolationKind::IdleBelowBest => write!(
                f,
                "producer {} is idle although destination {} beats its marginal cost (gap {:.6})",
                self.producer, self.better_market, self.gap
            ),
        }
    }
}

/// Check the selection condition for every producer. Empty means the
/// equilibrium is selection-consistent.
pub fn verify_selection(
    economy: &Economy,
    eq: &Equilibrium,
    options: &SolverOptions,
) -> Vec<SelectionViolation> {
    let n = economy.n();
    let tol = options.price_tolerance;
    let mut out = Vec::new();
    for j in 0..n {
        let er = effective_revenue(&eq.consumer_prices, &economy.tariffs, j, options.tie_tolerance);
        // argmax members are tied within tolerance; point at the highest
        // index among them, which names the export destination rather than
        // the home market when both are tied
        let best = er.argmax.iter().copied().max().unwrap_or(j);
        let production = eq.production(j);
        let band = tol * (1.0 + er.max.abs());
        if production > options.flow_tolerance {
            let price_gap = (eq.producer_prices[j] - er.max).abs() > band;
            if price_gap {
                out.push(SelectionViolation {
                    producer: j,
                    better_market: best,
                    gap: er.max - eq.producer_prices[j],
                    kind: ViolationKind::PriceGap,
                });
            }
            for i in 0..n {
                if eq.flows[i][j] > options.flow_tolerance && !er.argmax.contains(&i) {
                    // a shipment priced consistently with the producer's own
                    // (too low) price is already covered by the price gap
                    let explained = price_gap
                        && (er.revenues[i] - eq.producer_prices[j]).abs() <= band;
                    if !explained {
                        out.push(SelectionViolation {
                            producer: j,
                            better_market: best,
                            gap: er.max - er.revenues[i],
                            kind: ViolationKind::OffArgmax { active_market: i },
                        });
                    }
                }
            }
        } else {
            let cost_at_zero = economy.countries[j].supply.value_at_zero();
            if cost_at_zero < er.max - band {
                out.push(SelectionViolation {
                    producer: j,
                    better_market: best,
                    gap: er.max - cost_at_zero,
                    kind: ViolationKind::IdleBelowBest,
                });
            }
        }
    }
    out
}

/// Largest violation gap, or zero when selection-consistent. Recorded in
/// solver diagnostics.
pub fn selection_slack(economy: &Economy, eq: &Equilibrium, options: &SolverOptions) -> f64 {
    verify_selection(economy, eq, options)
        .iter()
        .map(|v| v.gap.abs())
        .fold(0.0, f64::max)
}

pub(crate) fn max_selection_gap(
    economy: &Economy,
    eq: &Equilibrium,
    options: &SolverOptions,
) -> f64 {
    selection_slack(economy, eq, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::fixtures::{scenario1, scenario2_printed};
    use crate::economy::{Country, Economy, TariffMatrix};
    use crate::equilibrium::{links, solve_fixed_network};
    use crate::curve::Curve;
    use crate::pattern::TradePattern;

    #[test]
    fn scenario1_fixed_solution_is_consistent() {
        let eco = scenario1();
        let pattern =
            TradePattern::new(3, links([(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)])).unwrap();
        let opts = SolverOptions::default();
        let eq = solve_fixed_network(&eco, &pattern, &opts).unwrap();
        assert!(verify_selection(&eco, &eq, &opts).is_empty());
    }

    #[test]
    fn printed_scenario2_flags_the_usa_export_gap() {
        let eco = scenario2_printed();
        let pattern = TradePattern::new(3, links([(0, 0), (0, 2), (1, 1), (2, 2)])).unwrap();
        let opts = SolverOptions::default();
        let eq = solve_fixed_network(&eco, &pattern, &opts).unwrap();
        let violations = verify_selection(&eco, &eq, &opts);
        assert_eq!(violations.len(), 1);
        let v = &violations[0];
        assert_eq!(v.producer, 1);
        assert_eq!(v.better_market, 2);
        // 5.2885 / 1.1 beats the autarky price 4.5385 by 0.2692
        assert!((v.gap - 3.5 / 13.0).abs() < 1e-9);
    }

    #[test]
    fn single_country_autarky_is_consistent() {
        let eco = Economy::new(
            vec![Country {
                id: "A".into(),
                name: "A".into(),
                supply: Curve::linear_supply(2.0, 0.5).unwrap(),
                demand: Curve::linear_demand(8.0, 1.0).unwrap(),
            }],
            TariffMatrix::zeros(1),
        );
        let pattern = TradePattern::new(1, links([(0, 0)])).unwrap();
        let opts = SolverOptions::default();
        let eq = solve_fixed_network(&eco, &pattern, &opts).unwrap();
        assert!(verify_selection(&eco, &eq, &opts).is_empty());
    }
}
