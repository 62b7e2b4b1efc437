//! Effective revenue and the firm best-response map.

use crate::curve::cap_quantity;
use crate::economy::{Country, Economy, TariffMatrix};

/// Per-destination effective revenue of one producer, with the maximum and
/// the tie set of destinations attaining it.
#[derive(Debug, Clone)]
pub struct EffectiveRevenue {
    /// `revenues[h]` = consumer price in `h` divided by (1 + tariff of `h`
    /// on this producer).
    pub revenues: Vec<f64>,
    pub max: f64,
    /// Destinations within the tie tolerance of the maximum, ascending.
    pub argmax: Vec<usize>,
}

/// What a producer nets per unit in every destination market.
pub fn effective_revenue(
    consumer_prices: &[f64],
    tariffs: &TariffMatrix,
    producer: usize,
    tie_tolerance: f64,
) -> EffectiveRevenue {
    let revenues: Vec<f64> = consumer_prices
        .iter()
        .enumerate()
        .map(|(h, &p)| p / (1.0 + tariffs.rate(h, producer)))
        .collect();
    let max = revenues.iter().fold(f64::NEG_INFINITY, |m, &r| m.max(r));
    let band = tie_tolerance * (1.0 + max.abs());
    let argmax = revenues
        .iter()
        .enumerate()
        .filter(|(_, &r)| max - r <= band)
        .map(|(h, _)| h)
        .collect();
    EffectiveRevenue {
        revenues,
        max,
        argmax,
    }
}

/// One destination's entry in a best-response flow column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseSegment {
    /// Effective revenue below the producer price: ship nothing.
    Zero,
    /// Effective revenue above the producer price: ship the cap quantity.
    AtCap(f64),
    /// Indifferent: any quantity in `[0, cap]` is a best response.
    Free { cap: f64 },
}

impl ResponseSegment {
    /// Largest flow the segment admits.
    pub fn upper(&self) -> f64 {
        match self {
            ResponseSegment::Zero => 0.0,
            ResponseSegment::AtCap(c) | ResponseSegment::Free { cap: c } => *c,
        }
    }
}

/// The best-response column of one producer at the given prices: per
/// destination, nothing below the producer price, the crossing-quantity cap
/// above it, and a free interval at indifference.
pub fn best_response(
    economy: &Economy,
    consumer_prices: &[f64],
    producer_price: f64,
    producer: usize,
    tie_tolerance: f64,
) -> Vec<ResponseSegment> {
    let er = effective_revenue(consumer_prices, &economy.tariffs, producer, tie_tolerance);
    let supply = &economy.countries[producer].supply;
    let band = tie_tolerance * (1.0 + producer_price.abs());
    (0..economy.n())
        .map(|h| {
            let rev = er.revenues[h];
            if rev < producer_price - band {
                ResponseSegment::Zero
            } else {
                let cap = cap_quantity(supply, &economy.countries[h].demand);
                if rev > producer_price + band {
                    ResponseSegment::AtCap(cap)
                } else {
                    ResponseSegment::Free { cap }
                }
            }
        })
        .collect()
}

/// Price at the crossing of a country's own curves, or the choke price at
/// the zero-production corner. The no-trade benchmark and the solver's
/// starting point.
pub fn autarky_price(country: &Country) -> f64 {
    let q = cap_quantity(&country.supply, &country.demand);
    country.demand.eval(q).expect("autarky quantity is nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::fixtures::{scenario1, scenario2_variant};
    use crate::economy::TariffMatrix;

    const TIE: f64 = 1e-7;

    #[test]
    fn scenario1_prices_tie_all_destinations_for_eu() {
        // Equilibrium prices (p, p, 1.1p) with p = 795/169; dividing the
        // third by 1.1 lands every destination on the same revenue.
        let p = 795.0 / 169.0;
        let prices = vec![p, p, 874.5 / 169.0];
        let er = effective_revenue(&prices, &scenario1().tariffs, 0, TIE);
        for r in &er.revenues {
            assert!((r - 4.70414).abs() < 1e-4);
        }
        assert_eq!(er.argmax, vec![0, 1, 2]);
    }

    #[test]
    fn variant_prices_leave_eu_indifferent_between_home_and_china() {
        let prices = vec![62.5 / 13.0, 67.0 / 13.0, 68.75 / 13.0];
        let er = effective_revenue(&prices, &scenario2_variant().tariffs, 0, TIE);
        assert!((er.revenues[0] - 4.8077).abs() < 1e-4);
        assert!((er.revenues[1] - 4.2949).abs() < 1e-4);
        assert!((er.revenues[2] - 4.8077).abs() < 1e-4);
        assert_eq!(er.argmax, vec![0, 2]);
    }

    #[test]
    fn zero_tariffs_pick_the_highest_price() {
        let t = TariffMatrix::zeros(3);
        let er = effective_revenue(&[1.0, 2.0, 3.0], &t, 0, TIE);
        assert_eq!(er.max, 3.0);
        assert_eq!(er.argmax, vec![2]);
    }

    #[test]
    fn best_response_caps_the_strictly_better_market() {
        let mut eco = scenario1();
        eco.tariffs = TariffMatrix::zeros(3);
        let resp = best_response(&eco, &[4.0, 6.0, 4.0], 4.0, 0, TIE);
        match resp[1] {
            ResponseSegment::AtCap(cap) => assert!((cap - 5.0 / 1.3).abs() < 1e-9),
            ref other => panic!("expected a capped response, got {other:?}"),
        }
        assert!(matches!(resp[0], ResponseSegment::Free { .. }));
        assert!(matches!(resp[2], ResponseSegment::Free { .. }));
    }

    #[test]
    fn best_response_zero_column_below_marginal_cost() {
        let eco = scenario1();
        // China's s(0) = 5; at consumer prices 4 everywhere no destination
        // beats a producer price of 5.
        let resp = best_response(&eco, &[4.0, 4.0, 4.0], 5.0, 2, TIE);
        assert!(resp.iter().all(|r| matches!(r, ResponseSegment::Zero)));
    }

    #[test]
    fn best_response_unique_argmax_gets_the_only_positive_entry() {
        let eco = scenario1();
        let resp = best_response(&eco, &[4.0, 5.5, 4.0], 4.5, 0, TIE);
        assert!(matches!(resp[0], ResponseSegment::Zero));
        assert!(matches!(resp[1], ResponseSegment::AtCap(_)));
        assert!(matches!(resp[2], ResponseSegment::Zero));
    }

    #[test]
    fn autarky_prices_of_the_example() {
        let eco = scenario1();
        assert!((autarky_price(&eco.countries[0]) - 4.0).abs() < 1e-12);
        assert!((autarky_price(&eco.countries[1]) - 59.0 / 13.0).abs() < 1e-9);
        assert!((autarky_price(&eco.countries[2]) - 6.5).abs() < 1e-12);
    }
}
