//! The welfare decomposition: consumer surplus, firm profits, and tariff
//! revenue per country, plus revenue bounds when the flow matrix is one of
//! many.

use crate::economy::{Country, Economy};
use crate::equilibrium::flows::extremal_weighted_flows;
use crate::equilibrium::{effective_revenue, Equilibrium, SolverOptions};
use crate::pattern::{Link, TradePattern};
use serde::Serialize;

/// One country's welfare components. The total is the exact sum of the
/// three parts.
#[derive(Debug, Clone, Serialize)]
pub struct CountryWelfare {
    pub consumer_surplus: f64,
    pub firm_profits: f64,
    pub tariff_revenue: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WelfareReport {
    pub countries: Vec<CountryWelfare>,
    pub total_consumer_surplus: f64,
    pub total_firm_profits: f64,
    pub total_tariff_revenue: f64,
    pub total: f64,
    /// Bounds on world tariff revenue over the feasible flow polytope,
    /// present when the equilibrium's flow matrix is not unique. Surplus
    /// and profits depend on prices alone, so only revenue can move.
    pub revenue_bounds: Option<(f64, f64)>,
}

/// Area between the demand curve and the price line: what consumers gain
/// from buying at `price`. Zero at or above the choke price.
pub fn consumer_surplus(country: &Country, consumer_price: f64) -> f64 {
    let q = country
        .demand
        .inverse(consumer_price.max(0.0))
        .unwrap_or(0.0);
    if q <= 0.0 {
        return 0.0;
    }
    let area = country.demand.integral(0.0, q).expect("valid bounds");
    area - consumer_price * q
}

/// Area between the price line and the supply curve: what producers gain
/// from selling at `price`. Zero at or below the marginal cost at zero.
pub fn firm_profits(country: &Country, producer_price: f64) -> f64 {
    let q = country
        .supply
        .inverse(producer_price.max(0.0))
        .unwrap_or(0.0);
    if q <= 0.0 {
        return 0.0;
    }
    let area = country.supply.integral(0.0, q).expect("valid bounds");
    producer_price * q - area
}

/// Government revenue of one importer: tariff rate times the exporter's
/// producer price times the imported quantity, summed over exporters.
pub fn tariff_revenue(economy: &Economy, eq: &Equilibrium, importer: usize) -> f64 {
    (0..economy.n())
        .map(|j| {
            economy.tariffs.rate(importer, j) * eq.producer_prices[j] * eq.flows[importer][j]
        })
        .sum()
}

/// Assemble the full report from an equilibrium, with default options for
/// the tie support used in the revenue-bound solves.
pub fn welfare_report(economy: &Economy, eq: &Equilibrium) -> WelfareReport {
    welfare_report_with(economy, eq, &SolverOptions::default())
}

pub fn welfare_report_with(
    economy: &Economy,
    eq: &Equilibrium,
    options: &SolverOptions,
) -> WelfareReport {
    let n = economy.n();
    let mut countries = Vec::with_capacity(n);
    for i in 0..n {
        let w_c = consumer_surplus(&economy.countries[i], eq.consumer_prices[i]);
        let w_f = firm_profits(&economy.countries[i], eq.producer_prices[i]);
        let r = tariff_revenue(economy, eq, i);
        countries.push(CountryWelfare {
            consumer_surplus: w_c,
            firm_profits: w_f,
            tariff_revenue: r,
            total: w_c + w_f + r,
        });
    }
    let revenue_bounds = if eq.diagnostics.multiplicity {
        revenue_bounds(economy, eq, options)
    } else {
        None
    };
    WelfareReport {
        total_consumer_surplus: countries.iter().map(|c| c.consumer_surplus).sum(),
        total_firm_profits: countries.iter().map(|c| c.firm_profits).sum(),
        total_tariff_revenue: countries.iter().map(|c| c.tariff_revenue).sum(),
        total: countries.iter().map(|c| c.total).sum(),
        countries,
        revenue_bounds,
    }
}

/// World tariff revenue extremes over the feasible polytope at the
/// equilibrium's own margins and tie support.
fn revenue_bounds(
    economy: &Economy,
    eq: &Equilibrium,
    options: &SolverOptions,
) -> Option<(f64, f64)> {
    let n = economy.n();
    let demands: Vec<f64> = (0..n).map(|i| eq.consumption(i)).collect();
    let supplies: Vec<f64> = (0..n).map(|j| eq.production(j)).collect();
    let mut links: Vec<Link> = eq.pattern.links().collect();
    for j in 0..n {
        let er = effective_revenue(&eq.consumer_prices, &economy.tariffs, j, options.tie_tolerance);
        for &i in &er.argmax {
            links.push(Link::new(j, i));
        }
    }
    let support = TradePattern::new(n, links).ok()?;
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| economy.tariffs.rate(i, j) * eq.producer_prices[j])
                .collect()
        })
        .collect();
    let value = |q: &[Vec<f64>]| -> f64 {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| weights[i][j] * q[i][j])
            .sum()
    };
    let lo = extremal_weighted_flows(
        &supplies,
        &demands,
        &support,
        &weights,
        false,
        options.flow_tolerance,
    )
    .ok()?;
    let hi = extremal_weighted_flows(
        &supplies,
        &demands,
        &support,
        &weights,
        true,
        options.flow_tolerance,
    )
    .ok()?;
    Some((value(&lo), value(&hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::economy::fixtures::{scenario1, scenario2_variant};
    use crate::economy::{Country, TariffMatrix};
    use crate::equilibrium::{links, solve_equilibrium, solve_fixed_network};
    use crate::pattern::TradePattern;

    const P1: f64 = 795.0 / 169.0;

    #[test]
    fn consumer_surplus_triangles() {
        let eco = scenario1();
        // EU: half of (8 - p)^2 under unit slope
        let expect_eu = 0.5 * (8.0 - P1) * (8.0 - P1);
        assert!((consumer_surplus(&eco.countries[0], P1) - expect_eu).abs() < 1e-12);
        // USA: half of (7 - p)^2 / 0.8
        let expect_usa = 0.5 * (7.0 - P1) * (7.0 - P1) / 0.8;
        let got = consumer_surplus(&eco.countries[1], P1);
        assert!((got - expect_usa).abs() < 1e-12);
        assert!((got - 3.294).abs() < 1e-3);
        // at the choke price surplus vanishes
        assert_eq!(consumer_surplus(&eco.countries[0], 8.0), 0.0);
    }

    #[test]
    fn firm_profit_triangles() {
        let eco = scenario1();
        let expect_usa = 0.5 * (P1 - 3.0) * (P1 - 3.0) / 0.5;
        let got = firm_profits(&eco.countries[1], P1);
        assert!((got - expect_usa).abs() < 1e-12);
        assert!((got - 2.904).abs() < 1e-3);
        // the published variant value at its own producer price
        let variant = scenario2_variant();
        let got = firm_profits(&variant.countries[1], 67.0 / 13.0);
        assert!((got - 1.331).abs() < 1e-3);
        assert_eq!(firm_profits(&eco.countries[1], 3.0), 0.0);
    }

    #[test]
    fn scenario1_tariff_revenue() {
        let eco = scenario1();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let china = tariff_revenue(&eco, &eq, 2);
        assert!((china - 0.1 * P1 * (448.0 / 169.0)).abs() < 1e-9);
        assert!((china - 1.247).abs() < 1e-3);
        assert_eq!(tariff_revenue(&eco, &eq, 1), 0.0);
        assert_eq!(tariff_revenue(&eco, &eq, 0), 0.0);
    }

    #[test]
    fn scenario1_usa_report() {
        let eco = scenario1();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let report = welfare_report(&eco, &eq);
        let usa = &report.countries[1];
        assert!((usa.consumer_surplus - 3.294).abs() < 1e-3);
        assert!((usa.firm_profits - 2.904).abs() < 1e-3);
        assert_eq!(usa.tariff_revenue, 0.0);
        assert!((usa.total - 6.199).abs() < 1e-3);
        // totals are exact sums
        for c in &report.countries {
            assert_eq!(
                c.total,
                c.consumer_surplus + c.firm_profits + c.tariff_revenue
            );
        }
        // Scenario 1 pins China's import volume, so both bounds coincide
        let (lo, hi) = report.revenue_bounds.expect("multiplicity set");
        assert!((lo - hi).abs() < 1e-6);
        assert!((lo - 1.247).abs() < 1e-3);
    }

    #[test]
    fn variant_scenario2_usa_report() {
        let eco = scenario2_variant();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let report = welfare_report(&eco, &eq);
        let usa = &report.countries[1];
        assert!((usa.consumer_surplus - 2.130).abs() < 1e-3);
        assert!((usa.firm_profits - 1.331).abs() < 1e-3);
        assert_eq!(usa.tariff_revenue, 0.0);
        assert!(report.revenue_bounds.is_none());
    }

    #[test]
    fn autarkic_country_gets_the_full_competitive_surplus() {
        let eco = crate::economy::Economy::new(
            vec![Country {
                id: "A".into(),
                name: "A".into(),
                supply: Curve::linear_supply(2.0, 0.5).unwrap(),
                demand: Curve::linear_demand(8.0, 1.0).unwrap(),
            }],
            TariffMatrix::zeros(1),
        );
        let pattern = TradePattern::new(1, links([(0, 0)])).unwrap();
        let eq = solve_fixed_network(&eco, &pattern, &SolverOptions::default()).unwrap();
        let report = welfare_report(&eco, &eq);
        // crossing at q = 4, p = 4: consumer triangle 8, producer triangle 4
        assert!((report.countries[0].consumer_surplus - 8.0).abs() < 1e-9);
        assert!((report.countries[0].firm_profits - 4.0).abs() < 1e-9);
        assert!((report.total - 12.0).abs() < 1e-9);
    }
}
