//! Exhaustive equilibrium enumeration for small economies.
//!
//! Every assignment of a destination set (possibly empty) to every producer
//! induces an equal-revenue + clearing system. Solving each one exactly and
//! keeping the candidates that survive feasibility and selection checks
//! finds every equilibrium price vector — the independent oracle the other
//! solvers are validated against.

use super::system::{build_equilibrium, solve_assignment, Assignment};
use super::{ensure_valid, Equilibrium, MethodTag, SolveError, SolverOptions};
use crate::economy::Economy;

const MAX_COUNTRIES: usize = 4;

/// All distinct tariff equilibria of a small economy, deduplicated by
/// consumer price vector and sorted lexicographically by it.
pub fn enumerate_equilibria(
    economy: &Economy,
    options: &SolverOptions,
) -> Result<Vec<Equilibrium>, SolveError> {
    ensure_valid(economy)?;
    options.validate()?;
    let n = economy.n();
    if n > MAX_COUNTRIES {
        return Err(SolveError::TooManyCountries {
            n,
            limit: MAX_COUNTRIES,
        });
    }
    let masks = 1usize << n;
    let mut found: Vec<Equilibrium> = Vec::new();
    let mut assignment = Assignment {
        dests: vec![Vec::new(); n],
    };
    let mut odometer = vec![0usize; n];
    loop {
        for (j, &mask) in odometer.iter().enumerate() {
            assignment.dests[j] = (0..n).filter(|h| mask >> h & 1 == 1).collect();
        }
        if let Some(prices) = solve_assignment(economy, &assignment) {
            if let Ok(eq) = build_equilibrium(economy, &prices, options, MethodTag::Enumerate, 0)
            {
                let duplicate = found.iter().any(|known| {
                    known
                        .consumer_prices
                        .iter()
                        .zip(&eq.consumer_prices)
                        .all(|(a, b)| (a - b).abs() <= 1e-7 * (1.0 + a.abs()))
                });
                if !duplicate {
                    found.push(eq);
                }
            }
        }
        // advance the odometer over all destination-set assignments
        let mut pos = 0;
        loop {
            if pos == n {
                break;
            }
            odometer[pos] += 1;
            if odometer[pos] < masks {
                break;
            }
            odometer[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    found.sort_by(|a, b| {
        a.consumer_prices
            .partial_cmp(&b.consumer_prices)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::economy::fixtures::scenario1;
    use crate::economy::{Country, Economy, TariffMatrix};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn scenario1_has_one_price_vector() {
        let all = enumerate_equilibria(&scenario1(), &opts()).unwrap();
        assert_eq!(all.len(), 1);
        let eq = &all[0];
        assert!((eq.consumer_prices[0] - 795.0 / 169.0).abs() < 1e-9);
        assert!((eq.consumer_prices[1] - 795.0 / 169.0).abs() < 1e-9);
        assert!((eq.consumer_prices[2] - 874.5 / 169.0).abs() < 1e-9);
        assert!(eq.diagnostics.multiplicity);
    }

    #[test]
    fn symmetric_zero_tariff_pair_stays_home() {
        let country = |id: &str| Country {
            id: id.into(),
            name: id.into(),
            supply: Curve::linear_supply(1.0, 1.0).unwrap(),
            demand: Curve::linear_demand(5.0, 1.0).unwrap(),
        };
        let eco = Economy::new(vec![country("A"), country("B")], TariffMatrix::zeros(2));
        let all = enumerate_equilibria(&eco, &opts()).unwrap();
        assert_eq!(all.len(), 1);
        let eq = &all[0];
        assert!((eq.consumer_prices[0] - 3.0).abs() < 1e-9);
        assert!((eq.consumer_prices[1] - 3.0).abs() < 1e-9);
        // the canonical representative has no cross-border flow
        assert!(eq.flows[0][1].abs() < 1e-9);
        assert!(eq.flows[1][0].abs() < 1e-9);
    }

    #[test]
    fn single_country_finds_autarky() {
        let eco = Economy::new(
            vec![Country {
                id: "A".into(),
                name: "A".into(),
                supply: Curve::linear_supply(2.0, 0.5).unwrap(),
                demand: Curve::linear_demand(8.0, 1.0).unwrap(),
            }],
            TariffMatrix::zeros(1),
        );
        let all = enumerate_equilibria(&eco, &opts()).unwrap();
        assert_eq!(all.len(), 1);
        assert!((all[0].consumer_prices[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn refuses_large_economies() {
        let mut eco = scenario1();
        for k in 0..2 {
            let mut c = eco.countries[0].clone();
            c.id = format!("X{k}");
            eco.countries.push(c);
        }
        eco.tariffs = TariffMatrix::zeros(5);
        assert!(matches!(
            enumerate_equilibria(&eco, &opts()),
            Err(SolveError::TooManyCountries { n: 5, limit: 4 })
        ));
    }
}
