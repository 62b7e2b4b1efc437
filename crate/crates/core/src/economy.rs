//! Countries, tariff matrices, and whole economies.

use crate::curve::{Curve, CurveKind};
use std::fmt;

/// A country with its indirect supply and demand curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Country {
    pub id: String,
    pub name: String,
    pub supply: Curve,
    pub demand: Curve,
}

/// Ad valorem tariff rates. `rate(i, j)` is the tariff imposed by importer
/// `i` on goods produced in `j`; diagonal entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TariffMatrix {
    entries: Vec<Vec<f64>>,
}

impl TariffMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> TariffMatrix {
        TariffMatrix { entries }
    }

    pub fn zeros(n: usize) -> TariffMatrix {
        TariffMatrix {
            entries: vec![vec![0.0; n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn rate(&self, importer: usize, exporter: usize) -> f64 {
        self.entries[importer][exporter]
    }

    pub fn set_rate(&mut self, importer: usize, exporter: usize, rate: f64) {
        self.entries[importer][exporter] = rate;
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

/// The model primitives: a list of countries plus the tariff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Economy {
    pub countries: Vec<Country>,
    pub tariffs: TariffMatrix,
}

impl Economy {
    pub fn new(countries: Vec<Country>, tariffs: TariffMatrix) -> Economy {
        Economy { countries, tariffs }
    }

    pub fn n(&self) -> usize {
        self.countries.len()
    }

    pub fn country_index(&self, id: &str) -> Option<usize> {
        self.countries.iter().position(|c| c.id == id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.countries.iter().map(|c| c.id.as_str()).collect()
    }
}

/// One violated invariant, with a path locating the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Check every economy invariant and list what fails. An empty report means
/// the economy is valid.
pub fn validate_economy(economy: &Economy) -> Vec<Violation> {
    let mut report = Vec::new();
    let n = economy.countries.len();
    if n == 0 {
        report.push(Violation {
            path: "countries".into(),
            message: "economy needs at least one country".into(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for (k, c) in economy.countries.iter().enumerate() {
        if !seen.insert(c.id.clone()) {
            report.push(Violation {
                path: format!("countries[{k}].id"),
                message: format!("duplicate country id \"{}\"", c.id),
            });
        }
        if c.supply.kind() != CurveKind::Supply {
            report.push(Violation {
                path: format!("countries[{k}].supply"),
                message: "curve is not a supply curve".into(),
            });
        }
        if c.demand.kind() != CurveKind::Demand {
            report.push(Violation {
                path: format!("countries[{k}].demand"),
                message: "curve is not a demand curve".into(),
            });
        }
        for msg in c.supply.violations() {
            report.push(Violation {
                path: format!("countries[{k}].supply"),
                message: msg,
            });
        }
        for msg in c.demand.violations() {
            report.push(Violation {
                path: format!("countries[{k}].demand"),
                message: msg,
            });
        }
    }
    let t = &economy.tariffs;
    if t.n() != n || t.entries().iter().any(|row| row.len() != n) {
        report.push(Violation {
            path: "tariffs".into(),
            message: format!(
                "tariff matrix must be {n}x{n} to match the country count"
            ),
        });
        return report;
    }
    for i in 0..n {
        for j in 0..n {
            let rate = t.rate(i, j);
            if !rate.is_finite() || rate < 0.0 {
                report.push(Violation {
                    path: format!("tariffs[{i}][{j}]"),
                    message: format!("negative tariff {rate}"),
                });
            }
            if i == j && rate != 0.0 {
                report.push(Violation {
                    path: format!("tariffs[{i}][{j}]"),
                    message: format!("nonzero diagonal entry {rate}"),
                });
            }
        }
    }
    report
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The three-country wine economy with China's 10% tariff on both
    /// trading partners.
    pub fn scenario1() -> Economy {
        let mut t = TariffMatrix::zeros(3);
        t.set_rate(2, 0, 0.1);
        t.set_rate(2, 1, 0.1);
        Economy::new(
            vec![
                Country {
                    id: "EU".into(),
                    name: "European Union".into(),
                    supply: Curve::linear_supply(2.0, 0.5).unwrap(),
                    demand: Curve::linear_demand(8.0, 1.0).unwrap(),
                },
                Country {
                    id: "USA".into(),
                    name: "United States".into(),
                    supply: Curve::linear_supply(3.0, 0.5).unwrap(),
                    demand: Curve::linear_demand(7.0, 0.8).unwrap(),
                },
                Country {
                    id: "China".into(),
                    name: "China".into(),
                    supply: Curve::linear_supply(5.0, 1.0).unwrap(),
                    demand: Curve::linear_demand(8.0, 1.0).unwrap(),
                },
            ],
            t,
        )
    }

    /// Scenario 1 plus a 20% tariff by the USA on EU goods, with the USA
    /// supply intercept as printed (3).
    pub fn scenario2_printed() -> Economy {
        let mut eco = scenario1();
        eco.tariffs.set_rate(1, 0, 0.2);
        eco
    }

    /// The variant with the USA supply intercept raised to 4, which
    /// reproduces the second published table exactly.
    pub fn scenario2_variant() -> Economy {
        let mut eco = scenario2_printed();
        eco.countries[1].supply = Curve::linear_supply(4.0, 0.5).unwrap();
        eco
    }
}
