//! Scenario documents: the JSON format that carries an economy, an optional
//! fixed trade network, and solver options.
//!
//! The format is strict: unknown fields are rejected so a mistyped tariff
//! key fails loudly instead of being ignored.

use crate::curve::{Curve, CurveKind};
use crate::economy::{validate_economy, Country, Economy, TariffMatrix};
use crate::equilibrium::{Method, SolverOptions};
use crate::pattern::{Link, TradePattern};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Parse(String),
    #[error("invalid scenario at {path}: {message}")]
    Invalid { path: String, message: String },
}

/// A parsed scenario: the economy, an optional hand-picked network, solver
/// options, and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub description: Option<String>,
    pub economy: Economy,
    pub fixed_network: Option<TradePattern>,
    pub options: SolverOptions,
    /// Method named in the document, if any; `None` means the default
    /// policy (fixed network when present, otherwise the full solver).
    pub explicit_method: Option<Method>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    countries: Vec<CountryDoc>,
    tariffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_network: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<OptionsDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountryDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    supply: CurveDoc,
    demand: CurveDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum CurveDoc {
    /// `intercept + slope * q` for supply, `intercept - slope * q` for
    /// demand; the slope is stored positive either way.
    #[serde(rename = "linear")]
    Linear { intercept: f64, slope: f64 },
    #[serde(rename = "pwl")]
    Pwl { points: Vec<(f64, f64)> },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    price_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tie_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact_rational: Option<bool>,
}

fn curve_from_doc(doc: &CurveDoc, kind: CurveKind, path: &str) -> Result<Curve, ScenarioError> {
    let built = match doc {
        CurveDoc::Linear { intercept, slope } => match kind {
            CurveKind::Supply => Curve::linear_supply(*intercept, *slope),
            CurveKind::Demand => Curve::linear_demand(*intercept, *slope),
        },
        CurveDoc::Pwl { points } => Curve::piecewise(kind, points.clone()),
    };
    built.map_err(|e| ScenarioError::Invalid {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn curve_to_doc(curve: &Curve) -> CurveDoc {
    match curve.as_linear() {
        Some((intercept, slope)) => CurveDoc::Linear {
            intercept,
            slope: slope.abs(),
        },
        None => CurveDoc::Pwl {
            points: curve.breakpoints().to_vec(),
        },
    }
}

/// Parse and validate a scenario document. Every failure names the
/// offending field.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc =
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut countries = Vec::with_capacity(doc.countries.len());
    for (k, c) in doc.countries.iter().enumerate() {
        countries.push(Country {
            id: c.id.clone(),
            name: c.name.clone().unwrap_or_else(|| c.id.clone()),
            supply: curve_from_doc(&c.supply, CurveKind::Supply, &format!("countries[{k}].supply"))?,
            demand: curve_from_doc(&c.demand, CurveKind::Demand, &format!("countries[{k}].demand"))?,
        });
    }
    let economy = Economy::new(countries, TariffMatrix::new(doc.tariffs.clone()));
    if let Some(v) = validate_economy(&economy).into_iter().next() {
        return Err(ScenarioError::Invalid {
            path: v.path,
            message: v.message,
        });
    }
    let fixed_network = match &doc.fixed_network {
        None => None,
        Some(pairs) => {
            let mut links = Vec::with_capacity(pairs.len());
            for (k, (producer, market)) in pairs.iter().enumerate() {
                let p = economy.country_index(producer).ok_or_else(|| ScenarioError::Invalid {
                    path: format!("fixed_network[{k}]"),
                    message: format!("unknown producer id \"{producer}\""),
                })?;
                let m = economy.country_index(market).ok_or_else(|| ScenarioError::Invalid {
                    path: format!("fixed_network[{k}]"),
                    message: format!("unknown market id \"{market}\""),
                })?;
                links.push(Link::new(p, m));
            }
            Some(TradePattern::new(economy.n(), links).expect("indices in range"))
        }
    };
    let mut options = SolverOptions::default();
    let mut explicit_method = None;
    if let Some(o) = &doc.options {
        if let Some(v) = o.price_tolerance {
            options.price_tolerance = v;
        }
        if let Some(v) = o.tie_tolerance {
            options.tie_tolerance = v;
        }
        if let Some(v) = o.flow_tolerance {
            options.flow_tolerance = v;
        }
        if let Some(v) = o.damping {
            options.damping = v;
        }
        if let Some(v) = o.max_iterations {
            options.max_iterations = v;
        }
        if let Some(v) = o.exact_rational {
            options.exact_rational = v;
        }
        if let Some(m) = o.method {
            options.method = m;
            explicit_method = Some(m);
        }
        if let Err(e) = options.validate() {
            return Err(ScenarioError::Invalid {
                path: "options".into(),
                message: e.to_string(),
            });
        }
    }
    Ok(Scenario {
        name: doc.name,
        description: doc.description,
        economy,
        fixed_network,
        options,
        explicit_method,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowsDoc {
    flows: Vec<Vec<f64>>,
}

/// Parse a flows document: `{"flows": [[...], ...]}` with
/// `flows[importer][exporter]` in the scenario's country order.
pub fn parse_flows(text: &str, n: usize) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let doc: FlowsDoc =
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if doc.flows.len() != n || doc.flows.iter().any(|row| row.len() != n) {
        return Err(ScenarioError::Invalid {
            path: "flows".into(),
            message: format!("flow matrix must be {n}x{n} to match the scenario"),
        });
    }
    for (i, row) in doc.flows.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            if !q.is_finite() || q < 0.0 {
                return Err(ScenarioError::Invalid {
                    path: format!("flows[{i}][{j}]"),
                    message: format!("flows must be finite and nonnegative, got {q}"),
                });
            }
        }
    }
    Ok(doc.flows)
}

/// Serialize a scenario back to its document form.
pub fn write_scenario(scenario: &Scenario) -> String {
    let doc = ScenarioDoc {
        name: scenario.name.clone(),
        description: scenario.description.clone(),
        countries: scenario
            .economy
            .countries
            .iter()
            .map(|c| CountryDoc {
                id: c.id.clone(),
                name: if c.name == c.id {
                    None
                } else {
                    Some(c.name.clone())
                },
                supply: curve_to_doc(&c.supply),
                demand: curve_to_doc(&c.demand),
            })
            .collect(),
        tariffs: scenario.economy.tariffs.entries().to_vec(),
        fixed_network: scenario.fixed_network.as_ref().map(|p| {
            p.links()
                .map(|l| {
                    (
                        scenario.economy.countries[l.producer].id.clone(),
                        scenario.economy.countries[l.market].id.clone(),
                    )
                })
                .collect()
        }),
        options: {
            let defaults = SolverOptions::default();
            let o = &scenario.options;
            if *o == defaults && scenario.explicit_method.is_none() {
                None
            } else {
                Some(OptionsDoc {
                    price_tolerance: (o.price_tolerance != defaults.price_tolerance)
                        .then_some(o.price_tolerance),
                    tie_tolerance: (o.tie_tolerance != defaults.tie_tolerance)
                        .then_some(o.tie_tolerance),
                    flow_tolerance: (o.flow_tolerance != defaults.flow_tolerance)
                        .then_some(o.flow_tolerance),
                    damping: (o.damping != defaults.damping).then_some(o.damping),
                    max_iterations: (o.max_iterations != defaults.max_iterations)
                        .then_some(o.max_iterations),
                    method: scenario.explicit_method,
                    exact_rational: (o.exact_rational != defaults.exact_rational)
                        .then_some(o.exact_rational),
                })
            }
        },
    };
    serde_json::to_string_pretty(&doc).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "countries": [
            {"id": "A",
             "supply": {"type": "linear", "intercept": 2.0, "slope": 0.5},
             "demand": {"type": "linear", "intercept": 8.0, "slope": 1.0}},
            {"id": "B",
             "supply": {"type": "linear", "intercept": 3.0, "slope": 0.5},
             "demand": {"type": "linear", "intercept": 7.0, "slope": 0.8}}
        ],
        "tariffs": [[0.0, 0.1], [0.2, 0.0]],
        "fixed_network": [["A", "A"], ["A", "B"], ["B", "B"]]
    }"#;

    #[test]
    fn parses_a_minimal_scenario() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.economy.n(), 2);
        assert_eq!(s.economy.tariffs.rate(0, 1), 0.1);
        assert_eq!(s.economy.tariffs.rate(1, 0), 0.2);
        let fixed = s.fixed_network.unwrap();
        assert_eq!(fixed.m(), 3);
        assert!(fixed.contains(Link::new(0, 1)));
        assert!(s.explicit_method.is_none());
    }

    #[test]
    fn dimension_mismatch_points_at_tariffs() {
        let text = MINIMAL.replace("[[0.0, 0.1], [0.2, 0.0]]", "[[0.0, 0.1]]");
        match parse_scenario(&text) {
            Err(ScenarioError::Invalid { path, .. }) => assert_eq!(path, "tariffs"),
            other => panic!("expected invalid at tariffs, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"tariffs\"", "\"tarifs\"");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn unknown_fixed_network_id_is_located() {
        let text = MINIMAL.replace("[\"A\", \"B\"]", "[\"A\", \"Z\"]");
        match parse_scenario(&text) {
            Err(ScenarioError::Invalid { path, message }) => {
                assert_eq!(path, "fixed_network[1]");
                assert!(message.contains("Z"));
            }
            other => panic!("expected invalid fixed_network, got {other:?}"),
        }
    }

    #[test]
    fn bad_curve_is_located() {
        let text = MINIMAL.replace(
            "{\"type\": \"linear\", \"intercept\": 8.0, \"slope\": 1.0}",
            "{\"type\": \"linear\", \"intercept\": 8.0, \"slope\": -1.0}",
        );
        match parse_scenario(&text) {
            Err(ScenarioError::Invalid { path, .. }) => {
                assert_eq!(path, "countries[0].demand")
            }
            other => panic!("expected invalid demand, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_is_structural_identity() {
        let s1 = parse_scenario(MINIMAL).unwrap();
        let s2 = parse_scenario(&write_scenario(&s1)).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn pwl_curves_roundtrip() {
        let text = r#"{
            "countries": [
                {"id": "A",
                 "supply": {"type": "pwl", "points": [[0.0, 1.0], [2.0, 2.0], [4.0, 5.0]]},
                 "demand": {"type": "pwl", "points": [[0.0, 9.0], [3.0, 6.0]]}}
            ],
            "tariffs": [[0.0]]
        }"#;
        let s1 = parse_scenario(text).unwrap();
        let s2 = parse_scenario(&write_scenario(&s1)).unwrap();
        assert_eq!(s1, s2);
    }
}
