//! Scenario-level solve policy: which solver runs for a given scenario and
//! set of overrides. This is the logic behind the CLI's `solve`.

use crate::equilibrium::{
    enumerate_equilibria, solve_equilibrium, solve_fixed_network, Equilibrium, Method, SolveError,
};
use crate::scenario::Scenario;

/// Solve a scenario.
///
/// An explicit method (from the document or an override) wins. Otherwise a
/// fixed network, when present and not ignored, is honored as-is — that is
/// the replication mode, selection violations included. Without one, the
/// full solver runs, with the enumeration oracle as fallback on
/// convergence failure for economies small enough to enumerate.
pub fn solve_scenario(
    scenario: &Scenario,
    method_override: Option<Method>,
    ignore_fixed_network: bool,
    exact_rational: Option<bool>,
) -> Result<Equilibrium, SolveError> {
    let mut options = scenario.options.clone();
    if let Some(exact) = exact_rational {
        options.exact_rational = exact;
    }
    let economy = &scenario.economy;
    let fixed = if ignore_fixed_network {
        None
    } else {
        scenario.fixed_network.as_ref()
    };
    let method = method_override.or(scenario.explicit_method);
    match method {
        Some(Method::FixedNetwork) => {
            let pattern = fixed.ok_or_else(|| {
                SolveError::InvalidOptions(
                    "fixed_network method needs a fixed_network in the scenario".into(),
                )
            })?;
            solve_fixed_network(economy, pattern, &options)
        }
        Some(Method::Tatonnement) => solve_equilibrium(economy, &options),
        Some(Method::Enumerate) => enumerate_equilibria(economy, &options)?
            .into_iter()
            .next()
            .ok_or(SolveError::NoEquilibrium),
        None => {
            if let Some(pattern) = fixed {
                if options.exact_rational {
                    return solve_fixed_network(economy, pattern, &options);
                }
                return solve_fixed_network(economy, pattern, &options);
            }
            if options.exact_rational {
                return Err(SolveError::ExactModeUnsupported(
                    "exact mode applies to fixed-network solves".into(),
                ));
            }
            match solve_equilibrium(economy, &options) {
                Ok(eq) => Ok(eq),
                Err(SolveError::Convergence { iterations, residual }) if economy.n() <= 4 => {
                    enumerate_equilibria(economy, &options)?
                        .into_iter()
                        .next()
                        .ok_or(SolveError::Convergence { iterations, residual })
                }
                Err(e) => Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    const DOC: &str = r#"{
        "countries": [
            {"id": "A",
             "supply": {"type": "linear", "intercept": 2.0, "slope": 0.5},
             "demand": {"type": "linear", "intercept": 8.0, "slope": 1.0}},
            {"id": "B",
             "supply": {"type": "linear", "intercept": 3.0, "slope": 0.5},
             "demand": {"type": "linear", "intercept": 7.0, "slope": 0.8}}
        ],
        "tariffs": [[0.0, 0.0], [0.0, 0.0]],
        "fixed_network": [["A", "A"], ["A", "B"], ["B", "B"]]
    }"#;

    #[test]
    fn default_policy_honors_the_fixed_network() {
        let s = parse_scenario(DOC).unwrap();
        let eq = solve_scenario(&s, None, false, None).unwrap();
        assert_eq!(
            eq.diagnostics.method,
            crate::equilibrium::MethodTag::FixedNetwork
        );
    }

    #[test]
    fn ignore_flag_runs_the_full_solver() {
        let s = parse_scenario(DOC).unwrap();
        let eq = solve_scenario(&s, None, true, None).unwrap();
        assert_eq!(
            eq.diagnostics.method,
            crate::equilibrium::MethodTag::Tatonnement
        );
    }

    #[test]
    fn explicit_enumerate_override() {
        let s = parse_scenario(DOC).unwrap();
        let eq = solve_scenario(&s, Some(Method::Enumerate), false, None).unwrap();
        assert_eq!(
            eq.diagnostics.method,
            crate::equilibrium::MethodTag::Enumerate
        );
    }

    #[test]
    fn exact_without_a_network_is_an_error() {
        let s = parse_scenario(DOC).unwrap();
        let err = solve_scenario(&s, None, true, Some(true));
        assert!(matches!(err, Err(SolveError::ExactModeUnsupported(_))));
    }
}
