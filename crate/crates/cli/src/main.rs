//! Command-line front end: solve scenarios, report welfare, sweep tariffs,
//! verify flow configurations, and check trade networks for cycles.
//!
//! Exit codes: 0 on success, 1 when a solve fails to converge or a
//! verification finds violations, 2 on invalid input.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use tariffnet::{
    equilibrium_from_flows, is_dag, parse_flows, parse_scenario, solve_scenario, tariff_sweep,
    verify_selection, welfare_report_with, Economy, Method, OutputFormat, Results, Scenario,
    SolveError,
};

const EXIT_FAILURE: i32 = 1;
const EXIT_INVALID: i32 = 2;

#[derive(Parser)]
#[command(name = "tariffnet", version, about = "Tariff-equilibrium solver for trade networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    FixedNetwork,
    Tatonnement,
    Enumerate,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::FixedNetwork => Method::FixedNetwork,
            MethodArg::Tatonnement => Method::Tatonnement,
            MethodArg::Enumerate => Method::Enumerate,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and print the equilibrium
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        /// Write output here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Solver to use (default: fixed network when present, else the
        /// full solver with enumeration fallback)
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Run the full solver even if the scenario has a fixed network
        #[arg(long)]
        ignore_fixed_network: bool,
        /// Solve fixed-network systems in exact rational arithmetic
        #[arg(long)]
        exact: bool,
    },
    /// Solve a scenario and print the welfare decomposition
    Welfare {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        ignore_fixed_network: bool,
        #[arg(long)]
        exact: bool,
    },
    /// Re-solve along a tariff axis and report regime changes
    Sweep {
        scenario: PathBuf,
        /// Country id imposing the tariff
        #[arg(long)]
        importer: String,
        /// Country id the tariff applies to
        #[arg(long)]
        exporter: String,
        #[arg(long, default_value = "0.0")]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of grid points, endpoints included
        #[arg(long, default_value = "11")]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        ignore_fixed_network: bool,
        /// Parallel workers (results identical to sequential)
        #[arg(long, default_value = "1")]
        workers: usize,
    },
    /// Check a flow configuration against the selection condition
    Verify {
        scenario: PathBuf,
        /// Flows document ({"flows": [[...], ...]}) to verify
        #[arg(long)]
        flows: PathBuf,
    },
    /// Report whether the cross-border trade network is acyclic
    CheckDag {
        scenario: PathBuf,
        /// Check these flows instead of solving the scenario
        #[arg(long)]
        flows: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    });
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_scenario(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn country_index(economy: &Economy, id: &str) -> Result<usize> {
    economy
        .country_index(id)
        .ok_or_else(|| anyhow!("unknown country id \"{id}\""))
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Solve {
            scenario,
            format,
            output,
            method,
            ignore_fixed_network,
            exact,
        } => {
            let scn = load_scenario(&scenario)?;
            let eq = match solve_scenario(
                &scn,
                method.map(Into::into),
                ignore_fixed_network,
                exact.then_some(true),
            ) {
                Ok(eq) => eq,
                Err(e @ SolveError::Convergence { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_FAILURE);
                }
                Err(e) => return Err(e.into()),
            };
            if eq.diagnostics.selection_slack > scn.options.price_tolerance {
                eprintln!(
                    "note: fixed network violates firm selection (slack {:.6}); run `verify` for details",
                    eq.diagnostics.selection_slack
                );
            }
            let text = tariffnet::write_results(
                &Results::Equilibrium(&scn.economy, &eq),
                format.into(),
            );
            emit(&text, output.as_deref())?;
            Ok(0)
        }
        Command::Welfare {
            scenario,
            format,
            output,
            method,
            ignore_fixed_network,
            exact,
        } => {
            let scn = load_scenario(&scenario)?;
            let eq = match solve_scenario(
                &scn,
                method.map(Into::into),
                ignore_fixed_network,
                exact.then_some(true),
            ) {
                Ok(eq) => eq,
                Err(e @ SolveError::Convergence { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_FAILURE);
                }
                Err(e) => return Err(e.into()),
            };
            let report = welfare_report_with(&scn.economy, &eq, &scn.options);
            let text =
                tariffnet::write_results(&Results::Welfare(&scn.economy, &report), format.into());
            emit(&text, output.as_deref())?;
            Ok(0)
        }
        Command::Sweep {
            scenario,
            importer,
            exporter,
            from,
            to,
            steps,
            format,
            output,
            ignore_fixed_network,
            workers,
        } => {
            let scn = load_scenario(&scenario)?;
            let importer = country_index(&scn.economy, &importer)?;
            let exporter = country_index(&scn.economy, &exporter)?;
            if steps == 0 {
                return Err(anyhow!("--steps must be at least 1"));
            }
            let grid: Vec<f64> = if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
                    .collect()
            };
            let preferred = if ignore_fixed_network {
                None
            } else {
                scn.fixed_network.as_ref()
            };
            let result = tariff_sweep(
                &scn.economy,
                preferred,
                importer,
                exporter,
                &grid,
                &scn.options,
                workers.max(1),
            )?;
            let text =
                tariffnet::write_results(&Results::Sweep(&scn.economy, &result), format.into());
            emit(&text, output.as_deref())?;
            if result.rows.iter().any(|r| !r.solved()) {
                eprintln!("note: some grid points failed to solve; see the output rows");
                return Ok(EXIT_FAILURE);
            }
            Ok(0)
        }
        Command::Verify { scenario, flows } => {
            let scn = load_scenario(&scenario)?;
            let text = std::fs::read_to_string(&flows)
                .with_context(|| format!("cannot read {}", flows.display()))?;
            let matrix = parse_flows(&text, scn.economy.n())
                .map_err(|e| anyhow!("{}: {e}", flows.display()))?;
            let eq = equilibrium_from_flows(&scn.economy, matrix, &scn.options)?;
            let violations = verify_selection(&scn.economy, &eq, &scn.options);
            if violations.is_empty() {
                println!("selection consistent: no violations");
                return Ok(0);
            }
            for v in &violations {
                println!(
                    "violation: producer {}, destination {}, gap {:.6}",
                    scn.economy.countries[v.producer].id,
                    scn.economy.countries[v.better_market].id,
                    v.gap
                );
            }
            Ok(EXIT_FAILURE)
        }
        Command::CheckDag { scenario, flows } => {
            let scn = load_scenario(&scenario)?;
            let matrix = match flows {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    parse_flows(&text, scn.economy.n())
                        .map_err(|e| anyhow!("{}: {e}", path.display()))?
                }
                None => {
                    let eq = solve_scenario(&scn, None, false, None)?;
                    eq.flows
                }
            };
            let check = is_dag(&matrix, scn.options.flow_tolerance)?;
            if check.is_dag {
                println!("acyclic: the cross-border trade network is a DAG");
                Ok(0)
            } else {
                let cycle = check
                    .cycle
                    .unwrap_or_default()
                    .iter()
                    .map(|&k| scn.economy.countries[k].id.as_str())
                    .collect::<Vec<_>>()
                    .join(" -> ");
                println!("cycle found: {cycle}");
                Ok(EXIT_FAILURE)
            }
        }
    }
}
