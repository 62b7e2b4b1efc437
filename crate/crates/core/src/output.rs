//! Result writers: human tables, JSON, and CSV.
//!
//! Machine formats print floats at full precision (shortest round-trip
//! form), so re-parsing recovers bit-identical values. Tables use six
//! significant digits. Country order always follows the scenario.

use crate::economy::Economy;
use crate::equilibrium::Equilibrium;
use crate::sweep::{detect_regime_changes, SweepResult};
use crate::welfare::WelfareReport;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format \"{other}\" (use table, json, or csv)")),
        }
    }
}

/// Anything the CLI can emit.
pub enum Results<'a> {
    Equilibrium(&'a Economy, &'a Equilibrium),
    Welfare(&'a Economy, &'a WelfareReport),
    Sweep(&'a Economy, &'a SweepResult),
}

/// Render a payload in the chosen format.
pub fn write_results(payload: &Results, format: OutputFormat) -> String {
    match payload {
        Results::Equilibrium(eco, eq) => write_equilibrium(eco, eq, format),
        Results::Welfare(eco, report) => write_welfare(eco, report, format),
        Results::Sweep(eco, result) => write_sweep(eco, result, format),
    }
}

/// Six significant digits for table output.
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = 5 - x.abs().log10().floor() as i32;
    let digits = digits.clamp(0, 14) as usize;
    format!("{x:.digits$}")
}

#[derive(Serialize)]
struct EquilibriumJson<'a> {
    countries: Vec<&'a str>,
    consumer_prices: &'a [f64],
    producer_prices: &'a [f64],
    flows: &'a [Vec<f64>],
    pattern: Vec<(&'a str, &'a str)>,
    diagnostics: &'a crate::equilibrium::Diagnostics,
}

pub fn write_equilibrium(eco: &Economy, eq: &Equilibrium, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let view = EquilibriumJson {
                countries: eco.ids(),
                consumer_prices: &eq.consumer_prices,
                producer_prices: &eq.producer_prices,
                flows: &eq.flows,
                pattern: eq
                    .pattern
                    .links()
                    .map(|l| {
                        (
                            eco.countries[l.producer].id.as_str(),
                            eco.countries[l.market].id.as_str(),
                        )
                    })
                    .collect(),
                diagnostics: &eq.diagnostics,
            };
            serde_json::to_string_pretty(&view).expect("serializable") + "\n"
        }
        OutputFormat::Csv => {
            let mut out = String::from("importer,exporter,quantity,consumer_price,producer_price\n");
            for (i, row) in eq.flows.iter().enumerate() {
                for (j, &q) in row.iter().enumerate() {
                    if q > 0.0 {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            eco.countries[i].id,
                            eco.countries[j].id,
                            q,
                            eq.consumer_prices[i],
                            eq.producer_prices[j]
                        );
                    }
                }
            }
            out
        }
        OutputFormat::Table => {
            let mut out = String::from("Trade flows\n");
            let _ = writeln!(out, "  {:<10} {:<10} {:>12} {:>14}", "producer", "market", "quantity", "unit revenue");
            for link in eq.pattern.links() {
                let q = eq.flows[link.market][link.producer];
                let revenue = eq.consumer_prices[link.market]
                    / (1.0 + eco.tariffs.rate(link.market, link.producer));
                let _ = writeln!(
                    out,
                    "  {:<10} {:<10} {:>12} {:>14}",
                    eco.countries[link.producer].id,
                    eco.countries[link.market].id,
                    sig6(q),
                    sig6(revenue)
                );
            }
            out.push_str("\nPrices\n");
            let _ = writeln!(out, "  {:<10} {:>12} {:>12}", "country", "consumer", "producer");
            for (k, c) in eco.countries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {:<10} {:>12} {:>12}",
                    c.id,
                    sig6(eq.consumer_prices[k]),
                    sig6(eq.producer_prices[k])
                );
            }
            let d = &eq.diagnostics;
            let _ = writeln!(
                out,
                "\nmethod {} | iterations {} | clearing residual {:.2e} | selection slack {:.2e}{}",
                d.method,
                d.iterations,
                d.clearing_residual,
                d.selection_slack,
                if d.multiplicity {
                    " | flows are one of several feasible matrices"
                } else {
                    ""
                }
            );
            out
        }
    }
}

#[derive(Serialize)]
struct WelfareJson<'a> {
    countries: Vec<&'a str>,
    report: &'a WelfareReport,
}

pub fn write_welfare(eco: &Economy, report: &WelfareReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let view = WelfareJson {
                countries: eco.ids(),
                report,
            };
            serde_json::to_string_pretty(&view).expect("serializable") + "\n"
        }
        OutputFormat::Csv => {
            let mut out =
                String::from("country,consumer_surplus,firm_profits,tariff_revenue,total\n");
            for (k, c) in report.countries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    eco.countries[k].id,
                    c.consumer_surplus,
                    c.firm_profits,
                    c.tariff_revenue,
                    c.total
                );
            }
            out
        }
        OutputFormat::Table => {
            let mut out = String::from("Welfare\n");
            let _ = writeln!(
                out,
                "  {:<10} {:>14} {:>14} {:>14} {:>14}",
                "country", "consumer surp.", "firm profits", "tariff revenue", "total"
            );
            for (k, c) in report.countries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {:<10} {:>14} {:>14} {:>14} {:>14}",
                    eco.countries[k].id,
                    sig6(c.consumer_surplus),
                    sig6(c.firm_profits),
                    sig6(c.tariff_revenue),
                    sig6(c.total)
                );
            }
            let _ = writeln!(
                out,
                "  {:<10} {:>14} {:>14} {:>14} {:>14}",
                "(world)",
                sig6(report.total_consumer_surplus),
                sig6(report.total_firm_profits),
                sig6(report.total_tariff_revenue),
                sig6(report.total)
            );
            if let Some((lo, hi)) = report.revenue_bounds {
                let _ = writeln!(
                    out,
                    "\nworld tariff revenue ranges over [{}, {}] across feasible flow matrices",
                    sig6(lo),
                    sig6(hi)
                );
            }
            out
        }
    }
}

#[derive(Serialize)]
struct SweepRowJson<'a> {
    tariff: f64,
    pattern_id: Option<&'a str>,
    consumer_prices: Option<&'a [f64]>,
    producer_prices: Option<&'a [f64]>,
    welfare_totals: Option<Vec<f64>>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    countries: Vec<&'a str>,
    importer: &'a str,
    exporter: &'a str,
    rows: Vec<SweepRowJson<'a>>,
    regime_changes: Vec<(usize, usize)>,
}

pub fn write_sweep(eco: &Economy, result: &SweepResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let view = SweepJson {
                countries: eco.ids(),
                importer: &eco.countries[result.importer].id,
                exporter: &eco.countries[result.exporter].id,
                rows: result
                    .rows
                    .iter()
                    .map(|r| SweepRowJson {
                        tariff: r.tariff,
                        pattern_id: r.pattern_id.as_deref(),
                        consumer_prices: r.equilibrium.as_ref().map(|e| e.consumer_prices.as_slice()),
                        producer_prices: r.equilibrium.as_ref().map(|e| e.producer_prices.as_slice()),
                        welfare_totals: r
                            .welfare
                            .as_ref()
                            .map(|w| w.countries.iter().map(|c| c.total).collect()),
                        error: r.error.as_deref(),
                    })
                    .collect(),
                regime_changes: result.regime_changes.clone(),
            };
            serde_json::to_string_pretty(&view).expect("serializable") + "\n"
        }
        OutputFormat::Csv => {
            let mut out = String::from("tariff_value,pattern_id");
            for c in &eco.countries {
                let _ = write!(out, ",p_c_{}", c.id);
            }
            for c in &eco.countries {
                let _ = write!(out, ",p_f_{}", c.id);
            }
            for c in &eco.countries {
                let _ = write!(out, ",W_{}", c.id);
            }
            out.push_str(",convergence_status\n");
            for row in &result.rows {
                let _ = write!(out, "{}", row.tariff);
                let _ = write!(out, ",{}", row.pattern_id.as_deref().unwrap_or(""));
                match (&row.equilibrium, &row.welfare) {
                    (Some(eq), Some(w)) => {
                        for p in &eq.consumer_prices {
                            let _ = write!(out, ",{p}");
                        }
                        for p in &eq.producer_prices {
                            let _ = write!(out, ",{p}");
                        }
                        for c in &w.countries {
                            let _ = write!(out, ",{}", c.total);
                        }
                        out.push_str(",ok\n");
                    }
                    _ => {
                        for _ in 0..3 * eco.n() {
                            out.push(',');
                        }
                        out.push_str(",failed\n");
                    }
                }
            }
            out
        }
        OutputFormat::Table => {
            let mut out = format!(
                "Sweep of tariff by {} on {}\n",
                eco.countries[result.importer].id, eco.countries[result.exporter].id
            );
            let _ = writeln!(out, "  {:>10} {:<18} {}", "tariff", "pattern", "consumer prices");
            for row in &result.rows {
                match &row.equilibrium {
                    Some(eq) => {
                        let prices = eq
                            .consumer_prices
                            .iter()
                            .map(|p| sig6(*p))
                            .collect::<Vec<_>>()
                            .join(" ");
                        let _ = writeln!(
                            out,
                            "  {:>10} {:<18} {}",
                            sig6(row.tariff),
                            row.pattern_id.as_deref().unwrap_or(""),
                            prices
                        );
                    }
                    None => {
                        let _ = writeln!(
                            out,
                            "  {:>10} {:<18} failed: {}",
                            sig6(row.tariff),
                            "-",
                            row.error.as_deref().unwrap_or("unknown")
                        );
                    }
                }
            }
            let changes = detect_regime_changes(result);
            if changes.is_empty() {
                out.push_str("\nno regime changes\n");
            } else {
                out.push_str("\nRegime changes\n");
                for ch in changes {
                    if !ch.known {
                        let _ = writeln!(
                            out,
                            "  ({}, {}]: unknown (solve failed on a boundary row)",
                            sig6(ch.interval.0),
                            sig6(ch.interval.1)
                        );
                        continue;
                    }
                    let fmt_links = |links: &[crate::pattern::Link]| {
                        links
                            .iter()
                            .map(|l| {
                                format!(
                                    "{}->{}",
                                    eco.countries[l.producer].id, eco.countries[l.market].id
                                )
                            })
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    let _ = writeln!(
                        out,
                        "  ({}, {}]: removed {{{}}} added {{{}}}",
                        sig6(ch.interval.0),
                        sig6(ch.interval.1),
                        fmt_links(&ch.diff.removed),
                        fmt_links(&ch.diff.added)
                    );
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::fixtures::scenario1;
    use crate::equilibrium::{solve_equilibrium, SolverOptions};
    use crate::sweep::tariff_sweep;
    use crate::welfare::welfare_report;

    #[test]
    fn table_mode_uses_six_significant_digits() {
        assert_eq!(sig6(4.704142011834319), "4.70414");
        assert_eq!(sig6(0.5384615384615384), "0.538462");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456.789), "123457");
    }

    #[test]
    fn equilibrium_csv_reparses_bit_identical() {
        let eco = scenario1();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let csv = write_equilibrium(&eco, &eq, OutputFormat::Csv);
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            let i = eco.country_index(cells[0]).unwrap();
            let j = eco.country_index(cells[1]).unwrap();
            assert_eq!(cells[2].parse::<f64>().unwrap(), eq.flows[i][j]);
            assert_eq!(cells[3].parse::<f64>().unwrap(), eq.consumer_prices[i]);
            assert_eq!(cells[4].parse::<f64>().unwrap(), eq.producer_prices[j]);
        }
    }

    #[test]
    fn equilibrium_json_reparses_bit_identical() {
        let eco = scenario1();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let text = write_equilibrium(&eco, &eq, OutputFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        for (k, &p) in eq.consumer_prices.iter().enumerate() {
            assert_eq!(parsed["consumer_prices"][k].as_f64().unwrap(), p);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(parsed["flows"][i][j].as_f64().unwrap(), eq.flows[i][j]);
            }
        }
    }

    #[test]
    fn empty_sweep_rows_render_header_only_csv() {
        let eco = scenario1();
        let result = tariff_sweep(&eco, None, 1, 0, &[0.1], &SolverOptions::default(), 1).unwrap();
        let csv = write_sweep(&eco, &result, OutputFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("tariff_value,pattern_id,p_c_EU"));
        assert!(lines[0].ends_with("convergence_status"));
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn welfare_csv_has_one_row_per_country() {
        let eco = scenario1();
        let eq = solve_equilibrium(&eco, &SolverOptions::default()).unwrap();
        let report = welfare_report(&eco, &eq);
        let csv = write_welfare(&eco, &report, OutputFormat::Csv);
        assert_eq!(csv.lines().count(), 4);
    }
}
