//! Comparative statics along one tariff axis: re-solve the economy on a
//! grid, track prices and welfare, and flag the grid intervals where the
//! trade pattern reconfigures.

use crate::economy::Economy;
use crate::equilibrium::{solve_auto, Equilibrium, SolverOptions};
use crate::netstruct::{pattern_diff, PatternDiff};
use crate::pattern::TradePattern;
use crate::welfare::{welfare_report_with, WelfareReport};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("importer and exporter must be distinct countries of the economy")]
    BadAxis,
    #[error("grid must be nonempty, ascending, and nonnegative")]
    BadGrid,
    #[error("economy is invalid: {0}")]
    InvalidEconomy(String),
}

/// One grid point of a sweep. Failed solves carry the error text instead of
/// being dropped.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub tariff: f64,
    pub equilibrium: Option<Equilibrium>,
    pub welfare: Option<WelfareReport>,
    pub pattern_id: Option<String>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn solved(&self) -> bool {
        self.equilibrium.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub importer: usize,
    pub exporter: usize,
    pub grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// Indices (k, k+1) of adjacent rows whose pattern identifiers differ.
    pub regime_changes: Vec<(usize, usize)>,
}

/// Re-solve the economy for each tariff value on the grid, everything else
/// unchanged. When a preferred pattern is given (a scenario's fixed
/// network), each row keeps it for as long as it stays selection-consistent
/// and falls back to the full solver beyond that. Rows are independent;
/// `workers` only parallelizes them, the output is identical to sequential
/// evaluation.
pub fn tariff_sweep(
    economy: &Economy,
    preferred: Option<&TradePattern>,
    importer: usize,
    exporter: usize,
    grid: &[f64],
    options: &SolverOptions,
    workers: usize,
) -> Result<SweepResult, SweepError> {
    let n = economy.n();
    if importer == exporter || importer >= n || exporter >= n {
        return Err(SweepError::BadAxis);
    }
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(SweepError::BadGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::BadGrid);
    }
    let report = crate::economy::validate_economy(economy);
    if !report.is_empty() {
        return Err(SweepError::InvalidEconomy(
            report
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }

    let solve_row = |&tariff: &f64| -> SweepRow {
        let mut eco = economy.clone();
        eco.tariffs.set_rate(importer, exporter, tariff);
        match solve_auto(&eco, preferred, options) {
            Ok(eq) => {
                let welfare = welfare_report_with(&eco, &eq, options);
                SweepRow {
                    tariff,
                    pattern_id: Some(eq.pattern.id()),
                    welfare: Some(welfare),
                    equilibrium: Some(eq),
                    error: None,
                }
            }
            Err(e) => SweepRow {
                tariff,
                equilibrium: None,
                welfare: None,
                pattern_id: None,
                error: Some(e.to_string()),
            },
        }
    };

    let rows: Vec<SweepRow> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| grid.par_iter().map(solve_row).collect())
    } else {
        grid.iter().map(solve_row).collect()
    };

    let mut regime_changes = Vec::new();
    for k in 0..rows.len().saturating_sub(1) {
        match (&rows[k].pattern_id, &rows[k + 1].pattern_id) {
            (Some(a), Some(b)) if a != b => regime_changes.push((k, k + 1)),
            _ => {}
        }
    }
    Ok(SweepResult {
        importer,
        exporter,
        grid: grid.to_vec(),
        rows,
        regime_changes,
    })
}

/// A pattern reconfiguration between two adjacent grid points, with the
/// link diff and the per-country welfare jump across the boundary.
/// Boundaries touching a failed row are reported as unknown rather than
/// silently bridged.
#[derive(Debug, Clone)]
pub struct RegimeChange {
    pub interval: (f64, f64),
    pub known: bool,
    pub diff: PatternDiff,
    pub welfare_jump: Option<Vec<f64>>,
}

/// All pattern changes (and unknown boundaries) of a sweep, in grid order.
pub fn detect_regime_changes(result: &SweepResult) -> Vec<RegimeChange> {
    let mut out = Vec::new();
    for k in 0..result.rows.len().saturating_sub(1) {
        let a = &result.rows[k];
        let b = &result.rows[k + 1];
        match (&a.equilibrium, &b.equilibrium) {
            (Some(ea), Some(eb)) => {
                if a.pattern_id == b.pattern_id {
                    continue;
                }
                let diff = pattern_diff(&ea.pattern, &eb.pattern).unwrap_or_default();
                let jump = match (&a.welfare, &b.welfare) {
                    (Some(wa), Some(wb)) => Some(
                        wa.countries
                            .iter()
                            .zip(&wb.countries)
                            .map(|(x, y)| y.total - x.total)
                            .collect(),
                    ),
                    _ => None,
                };
                out.push(RegimeChange {
                    interval: (a.tariff, b.tariff),
                    known: true,
                    diff,
                    welfare_jump: jump,
                });
            }
            _ => {
                out.push(RegimeChange {
                    interval: (a.tariff, b.tariff),
                    known: false,
                    diff: PatternDiff::default(),
                    welfare_jump: None,
                });
            }
        }
    }
    out
}

/// Bisect a regime boundary down to `tol` in tariff units. Both endpoints
/// must solve; returns the midpoint of the final bracket.
pub fn refine_boundary(
    economy: &Economy,
    preferred: Option<&TradePattern>,
    importer: usize,
    exporter: usize,
    mut lo: f64,
    mut hi: f64,
    options: &SolverOptions,
    tol: f64,
) -> Result<f64, SweepError> {
    let pattern_at = |t: f64| -> Option<String> {
        let mut eco = economy.clone();
        eco.tariffs.set_rate(importer, exporter, t);
        solve_auto(&eco, preferred, options)
            .ok()
            .map(|eq| eq.pattern.id())
    };
    let left = pattern_at(lo).ok_or(SweepError::BadGrid)?;
    let right = pattern_at(hi).ok_or(SweepError::BadGrid)?;
    if left == right {
        return Err(SweepError::BadGrid);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match pattern_at(mid) {
            Some(id) if id == left => lo = mid,
            Some(_) => hi = mid,
            None => return Err(SweepError::BadGrid),
        }
    }
    Ok(0.5 * (lo + hi))
}
