//! Shared helpers for the integration suites: random economy generation
//! and an independent quadrature oracle for the surplus integrals.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tariffnet::{Country, Curve, Economy, TariffMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random linear economy with `n` countries and off-diagonal tariffs drawn
/// uniformly from `[tariff_lo, tariff_hi]`.
pub fn random_linear_economy(
    rng: &mut ChaCha8Rng,
    n: usize,
    tariff_lo: f64,
    tariff_hi: f64,
) -> Economy {
    let mut countries = Vec::with_capacity(n);
    for k in 0..n {
        let supply_intercept = rng.gen_range(0.5..6.0);
        let supply_slope = rng.gen_range(0.3..2.0);
        let demand_intercept = rng.gen_range(3.0..10.0);
        let demand_slope = rng.gen_range(0.3..2.0);
        countries.push(Country {
            id: format!("C{k}"),
            name: format!("Country {k}"),
            supply: Curve::linear_supply(supply_intercept, supply_slope).unwrap(),
            demand: Curve::linear_demand(demand_intercept, demand_slope).unwrap(),
        });
    }
    let mut tariffs = TariffMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                tariffs.set_rate(i, j, rng.gen_range(tariff_lo..=tariff_hi));
            }
        }
    }
    Economy::new(countries, tariffs)
}

/// Random piecewise-linear curve with 2 to 5 breakpoints.
pub fn random_pwl_curve(rng: &mut ChaCha8Rng, kind: tariffnet::CurveKind) -> Curve {
    let segments = rng.gen_range(1..=4usize);
    let mut q = 0.0;
    let mut v = match kind {
        tariffnet::CurveKind::Supply => rng.gen_range(0.2..4.0),
        tariffnet::CurveKind::Demand => rng.gen_range(4.0..12.0),
    };
    let mut points = vec![(q, v)];
    for _ in 0..segments {
        q += rng.gen_range(0.3..2.5);
        let slope = rng.gen_range(0.1..1.8);
        match kind {
            tariffnet::CurveKind::Supply => v += slope * rng.gen_range(0.3..2.5f64),
            tariffnet::CurveKind::Demand => v -= slope * rng.gen_range(0.1..0.8f64),
        }
        points.push((q, v));
    }
    Curve::piecewise(kind, points).unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, left, tol / 2.0, depth - 1) + adaptive(f, m, b, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature, the independent check on every closed-form
/// integral in the crate.
pub fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adaptive(f, a, b, simpson(f, a, b), 1e-12 * (1.0 + (b - a).abs()), 48)
}
