//! Piecewise-linear indirect supply and demand curves.
//!
//! Supply curves are strictly increasing in quantity; demand curves are
//! strictly decreasing and clamp to zero beyond the choke quantity, so
//! surplus integrals stay finite. Evaluation, inversion, and integration
//! are all closed-form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum absolute per-segment slope accepted as strictly monotone.
pub const MIN_SLOPE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Supply,
    Demand,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("quantity must be nonnegative, got {0}")]
    NegativeQuantity(f64),
    #[error("price must be nonnegative, got {0}")]
    NegativePrice(f64),
    #[error("integration bounds reversed or negative: [{lo}, {hi}]")]
    BadBounds { lo: f64, hi: f64 },
    #[error("invalid curve: {0}")]
    Invalid(String),
}

/// A strictly monotone piecewise-linear curve.
///
/// Stored as breakpoints `(quantity, value)` with the first breakpoint at
/// quantity zero and a terminal slope used beyond the last breakpoint.
/// A pure linear curve is the single-breakpoint special case.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    points: Vec<(f64, f64)>,
    end_slope: f64,
}

impl Curve {
    /// Linear supply `intercept + slope * q`. Slope must be positive.
    pub fn linear_supply(intercept: f64, slope: f64) -> Result<Curve, CurveError> {
        let c = Curve {
            kind: CurveKind::Supply,
            points: vec![(0.0, intercept)],
            end_slope: slope,
        };
        c.check()?;
        Ok(c)
    }

    /// Linear demand `intercept - slope * q`. Slope is given as a positive
    /// magnitude and applied with a minus sign.
    pub fn linear_demand(intercept: f64, slope: f64) -> Result<Curve, CurveError> {
        let c = Curve {
            kind: CurveKind::Demand,
            points: vec![(0.0, intercept)],
            end_slope: -slope,
        };
        c.check()?;
        Ok(c)
    }

    /// Piecewise-linear curve from explicit breakpoints. At least two points;
    /// the final segment's slope extends beyond the last breakpoint.
    pub fn piecewise(kind: CurveKind, points: Vec<(f64, f64)>) -> Result<Curve, CurveError> {
        if points.len() < 2 {
            return Err(CurveError::Invalid(
                "piecewise curve needs at least two breakpoints".into(),
            ));
        }
        let (qa, va) = points[points.len() - 2];
        let (qb, vb) = points[points.len() - 1];
        let end_slope = (vb - va) / (qb - qa);
        let c = Curve {
            kind,
            points,
            end_slope,
        };
        c.check()?;
        Ok(c)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Value at quantity zero: `s(0)` or the choke price `d(0)`.
    pub fn value_at_zero(&self) -> f64 {
        self.points[0].1
    }

    /// `Some((intercept, signed_slope))` when the curve is a single segment.
    pub fn as_linear(&self) -> Option<(f64, f64)> {
        if self.points.len() == 1 {
            Some((self.points[0].1, self.end_slope))
        } else {
            None
        }
    }

    /// Invariant check used by both constructors and economy validation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.points.is_empty() {
            out.push("curve has no breakpoints".into());
            return out;
        }
        if self.points[0].0 != 0.0 {
            out.push(format!(
                "first breakpoint quantity must be 0, got {}",
                self.points[0].0
            ));
        }
        for (q, v) in &self.points {
            if !q.is_finite() || !v.is_finite() {
                out.push(format!("non-finite breakpoint ({q}, {v})"));
            }
            if *q < 0.0 {
                out.push(format!("negative breakpoint quantity {q}"));
            }
        }
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                out.push(format!(
                    "breakpoint quantities not strictly increasing at q={}",
                    w[1].0
                ));
            }
        }
        if !self.end_slope.is_finite() {
            out.push("non-finite terminal slope".into());
        }
        let mut slopes: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.push(self.end_slope);
        match self.kind {
            CurveKind::Supply => {
                if self.points[0].1 < 0.0 {
                    out.push(format!("supply intercept must be >= 0, got {}", self.points[0].1));
                }
                for s in slopes {
                    if !(s >= MIN_SLOPE) {
                        out.push(format!("supply curve not strictly increasing (slope {s})"));
                    }
                }
            }
            CurveKind::Demand => {
                if !(self.points[0].1 > 0.0) {
                    out.push(format!(
                        "demand intercept must be positive, got {}",
                        self.points[0].1
                    ));
                }
                for s in slopes {
                    if !(s <= -MIN_SLOPE) {
                        out.push(format!("demand curve not strictly decreasing (slope {s})"));
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<(), CurveError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CurveError::Invalid(v.join("; ")))
        }
    }

    /// Index of the segment containing quantity `q` (the last breakpoint
    /// with quantity <= q).
    fn segment(&self, q: f64) -> usize {
        // partition_point returns count of points with quantity <= q
        let k = self.points.partition_point(|p| p.0 <= q);
        k.saturating_sub(1)
    }

    /// Local affine form `value(x) = a + b * x` of the segment at `q`,
    /// ignoring the demand clamp.
    pub(crate) fn affine_at(&self, q: f64) -> (f64, f64) {
        let i = self.segment(q);
        let (q0, v0) = self.points[i];
        let b = if i + 1 < self.points.len() {
            let (q1, v1) = self.points[i + 1];
            (v1 - v0) / (q1 - q0)
        } else {
            self.end_slope
        };
        (v0 - b * q0, b)
    }

    /// Raw (unclamped) value at quantity `q >= 0`.
    pub(crate) fn raw_eval(&self, q: f64) -> f64 {
        let (a, b) = self.affine_at(q);
        a + b * q
    }

    /// Evaluate the curve. Demand values clamp at zero beyond the choke
    /// quantity.
    pub fn eval(&self, q: f64) -> Result<f64, CurveError> {
        if q < 0.0 || !q.is_finite() {
            return Err(CurveError::NegativeQuantity(q));
        }
        let v = self.raw_eval(q);
        Ok(match self.kind {
            CurveKind::Supply => v,
            CurveKind::Demand => v.max(0.0),
        })
    }

    /// Quantity at which the raw curve takes value `p`. The caller handles
    /// corners; here the raw piecewise line is inverted exactly.
    fn raw_inverse(&self, p: f64) -> f64 {
        // Find the segment whose value range contains p. Values are strictly
        // monotone in q, so scan breakpoint values.
        let n = self.points.len();
        let increasing = matches!(self.kind, CurveKind::Supply);
        let mut i = n - 1;
        for k in 0..n - 1 {
            let v1 = self.points[k + 1].1;
            let inside = if increasing { p <= v1 } else { p >= v1 };
            if inside {
                i = k;
                break;
            }
        }
        let (q0, v0) = self.points[i];
        let b = if i + 1 < n {
            let (q1, v1) = self.points[i + 1];
            (v1 - v0) / (q1 - q0)
        } else {
            self.end_slope
        };
        q0 + (p - v0) / b
    }

    /// Inverse of the curve at price `p`.
    ///
    /// Supply: quantity supplied, zero when `p <= s(0)` (the zero-production
    /// corner). Demand: quantity demanded, zero when `p >= d(0)`.
    pub fn inverse(&self, p: f64) -> Result<f64, CurveError> {
        if p < 0.0 || !p.is_finite() {
            return Err(CurveError::NegativePrice(p));
        }
        let v0 = self.points[0].1;
        Ok(match self.kind {
            CurveKind::Supply => {
                if p <= v0 {
                    0.0
                } else {
                    self.raw_inverse(p)
                }
            }
            CurveKind::Demand => {
                if p >= v0 {
                    0.0
                } else {
                    self.raw_inverse(p)
                }
            }
        })
    }

    /// Local affine form `q(p) = a + b * p` of the inverse at price `p`;
    /// returns `(0.0, 0.0)` in clamped regions (supply corner, choked demand).
    pub(crate) fn inverse_affine_at(&self, p: f64) -> (f64, f64) {
        let v0 = self.points[0].1;
        let clamped = match self.kind {
            CurveKind::Supply => p <= v0,
            CurveKind::Demand => p >= v0,
        };
        if clamped {
            return (0.0, 0.0);
        }
        let q = self.raw_inverse(p);
        let (a, b) = self.affine_at(q);
        // value = a + b q  =>  q = (p - a) / b
        (-a / b, 1.0 / b)
    }

    /// Demand choke quantity (where the raw curve reaches zero).
    pub fn choke_quantity(&self) -> Result<f64, CurveError> {
        match self.kind {
            CurveKind::Demand => Ok(self.raw_inverse(0.0)),
            CurveKind::Supply => Err(CurveError::Invalid(
                "choke quantity is defined for demand curves".into(),
            )),
        }
    }

    /// Exact area under the curve between `q_lo` and `q_hi`. Demand areas
    /// use the clamped curve, so the region beyond the choke contributes
    /// nothing.
    pub fn integral(&self, q_lo: f64, q_hi: f64) -> Result<f64, CurveError> {
        if q_lo < 0.0 || q_hi < q_lo || !q_lo.is_finite() || !q_hi.is_finite() {
            return Err(CurveError::BadBounds { lo: q_lo, hi: q_hi });
        }
        if q_lo == q_hi {
            return Ok(0.0);
        }
        // Clip the demand integration range at the choke quantity.
        let (lo, hi) = match self.kind {
            CurveKind::Supply => (q_lo, q_hi),
            CurveKind::Demand => {
                let choke = self.raw_inverse(0.0);
                (q_lo.min(choke), q_hi.min(choke))
            }
        };
        if hi <= lo {
            return Ok(0.0);
        }
        let mut cuts = vec![lo];
        for &(q, _) in &self.points {
            if q > lo && q < hi {
                cuts.push(q);
            }
        }
        cuts.push(hi);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (a, b) = self.affine_at(0.5 * (x0 + x1));
            total += a * (x1 - x0) + 0.5 * b * (x1 * x1 - x0 * x0);
        }
        Ok(total)
    }
}

/// The crossing quantity of a supply and a demand curve: the unique `q`
/// with `s(q) = d(q)`, or zero when `s(0) >= d(0)`.
///
/// This is the per-link shipment cap used by the best-response map, and the
/// autarky quantity when both curves belong to the same country.
pub fn cap_quantity(supply: &Curve, demand: &Curve) -> f64 {
    assert_eq!(supply.kind, CurveKind::Supply, "first argument must be a supply curve");
    assert_eq!(demand.kind, CurveKind::Demand, "second argument must be a demand curve");
    if supply.value_at_zero() >= demand.value_at_zero() {
        return 0.0;
    }
    // g(q) = s(q) - d(q) is strictly increasing, negative at 0 and positive
    // at the demand choke quantity. Bisect, then solve the local affine
    // segment exactly.
    let mut lo = 0.0;
    let mut hi = demand.raw_inverse(0.0);
    debug_assert!(supply.raw_eval(hi) - demand.raw_eval(hi) >= 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if supply.raw_eval(mid) - demand.raw_eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let (sa, sb) = supply.affine_at(q);
    let (da, db) = demand.affine_at(q);
    let exact = (da - sa) / (sb - db);
    if exact.is_finite() && exact >= 0.0 {
        exact
    } else {
        q
    }
}
