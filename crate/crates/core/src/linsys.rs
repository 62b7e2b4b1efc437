//! Small dense linear solves, in floating point and in exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the system is singular.
pub fn solve_f64(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())?;
        if a[pivot_row][col].abs() <= scale * 1e-13 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Solve `a x = b` exactly over the rationals. Returns `None` when singular.
pub fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = &a[row][col] / &pivot;
            for k in col..n {
                let v = &a[col][k] * &f;
                a[row][k] -= v;
            }
            let v = &b[col] * &f;
            b[row] -= v;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for k in col + 1..n {
            acc -= &a[col][k] * &x[k];
        }
        x[col] = acc / &a[col][col];
    }
    Some(x)
}

/// Exact rational value of a finite f64.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Round a rational to the nearest f64.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    // Scale into i128 range by binary shifting; inputs here are modest.
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let limit = BigInt::from(i128::MAX / 4);
    while num.abs() > limit || den.abs() > limit {
        num >>= 1;
        den >>= 1;
        if den.is_zero() {
            return f64::INFINITY * if x.numer().is_negative() { -1.0 } else { 1.0 };
        }
    }
    let nf: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}
