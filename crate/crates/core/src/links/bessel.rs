//! Ascending-series Bessel evaluation and the Neumann-type radial zeros that
//! give the scale-invariant Poincaré constant on a truncated cone.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Arguments above this are outside the range where the ascending series is
/// trusted; every zero the toolkit needs lies well below it.
pub const SERIES_ARG_LIMIT: f64 = 12.0;

const TERM_RATIO: f64 = 1e-16;
const SCAN_STEP: f64 = 1e-2;

/// J_order(x) by its ascending power series.
pub fn bessel_j(order: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(order) / gamma(order + 1.0);
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + order));
        sum += term;
        if term.abs() <= TERM_RATIO * sum.abs() && m > half {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum
}

/// d/dr [ r^{1 - n/2} J_order(r) ], summed termwise from the ascending series.
pub fn radial_target(n_ambient: usize, order: f64, r: f64) -> f64 {
    let shift = 1.0 - 0.5 * n_ambient as f64;
    let half = 0.5 * r;
    let q = -half * half;
    // term_m = (-1)^m (r/2)^{2m+order} / (m! Γ(m+order+1)); derivative of
    // r^{shift} term_m is (2m + order + shift) r^{shift-1} term_m.
    let mut term = half.powf(order) / gamma(order + 1.0);
    let mut sum = (order + shift) * term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + order));
        let contrib = (2.0 * m + order + shift) * term;
        sum += contrib;
        if contrib.abs() <= TERM_RATIO * sum.abs() && m > half {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum * r.powf(shift - 1.0)
}

/// Smallest r > 0 where d/dr[r^{1-n/2} J_order(r)] vanishes, searching up to
/// [`SERIES_ARG_LIMIT`].
pub fn bessel_deriv_first_zero(n_ambient: usize, order: f64) -> Result<f64> {
    bessel_deriv_first_zero_below(n_ambient, order, SERIES_ARG_LIMIT)
}

/// As [`bessel_deriv_first_zero`] with an explicit search bound.
pub fn bessel_deriv_first_zero_below(n_ambient: usize, order: f64, upper: f64) -> Result<f64> {
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::InvalidInput(format!("Bessel order must be positive, got {order}")));
    }
    if n_ambient < 2 {
        return Err(Error::InvalidInput(format!("ambient dimension must be >= 2, got {n_ambient}")));
    }
    let f = |r: f64| radial_target(n_ambient, order, r);
    let mut lo = SCAN_STEP;
    let mut f_lo = f(lo);
    while lo < upper {
        let hi = (lo + SCAN_STEP).min(upper);
        let f_hi = f(hi);
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            return Ok(bisect(f, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::BracketNotFound { lo: SCAN_STEP, hi: upper })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two radial eigenvalues and the resulting Poincaré constant of the unit
/// truncated cone over a link with first eigenvalue `lambda1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConstants {
    /// First nonzero Neumann eigenvalue of the radial operator (order n/2).
    pub a: f64,
    /// Lowest Neumann eigenvalue with the λ₁/r² potential (order ν).
    pub b: f64,
    /// Bessel order used for `b`: sqrt(λ₁ + ((n-2)/2)²).
    pub order_b: f64,
    pub c_poin: f64,
}

pub fn poincare_constant(n_ambient: usize, lambda1: f64) -> Result<PoincareConstants> {
    if !(lambda1 > 0.0) {
        return Err(Error::DisconnectedLink { lambda1 });
    }
    let half = 0.5 * (n_ambient as f64 - 2.0);
    let order_b = (lambda1 + half * half).sqrt();
    let za = bessel_deriv_first_zero(n_ambient, 0.5 * n_ambient as f64)?;
    let zb = bessel_deriv_first_zero(n_ambient, order_b)?;
    let a = za * za;
    let b = zb * zb;
    Ok(PoincareConstants {
        a,
        b,
        order_b,
        c_poin: (1.0 / a).max(1.0 / b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_series_matches_elementary_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 11.0] {
            let j_half = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - j_half).abs() < 1e-12);
            let j_3half = (2.0 / (std::f64::consts::PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x) - j_3half).abs() < 1e-12);
        }
    }

    #[test]
    fn root_is_certified_by_sign_change() {
        for &(n, order) in &[(2usize, 1.0), (3, 1.5), (2, 0.5), (4, 2.0), (5, 2.7)] {
            let r = bessel_deriv_first_zero(n, order).unwrap();
            let a = radial_target(n, order, r - 1e-10);
            let b = radial_target(n, order, r + 1e-10);
            assert!(a * b <= 0.0, "n={n} order={order}: {a} {b}");
        }
    }

    #[test]
    fn rejects_bad_inputs_and_reports_bracket() {
        assert!(bessel_deriv_first_zero(2, 0.0).is_err());
        assert!(bessel_deriv_first_zero(1, 1.0).is_err());
        assert_eq!(
            bessel_deriv_first_zero_below(2, 1.0, 1.0),
            Err(Error::BracketNotFound { lo: SCAN_STEP, hi: 1.0 })
        );
        assert!(matches!(poincare_constant(2, 0.0), Err(Error::DisconnectedLink { .. })));
    }
}
