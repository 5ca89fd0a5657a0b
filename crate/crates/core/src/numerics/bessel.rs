//! Bessel functions of the first kind `J_ν(x)` for real `ν ≥ -1/2`, `x ≥ 0`.
//!
//! Three regimes:
//!
//! * `x < 2`: ascending power series.
//! * `2 ≤ x < 25 + ν²`: Miller backward recurrence from a high order,
//!   normalized with `(x/2)^ν₀ = Σ_k (ν₀+2k) Γ(ν₀+k)/k! J_{ν₀+2k}(x)`.
//! * `x ≥ 25 + ν²`: Hankel asymptotic expansion, truncated at its smallest term.
//!
//! The regimes overlap for all orders used in the crate; the boundary tests
//! below evaluate both sides of each switch.

use std::f64::consts::PI;

use super::gamma::{gamma, ln_gamma};
use crate::error::{Error, Result};

const SERIES_MAX_X: f64 = 2.0;

fn asymptotic_threshold(nu: f64) -> f64 {
    25.0 + nu * nu
}

/// `J_ν(x)` with argument checks; never returns NaN.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !nu.is_finite() || nu < -0.5 {
        return Err(Error::invalid(
            "nu",
            format!("order must be finite and ≥ -1/2, got {nu}"),
        ));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::invalid("x", format!("argument must be finite and ≥ 0, got {x}")));
    }
    let v = j_nu(nu, x);
    if v.is_infinite() {
        return Err(Error::Overflow(format!("J_{nu}({x}) is unbounded")));
    }
    if v.is_nan() {
        return Err(Error::numeric(format!("J_{nu}({x})"), v, f64::NAN));
    }
    if v == 0.0 && x > 0.0 && nu > 0.0 {
        // only the power-series regime can underflow to an exact zero
        let log_mag = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
        if log_mag < f64::MIN_POSITIVE.ln() {
            return Err(Error::Underflow(format!(
                "J_{nu}({x}) ≈ exp({log_mag:.1}) is below the smallest normal double"
            )));
        }
    }
    Ok(v)
}

/// Unchecked `J_ν(x)` for hot loops; the caller guarantees `ν ≥ -1/2` and `x ≥ 0`.
pub(crate) fn j_nu(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x < SERIES_MAX_X {
        series(nu, x)
    } else if x < asymptotic_threshold(nu) {
        miller(nu, x)
    } else {
        hankel_asymptotic(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let lead = if nu == nu.floor() && nu <= 20.0 {
        half.powf(nu) / gamma(nu + 1.0)
    } else {
        (nu * half.ln() - ln_gamma(nu + 1.0)).exp()
    };
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let m = m as f64;
        term *= q / (m * (m + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller(nu: f64, x: f64) -> f64 {
    // ν = ν₀ + shift with ν₀ ∈ (0, 1] and shift ≥ -1
    let shift = nu.ceil() as i64 - 1;
    let nu0 = nu - shift as f64;
    let lowest = shift.min(0);

    let top_order = x.max(shift.max(0) as f64);
    let n_start = (top_order + 30.0 + 12.0 * top_order.cbrt()).ceil() as i64;

    // normalization weights (ν₀+2k) Γ(ν₀+k)/k!
    let max_k = (n_start / 2) as usize + 1;
    let mut weights = Vec::with_capacity(max_k);
    let mut c = gamma(nu0);
    for k in 0..max_k {
        if k > 0 {
            c *= (nu0 + k as f64 - 1.0) / k as f64;
        }
        weights.push((nu0 + 2.0 * k as f64) * c);
    }

    let mut f_above = 0.0;
    let mut f = 1e-30;
    let mut norm = 0.0;
    let mut target = 0.0;
    let mut j = n_start;
    loop {
        if j >= 0 && j % 2 == 0 {
            norm += weights[(j / 2) as usize] * f;
        }
        if j == shift {
            target = f;
        }
        if j == lowest {
            break;
        }
        // J_{μ-1} = (2μ/x) J_μ - J_{μ+1}
        let f_below = 2.0 * (nu0 + j as f64) / x * f - f_above;
        f_above = f;
        f = f_below;
        j -= 1;
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_above *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    target * (nu0 * (0.5 * x).ln()).exp() / norm
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        if term == 0.0 {
            break;
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // signs: P = a0 - a2 + a4 - ..., Q = a1 - a3 + ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let omega = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// McMahon approximation to the `m`-th positive zero of `J_ν` (`m ≥ 1`).
///
/// Accurate to a few parts in 10³ for the first zero and rapidly better
/// afterwards; used only to place panel boundaries.
pub fn bessel_j_zero_approx(nu: f64, m: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let beta = (m as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e)
}
