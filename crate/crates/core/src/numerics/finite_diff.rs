//! Central finite differences and their roundoff/truncation floor.

use crate::error::{Error, Result};

/// Constant `C` in the noise floor `C·(ε·M/hⁿ + h²)`.
pub const FD_NOISE_C: f64 = 10.0;

pub const MAX_ORDER: usize = 8;

/// Offsets (in units of `h`) and weights of the order-`n` central stencil
/// `Σ_j (-1)^j C(n,j) f(x + (n/2 - j)h) / hⁿ`.
pub fn central_weights(n: usize) -> Vec<(f64, f64)> {
    let mut binom = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            binom = binom * (n + 1 - j) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.push((0.5 * n as f64 - j as f64, sign * binom));
    }
    out
}

fn check_args(x: f64, n: usize, h: f64) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::invalid(
            "n",
            format!("order must be in 1..={MAX_ORDER}, got {n}"),
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid("h", "step must be positive and finite"));
    }
    if !x.is_finite() {
        return Err(Error::invalid("x", "must be finite"));
    }
    Ok(())
}

/// Order-`n` central difference of `f` at `x`.
pub fn finite_diff<F: Fn(f64) -> f64>(f: F, x: f64, n: usize, h: f64) -> Result<f64> {
    finite_diff_with_scale(|y| Ok(f(y)), x, n, h).map(|(v, _)| v)
}

/// Order-`n` central difference together with the stencil magnitude
/// `M = Σ|w_j f_j|`, which sets the roundoff part of [`noise_floor`].
pub fn finite_diff_with_scale<F: Fn(f64) -> Result<f64>>(f: F, x: f64, n: usize, h: f64) -> Result<(f64, f64)> {
    check_args(x, n, h)?;
    let mut acc = 0.0;
    let mut mag = 0.0;
    for (offset, w) in central_weights(n) {
        let y = x + offset * h;
        let fy = f(y)?;
        if !fy.is_finite() {
            return Err(Error::Domain(format!(
                "function is not finite at {y:e} (stencil of order {n} around {x:e})"
            )));
        }
        acc += w * fy;
        mag += (w * fy).abs();
    }
    Ok((acc / h.powi(n as i32), mag))
}

/// `C·(ε·M/hⁿ + h²)`; with `M = 1` this is the unscaled floor `C·ε/hⁿ + C·h²`.
pub fn noise_floor(n: usize, h: f64, magnitude: f64) -> f64 {
    FD_NOISE_C * (f64::EPSILON * magnitude / h.powi(n as i32) + h * h)
}

/// Step that balances roundoff against truncation for an order-`n` stencil at `x`.
pub(crate) fn default_step(x: f64, n: usize) -> f64 {
    2.0 * x.abs().max(1e-3) * f64::EPSILON.powf(1.0 / (n as f64 + 2.0))
}

/// Fourth-order five-point first derivative.
pub fn five_point_derivative<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    check_args(x, 1, h)?;
    let fp2 = f(x + 2.0 * h)?;
    let fp1 = f(x + h)?;
    let fm1 = f(x - h)?;
    let fm2 = f(x - 2.0 * h)?;
    let d = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    if !d.is_finite() {
        return Err(Error::Domain(format!("five-point stencil around {x:e} is not finite")));
    }
    Ok(d)
}
