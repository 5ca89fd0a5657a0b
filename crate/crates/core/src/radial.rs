//! Radial functions on `R^k`, their Fourier transforms and the dimension walk.
//!
//! For radial `u` the transform `F_k u(ξ) = (2π)^{-k} ∫ e^{-ix·ξ} u(x) dx` is
//!
//! ```text
//! F_k u(r) = (2π)^{-k/2} r^{1-k/2} ∫_0^∞ u(s) s^{k/2} J_{k/2-1}(sr) ds
//! ```
//!
//! and `F_k^{-1} u = (2π)^k F_k u`. The montée `u ↦ -(2πr)^{-1} u'` maps
//! `F_k u` to `F_{k+2} u`; the descente `u ↦ 2π ∫_r^∞ s u(s) ds` undoes it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{ErrSlot, Error, Result};
use crate::numerics::{
    bessel_j_zero_approx, five_point_derivative, integrate, integrate_bessel_with, integrate_breaks, integrate_log,
    j_nu, sphere_surface, Domain, QuadratureConfig,
};

pub type RadialFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A function of `r = |x| ≥ 0` on `R^k`, with optional cached grid values.
#[derive(Clone)]
pub struct RadialProfile {
    dim: usize,
    eval: RadialFn,
    derivative: Option<RadialFn>,
    support_hint: Option<f64>,
    accuracy: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("dim", &self.dim)
            .field("has_derivative", &self.derivative.is_some())
            .field("support_hint", &self.support_hint)
            .field("accuracy", &self.accuracy)
            .field("grid_points", &self.grid.len())
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be at least 1"));
        }
        Ok(RadialProfile {
            dim,
            eval: Arc::new(f),
            derivative: None,
            support_hint: None,
            accuracy: f64::EPSILON,
            grid: Vec::new(),
            values: Vec::new(),
        })
    }

    /// Profile from an infallible closure.
    pub fn from_fn<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialProfile::new(dim, move |r| Ok(f(r)))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Ok(RadialProfile::from_fn(dim, |_| 0.0)?
            .with_derivative(|_| Ok(0.0))
            .with_support(0.0))
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Radius beyond which the profile vanishes (or is negligible).
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support_hint = Some(radius);
        self
    }

    /// Relative accuracy of `evaluate` (the quadrature tolerance for computed profiles).
    pub fn with_accuracy(mut self, accuracy: f64) -> Self {
        self.accuracy = accuracy.max(f64::EPSILON);
        self
    }

    /// Evaluates and caches the profile on `grid` (in parallel).
    pub fn with_grid(mut self, grid: &[f64]) -> Result<Self> {
        if grid.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::invalid("grid", "abscissae must be finite and ≥ 0"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "abscissae must be strictly increasing"));
        }
        let values = grid.par_iter().map(|&r| self.evaluate(r)).collect::<Result<Vec<_>>>()?;
        self.grid = grid.to_vec();
        self.values = values;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_hint(&self) -> Option<f64> {
        self.support_hint
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid("r", format!("radius must be finite and ≥ 0, got {r}")));
        }
        if let Some(rs) = self.support_hint {
            if r >= rs {
                return Ok(0.0);
            }
        }
        let v = (self.eval)(r)?;
        if v.is_nan() {
            return Err(Error::Domain(format!("profile is NaN at r = {r:e}")));
        }
        Ok(v)
    }

    /// Analytic derivative when present.
    pub fn derivative(&self, r: f64) -> Option<Result<f64>> {
        let d = self.derivative.as_ref()?;
        if let Some(rs) = self.support_hint {
            if r >= rs {
                return Some(Ok(0.0));
            }
        }
        Some(d(r))
    }

    /// `u'(r)`, analytic if available, else a five-point difference on the even extension.
    pub fn slope(&self, r: f64) -> Result<f64> {
        if let Some(d) = self.derivative(r) {
            return d;
        }
        let h = self.fd_step(r);
        five_point_derivative(|x| self.evaluate(x.abs()), r, h)
    }

    fn fd_step(&self, r: f64) -> f64 {
        self.accuracy.max(1e-15).powf(0.2) * r.max(1.0)
    }

    /// `∫_{R^k} u(|x|) dx`.
    pub fn mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        self.shell_mass(0.0, f64::INFINITY, cfg)
    }

    /// `∫_{a ≤ |x| ≤ b} u(|x|) dx`.
    pub fn shell_mass(&self, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let b = match self.support_hint {
            Some(rs) => b.min(rs),
            None => b,
        };
        if b <= a {
            return Ok(0.0);
        }
        let slot = ErrSlot::new();
        let res = radial_integral(self.dim, |r| slot.catch(self.evaluate(r)), a, b, cfg);
        slot.finish(res)
    }

    /// Multiplies values (and derivative) by `c`.
    pub fn scaled(&self, c: f64) -> RadialProfile {
        let eval = self.eval.clone();
        let mut out = RadialProfile {
            eval: Arc::new(move |r| Ok(c * eval(r)?)),
            derivative: None,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        };
        if let Some(d) = self.derivative.clone() {
            out.derivative = Some(Arc::new(move |r| Ok(c * d(r)?)));
        }
        out
    }

    /// Same function tagged with another dimension (no rescaling).
    pub fn retagged(&self, dim: usize) -> Result<RadialProfile> {
        if dim == 0 {
            return Err(Error::invalid("dim", "dimension must be at least 1"));
        }
        Ok(RadialProfile { dim, ..self.clone() })
    }
}

/// `|S^{k-1}| ∫_a^b r^{k-1} g(r) dr`; `b` may be infinite.
pub fn radial_integral<F: Fn(f64) -> f64>(k: usize, g: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(a >= 0.0) || b.is_nan() {
        return Err(Error::invalid("shell", "need 0 ≤ a ≤ b"));
    }
    if b <= a {
        return Ok(0.0);
    }
    let power = (k - 1) as i32;
    let h = |r: f64| {
        // r^{k-1} vanishes at 0 even where the profile does not
        let w = r.powi(power);
        if w == 0.0 {
            return 0.0;
        }
        let v = g(r);
        if v == 0.0 {
            0.0
        } else {
            v * w
        }
    };
    let est = if b.is_infinite() {
        if a == 0.0 {
            integrate_log(h, cfg)?
        } else {
            integrate(h, Domain::SemiInfinite(a), cfg)?
        }
    } else if a == 0.0 && b > 1.0 {
        integrate_breaks(h, &[0.0, 1e-6 * b, 1e-3 * b, 1e-1 * b, b], cfg)?
    } else {
        integrate(h, Domain::Finite(a, b), cfg)?
    };
    Ok(sphere_surface(k) * est.value)
}

/// Where the transform of a profile should look for its mass.
#[derive(Debug, Clone, Copy, Default)]
pub struct TransformHints {
    /// The integrand vanishes beyond this radius.
    pub support: Option<f64>,
    /// Scale on which the integrand is non-negligible; oscillatory
    /// termination tests are not applied before it.
    pub min_extent: f64,
}

/// `F_k g(r)` for a radial `g` given as a plain closure.
pub fn fourier_radial_fn<F: Fn(f64) -> f64>(
    g: F,
    k: usize,
    r: f64,
    hints: TransformHints,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "dimension must be at least 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", "radius must be finite and ≥ 0"));
    }
    let half = 0.5 * k as f64;
    if r == 0.0 {
        let m = match hints.support {
            Some(rs) => radial_integral(k, &g, 0.0, rs, cfg)?,
            None => radial_integral(k, &g, 0.0, f64::INFINITY, cfg)?,
        };
        return Ok((2.0 * PI).powi(-(k as i32)) * m);
    }
    let nu = half - 1.0;
    let h = |s: f64| {
        let v = g(s);
        if v == 0.0 {
            0.0
        } else {
            v * s.powf(half)
        }
    };
    let integral = match hints.support {
        Some(rs) => {
            let mut breaks = vec![0.0];
            let mut m = 1;
            loop {
                let z = bessel_j_zero_approx(nu, m) / r;
                if z >= rs || m > 100_000 {
                    break;
                }
                breaks.push(z);
                m += 1;
            }
            breaks.push(rs);
            integrate_breaks(|s| h(s) * j_nu(nu, s * r), &breaks, cfg)?.value
        }
        None => integrate_bessel_with(h, nu, r, cfg, hints.min_extent)?.value,
    };
    Ok((2.0 * PI).powf(-half) * r.powf(1.0 - half) * integral)
}

/// `F_k u(r)` with the `(2π)^{-k}` normalization on the forward transform.
pub fn fourier_radial(u: &RadialProfile, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let slot = ErrSlot::new();
    let hints = TransformHints {
        support: u.support_hint,
        min_extent: 0.0,
    };
    let res = fourier_radial_fn(|s| slot.catch(u.evaluate(s)), u.dim, r, hints, cfg);
    slot.finish(res)
}

/// `F_k^{-1} u(r) = (2π)^k F_k u(r)`.
pub fn inverse_fourier_radial(u: &RadialProfile, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok((2.0 * PI).powi(u.dim as i32) * fourier_radial(u, r, cfg)?)
}

/// `F_k u` as a profile in the same dimension.
pub fn fourier_profile(u: &RadialProfile, cfg: &QuadratureConfig) -> RadialProfile {
    let src = u.clone();
    let cfg = *cfg;
    RadialProfile {
        dim: u.dim,
        eval: Arc::new(move |r| fourier_radial(&src, r, &cfg)),
        derivative: None,
        support_hint: None,
        accuracy: cfg.rel_tol,
        grid: Vec::new(),
        values: Vec::new(),
    }
}

/// `r ↦ -(2π r)^{-1} u'(r)`, tagged with dimension `k + 2`.
///
/// At small `r` the quotient `u'(r)/r` is taken from an even fit
/// `a + c r² + e r⁴` through `u(0), u(h), u(2h)`.
pub fn montee(u: &RadialProfile) -> RadialProfile {
    let src = u.clone();
    let eval = move |r: f64| -> Result<f64> {
        let quotient = if src.derivative.is_some() {
            if r > 0.0 {
                src.derivative(r).expect("derivative present")? / r
            } else {
                // Richardson on d(h)/h for the limit u''(0)
                let h = 1e-3;
                let d1 = src.derivative(h).expect("derivative present")? / h;
                let d2 = src.derivative(2.0 * h).expect("derivative present")? / (2.0 * h);
                (4.0 * d1 - d2) / 3.0
            }
        } else {
            let h = src.fd_step(r);
            // the even-extension fit needs a finite value at 0 and quadratic growth
            // away from it; cusps like c - c'|r| fail the 4:1 ratio test
            let fit = if r < h {
                let u0 = src.evaluate(0.0)?;
                let d1 = src.evaluate(h)? - u0;
                let d2 = src.evaluate(2.0 * h)? - u0;
                let quadratic = u0.is_finite() && (d1 == 0.0 && d2 == 0.0 || (3.0..=5.0).contains(&(d2 / d1)));
                quadratic.then_some((d1, d2))
            } else {
                None
            };
            if let Some((d1, d2)) = fit {
                let c = (16.0 * d1 - d2) / (12.0 * h * h);
                let e = (d2 - 4.0 * d1) / (12.0 * h.powi(4));
                2.0 * c + 4.0 * e * r * r
            } else if r == 0.0 {
                return Ok(f64::INFINITY);
            } else {
                // r/20 keeps the stencil inside the scale of profiles singular at 0
                five_point_derivative(|x| src.evaluate(x.abs()), r, h.min(r / 20.0))? / r
            }
        };
        Ok(-quotient / (2.0 * PI))
    };
    let accuracy = if u.derivative.is_some() {
        u.accuracy
    } else {
        (u.accuracy * 1e3).max(1e-12)
    };
    RadialProfile {
        dim: u.dim + 2,
        eval: Arc::new(eval),
        derivative: None,
        support_hint: u.support_hint,
        accuracy,
        grid: Vec::new(),
        values: Vec::new(),
    }
}

/// `r ↦ 2π ∫_r^∞ s u(s) ds`, tagged with dimension `k - 2`.
pub fn descente(u: &RadialProfile, cfg: &QuadratureConfig) -> Result<RadialProfile> {
    if u.dim < 3 {
        return Err(Error::Precondition(format!(
            "descente needs dimension ≥ 3, got {}",
            u.dim
        )));
    }
    if u.support_hint.is_none() {
        check_tail(u)?;
    }
    let src = u.clone();
    let cfg_c = *cfg;
    let eval = move |r: f64| -> Result<f64> {
        let slot = ErrSlot::new();
        let g = |s: f64| {
            let v = slot.catch(src.evaluate(s));
            if v == 0.0 {
                0.0
            } else {
                s * v
            }
        };
        let res = match src.support_hint {
            Some(rs) if r >= rs => Ok(0.0),
            Some(rs) => integrate(g, Domain::Finite(r, rs), &cfg_c).map(|e| e.value),
            None => integrate(g, Domain::SemiInfinite(r), &cfg_c).map(|e| e.value),
        };
        Ok(2.0 * PI * slot.finish(res)?)
    };
    let src_d = u.clone();
    Ok(RadialProfile {
        dim: u.dim - 2,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(move |r| Ok(-2.0 * PI * r * src_d.evaluate(r)?))),
        support_hint: u.support_hint,
        accuracy: cfg.rel_tol.max(u.accuracy),
        grid: Vec::new(),
        values: Vec::new(),
    })
}

/// Rejects profiles whose `s·u(s)` is visibly not integrable at infinity.
fn check_tail(u: &RadialProfile) -> Result<()> {
    let probes = [1e3, 1e4, 1e5];
    let vals: Vec<f64> = probes
        .iter()
        .map(|&s| u.evaluate(s).map(f64::abs))
        .collect::<Result<_>>()?;
    if vals[1] == 0.0 || vals[2] == 0.0 {
        return Ok(());
    }
    let exponent = -(vals[2] / vals[1]).log10();
    if exponent <= 2.0 && vals[2] * probes[2] * probes[2] > 1e-12 {
        return Err(Error::Domain(format!(
            "s·u(s) is not integrable at infinity (local decay exponent {exponent:.3} ≤ 2)"
        )));
    }
    Ok(())
}

/// `n` points from `lo` to `hi` in geometric progression.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::invalid("grid", "need 0 < lo < hi and at least two points"));
    }
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect())
}

/// `n` equally spaced points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(Error::invalid("grid", "need lo < hi and at least two points"));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Geometric grid on `[10^-3, 12]` with 512 points.
pub fn default_grid() -> Vec<f64> {
    geometric_grid(1e-3, 12.0, 512).expect("valid default grid")
}
