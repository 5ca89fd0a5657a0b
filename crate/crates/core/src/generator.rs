//! The generator `A_k u = -F_k^{-1}(ψ·F_k u)`, `ψ(ρ) = f(ρ²)`, on compactly
//! supported radial test functions, and the intertwining
//! `A_k u = r^{-1} d/dr A_{k-2} v` with `v(r) = ∫_0^r s u(s) ds - C`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinSpec;
use crate::convention::Convention;
use crate::error::{ErrSlot, Error, Result};
use crate::numerics::{five_point_derivative, gamma, integrate, integrate_breaks, j_nu, Domain, QuadratureConfig};
use crate::radial::RadialProfile;
use crate::report::VerificationReport;
use crate::transition::levy_density;

/// Largest frequency the outer transform integrates to.
const MAX_FREQUENCY: f64 = 1e5;

/// `amplitude·(1 - r²/R²)^m` on `[0, R)`, zero beyond; `C^{m-1}` at `r = R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialTestFunction {
    pub power: u32,
    pub radius: f64,
    pub amplitude: f64,
}

impl RadialTestFunction {
    pub fn poly_bump(power: u32, radius: f64) -> Result<Self> {
        if power < 2 {
            return Err(Error::invalid("power", "bumps need m ≥ 2 to be C¹"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", "must be positive and finite"));
        }
        Ok(RadialTestFunction {
            power,
            radius,
            amplitude: 1.0,
        })
    }

    pub fn zero() -> Self {
        RadialTestFunction {
            power: 2,
            radius: 1.0,
            amplitude: 0.0,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        RadialTestFunction {
            amplitude: self.amplitude * c,
            ..self
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    fn w(&self, r: f64) -> f64 {
        1.0 - (r / self.radius).powi(2)
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.radius || self.is_zero() {
            return 0.0;
        }
        self.amplitude * self.w(r).powi(self.power as i32)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r.abs() >= self.radius || self.is_zero() {
            return 0.0;
        }
        let m = self.power as i32;
        -2.0 * self.amplitude * m as f64 * r / (self.radius * self.radius) * self.w(r).powi(m - 1)
    }

    /// `u'' + (k-1) u'/r`, with the limit `k u''(0)` at the origin.
    pub fn laplacian(&self, k: usize, r: f64) -> f64 {
        if r.abs() >= self.radius || self.is_zero() {
            return 0.0;
        }
        let m = self.power as f64;
        let r2 = self.radius * self.radius;
        let w = self.w(r);
        self.amplitude
            * (4.0 * m * (m - 1.0) * r * r / (r2 * r2) * w.powi(self.power as i32 - 2)
                - 2.0 * m * k as f64 / r2 * w.powi(self.power as i32 - 1))
    }

    /// `(c, ν)` with `F_k u(ρ) = c (2/(Rρ))^ν J_ν(Rρ)`.
    fn fourier_parts(&self, k: usize) -> (f64, f64) {
        let half = 0.5 * k as f64;
        let m = self.power as f64;
        let pre =
            self.amplitude * (2.0 * PI).powi(-(k as i32)) * self.radius.powi(k as i32) * PI.powf(half) * gamma(m + 1.0);
        (pre, half + m)
    }

    /// `F_k u(ρ) = (2π)^{-k} R^k π^{k/2} Γ(m+1) (2/(Rρ))^{k/2+m} J_{k/2+m}(Rρ)`.
    pub fn fourier(&self, k: usize, rho: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (pre, nu) = self.fourier_parts(k);
        let x = self.radius * rho;
        if x < 1e-4 {
            // (2/x)^ν J_ν(x) → 1/Γ(ν+1) - (x/2)²/Γ(ν+2)
            return pre * (1.0 / gamma(nu + 1.0) - 0.25 * x * x / gamma(nu + 2.0));
        }
        pre * (2.0 / x).powf(nu) * j_nu(nu, x)
    }

    /// Upper envelope of `|F_k u(ρ)|` for large `Rρ`.
    fn fourier_envelope(&self, k: usize, rho: f64) -> f64 {
        let half = 0.5 * k as f64;
        let m = self.power as f64;
        let x = self.radius * rho;
        (self.amplitude
            * (2.0 * PI).powi(-(k as i32))
            * self.radius.powi(k as i32)
            * PI.powf(half)
            * gamma(m + 1.0)
            * (2.0 / x).powf(half + m)
            * (2.0 / (PI * x)).sqrt())
        .abs()
    }

    /// `∫_0^r s u(s) ds - ∫_0^∞ s u(s) ds`, again a bump of power `m+1`.
    pub fn primitive(&self) -> RadialTestFunction {
        let m = self.power as f64;
        RadialTestFunction {
            power: self.power + 1,
            radius: self.radius,
            amplitude: -self.amplitude * self.radius * self.radius / (2.0 * (m + 1.0)),
        }
    }

    /// `∫_0^∞ s u(s) ds`.
    pub fn first_moment(&self) -> f64 {
        self.amplitude * self.radius * self.radius / (2.0 * (self.power as f64 + 1.0))
    }

    pub fn to_profile(&self, k: usize) -> Result<RadialProfile> {
        let (a, b) = (*self, *self);
        Ok(RadialProfile::from_fn(k, move |r| a.evaluate(r))?
            .with_derivative(move |r| Ok(b.derivative(r)))
            .with_support(self.radius))
    }
}

/// `v(r) = ∫_0^r s u(s) ds - C` as a profile in dimension `k - 2` (tagged
/// `k`; callers retag), with derivative `r u(r)`.
pub fn primitive_profile(u: &RadialTestFunction, k: usize) -> Result<RadialProfile> {
    let v = u.primitive();
    let src = *u;
    Ok(RadialProfile::from_fn(k, move |r| v.evaluate(r))?
        .with_derivative(move |r| Ok(r * src.evaluate(r)))
        .with_support(u.radius))
}

/// `A_k u(r) = -(2π)^k F_k(ψ·F_k u)(r)`.
pub fn apply_generator(
    spec: &BernsteinSpec,
    k: usize,
    u: &RadialTestFunction,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "dimension must be at least 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", format!("radius must be finite and ≥ 0, got {r}")));
    }
    if u.is_zero() {
        return Ok(0.0);
    }
    let half = 0.5 * k as f64;
    let nu = half - 1.0;
    let psi = |rho: f64| spec.eval_f(rho * rho);
    let big_r = u.radius;

    if r == 0.0 {
        // single frequency R: zero-aligned panels of J_ν(Rρ) with acceleration
        let (pre, nu_u) = u.fourier_parts(k);
        let slot = ErrSlot::new();
        let g = |rho: f64| {
            if rho == 0.0 {
                return 0.0;
            }
            slot.catch(psi(rho)) * pre * (2.0 / (big_r * rho)).powf(nu_u) * rho.powi(k as i32 - 1)
        };
        let est = crate::numerics::integrate_bessel_with(g, nu_u, big_r, cfg, 4.0 / big_r);
        let value = crate::numerics::sphere_surface(k) * slot.finish(est)?.value;
        return Ok(-value);
    }

    // The integrand oscillates at frequencies R ± r with a smooth envelope.
    // It is damped by the smooth window exp(-(ρ/P)^8); integrating the
    // oscillation against a smooth window leaves an error of order
    // E(P)·(8/(ωP))^n, so P only needs to put the envelope in the tail
    // and make ωP large.
    let envelope = |rho: f64| -> Result<f64> {
        let bessel_env = (2.0 / (PI * r * rho)).sqrt();
        Ok(psi(rho)?.abs() * u.fourier_envelope(k, rho) * rho.powf(half) * bessel_env)
    };
    let scale = {
        let rho0 = 1.0 / big_r;
        (psi(rho0)?.abs() * u.fourier(k, rho0).abs() * rho0.powi(k as i32)).max(f64::MIN_POSITIVE)
    };
    let omega = (big_r - r).abs().min(big_r + r);
    if omega < 1e-3 * big_r {
        return Err(Error::Precondition(format!(
            "generator at r = {r} too close to the support radius {big_r}"
        )));
    }
    let mut p = (16.0 / big_r).max(200.0 / omega);
    loop {
        let e = envelope(p)?;
        let e2 = envelope(2.0 * p)?;
        let decay = if e > 0.0 && e2 > 0.0 {
            (e / e2).log2()
        } else {
            f64::INFINITY
        };
        if !(decay > 1.0) {
            return Err(Error::Precondition(format!(
                "generator tail probe: ψ·F_k u decays like ρ^-{decay:.2}, not integrable"
            )));
        }
        if e / omega <= 1e-3 * scale {
            break;
        }
        if p >= MAX_FREQUENCY {
            return Err(Error::Precondition(format!(
                "generator tail probe: envelope {e:e} at ρ = {MAX_FREQUENCY:e} is not in the tail"
            )));
        }
        p *= 2.0;
    }

    let slot = ErrSlot::new();
    let g = |rho: f64| {
        if rho == 0.0 {
            return 0.0;
        }
        let window = (-(rho / p).powi(8)).exp();
        if window == 0.0 {
            return 0.0;
        }
        window * slot.catch(psi(rho)) * u.fourier(k, rho) * rho.powf(half) * j_nu(nu, r * rho)
    };
    let breaks = panel_breaks(2.5 * p, PI / (big_r + r));
    let est = integrate_breaks(g, &breaks, cfg);
    let value = (2.0 * PI).powf(half) * r.powf(1.0 - half) * slot.finish(est)?.value;
    Ok(-value)
}

fn panel_breaks(p: f64, spacing: f64) -> Vec<f64> {
    let n = (p / spacing).ceil() as usize;
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
    v.push(p);
    v
}

fn sorted_breaks(points: &[f64]) -> Vec<f64> {
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// Radial Laplacian `u'' + (k-1)u'/r` by five-point differences of `u`.
pub fn radial_laplacian_fd(u: &RadialTestFunction, k: usize, r: f64) -> Result<f64> {
    let h = 1e-3 * u.radius;
    let f = |x: f64| u.evaluate(x.abs());
    let d2 = (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r) + 16.0 * f(r - h) - f(r - 2.0 * h)) / (12.0 * h * h);
    if r == 0.0 {
        return Ok(k as f64 * d2);
    }
    let d1 = five_point_derivative(|x| Ok(f(x)), r, h)?;
    Ok(d2 + (k as f64 - 1.0) * d1 / r)
}

/// One-dimensional generator through the Lévy density:
/// `α u'' + ∫_0^∞ (u(r+y) + u(r-y) - 2u(r)) m_1(y) dy`.
pub fn levy_generator_1d(spec: &BernsteinSpec, u: &RadialTestFunction, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let m1 = |y: f64| levy_density(spec, 1, y, Convention::Default, cfg);
    let second = |y: f64| u.evaluate(r + y) + u.evaluate(r - y) - 2.0 * u.evaluate(r);
    let reach = u.radius + r;
    let slot = ErrSlot::new();
    let inner = integrate_breaks(
        |y| {
            if y == 0.0 {
                return 0.0;
            }
            let d = second(y);
            if d == 0.0 {
                0.0
            } else {
                d * slot.catch(m1(y))
            }
        },
        &sorted_breaks(&[
            0.0,
            1e-3 * reach,
            1e-2 * reach,
            0.1 * reach,
            (u.radius - r).abs(),
            reach,
        ]),
        cfg,
    );
    let inner = slot.finish(inner)?.value;
    let ur = u.evaluate(r);
    let tail = if ur == 0.0 {
        0.0
    } else {
        let slot = ErrSlot::new();
        let t = integrate(|y| slot.catch(m1(y)), Domain::SemiInfinite(reach), cfg);
        -2.0 * ur * slot.finish(t)?.value
    };
    let drift = spec.drift() * radial_laplacian_fd(u, 1, r)?;
    Ok(drift + inner + tail)
}

/// `(1/π) ∫_0^∞ (u(x+y) + u(x-y) - 2u(x)) / y² dy`, the generator of the
/// one-dimensional process with `f(u) = √u`.
pub fn cauchy_generator_pv(u: &RadialTestFunction, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let reach = u.radius + x.abs();
    let ux = u.evaluate(x);
    let g = |y: f64| {
        if y < 1e-4 * reach {
            // second difference over y² tends to u''(x)
            let h = 1e-4 * reach;
            (u.evaluate(x + h) + u.evaluate(x - h) - 2.0 * ux) / (h * h)
        } else {
            (u.evaluate(x + y) + u.evaluate(x - y) - 2.0 * ux) / (y * y)
        }
    };
    let pts = sorted_breaks(&[0.0, (u.radius - x.abs()).abs(), reach]);
    let inner = integrate_breaks(g, &pts, cfg)?.value;
    Ok((inner - 2.0 * ux / reach) / PI)
}

/// Peak-relative discrepancy of `A_k u` against `r^{-1} d/dr A_{k-2} v` on
/// `grid`; tolerance `1e-3`.
pub fn intertwine_check(
    spec: &BernsteinSpec,
    k: usize,
    u: &RadialTestFunction,
    grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<VerificationReport> {
    if k < 3 {
        return Err(Error::Precondition(format!("intertwining needs k ≥ 3, got {k}")));
    }
    if grid.is_empty() || grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid("grid", "points must be positive and finite"));
    }
    let v = u.primitive();
    let spacing = grid
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    let h = 0.02f64.min(0.25 * spacing).min(0.25 * grid[0]);
    let rows = grid
        .par_iter()
        .map(|&r| {
            let lhs = apply_generator(spec, k, u, r, cfg)?;
            let d = five_point_derivative(|x| apply_generator(spec, k - 2, &v, x, cfg), r, h)?;
            Ok((lhs, d / r))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let peak = rows.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for (&r, &(a, b)) in grid.iter().zip(&rows) {
        let e = if peak > 0.0 {
            (a - b).abs() / peak
        } else {
            (a - b).abs()
        };
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if e >= worst {
            worst = e;
            worst_at = Some(r);
        }
    }
    Ok(VerificationReport::new("intertwining", spec.label(), worst, 1e-3)
        .with_k(k)
        .with_grid(grid)
        .with_worst_at(worst_at)
        .with_detail("bump_power", u.power)
        .with_detail("bump_radius", u.radius)
        .with_detail("peak", peak)
        .with_detail("step", h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;
    use crate::radial::{fourier_radial, linear_grid};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn bump_transform_matches_quadrature() {
        let u = RadialTestFunction::poly_bump(3, 2.0).unwrap();
        for k in [1, 3, 5] {
            let prof = u.to_profile(k).unwrap();
            for &rho in &[0.0, 0.3, 1.7, 6.0] {
                let q = fourier_radial(&prof, rho, &cfg()).unwrap();
                let c = u.fourier(k, rho);
                assert!((q - c).abs() < 1e-10 * u.fourier(k, 0.0), "k={k} ρ={rho}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn primitive_examples() {
        let u = RadialTestFunction::poly_bump(2, 1.0).unwrap();
        assert!((u.first_moment() - 1.0 / 6.0).abs() < 1e-15);
        let v = primitive_profile(&u, 3).unwrap();
        assert_eq!(v.evaluate(1.0).unwrap(), 0.0);
        // ∫_0^r s(1-s²)² ds - 1/6 = -(1-r²)³/6
        let r: f64 = 0.5f64.sqrt();
        assert!((v.evaluate(r).unwrap() + 0.5f64.powi(3) / 6.0).abs() < 1e-15);
        let z = primitive_profile(&RadialTestFunction::zero(), 3).unwrap();
        assert_eq!(z.evaluate(0.3).unwrap(), 0.0);
    }

    #[test]
    fn drift_generator_is_laplacian() {
        let spec = lookup("drift").unwrap();
        let u = RadialTestFunction::poly_bump(4, 3.0).unwrap();
        for k in [1, 3] {
            for &r in &[0.0, 0.5, 1.5, 2.5] {
                let a = apply_generator(&spec, k, &u, r, &cfg()).unwrap();
                let l = u.laplacian(k, r);
                let fd = radial_laplacian_fd(&u, k, r).unwrap();
                assert!((a - l).abs() < 1e-7, "k={k} r={r}: {a} vs {l}");
                assert!((fd - l).abs() < 1e-7);
            }
        }
        assert_eq!(
            apply_generator(&spec, 3, &RadialTestFunction::zero(), 1.0, &cfg()).unwrap(),
            0.0
        );
    }

    #[test]
    fn cauchy_generator_matches_principal_value() {
        let spec = lookup("stable12").unwrap();
        let u = RadialTestFunction::poly_bump(4, 3.0).unwrap();
        for &r in &[0.2, 1.0, 2.5, 4.0] {
            let a = apply_generator(&spec, 1, &u, r, &cfg()).unwrap();
            let pv = cauchy_generator_pv(&u, r, &cfg()).unwrap();
            let lv = levy_generator_1d(&spec, &u, r, &QuadratureConfig::default().with_rel_tol(1e-8)).unwrap();
            assert!((a - pv).abs() < 1e-6, "r={r}: {a} vs {pv}");
            assert!((a - lv).abs() < 1e-5, "r={r}: {a} vs {lv}");
        }
    }

    #[test]
    fn cp_generator_matches_levy_form() {
        let spec = lookup("cp").unwrap();
        let u = RadialTestFunction::poly_bump(3, 2.0).unwrap();
        for &r in &[0.0, 0.7, 1.9] {
            let a = apply_generator(&spec, 1, &u, r, &cfg()).unwrap();
            let lv = levy_generator_1d(&spec, &u, r, &cfg()).unwrap();
            assert!((a - lv).abs() < 1e-6, "r={r}: {a} vs {lv}");
        }
    }

    #[test]
    fn intertwining() {
        let grid = linear_grid(0.2, 2.5, 8).unwrap();
        for name in ["drift", "stable12"] {
            let spec = lookup(name).unwrap();
            for u in [
                RadialTestFunction::poly_bump(4, 3.0).unwrap(),
                RadialTestFunction::poly_bump(3, 2.75).unwrap(),
            ] {
                let r = intertwine_check(&spec, 3, &u, &grid, &cfg()).unwrap();
                assert!(r.pass, "{name}: {r:?}");
            }
        }
        let spec = lookup("drift").unwrap();
        let z = intertwine_check(&spec, 3, &RadialTestFunction::zero(), &grid, &cfg()).unwrap();
        assert!(z.pass && z.max_error == 0.0);
        assert!(matches!(
            intertwine_check(&spec, 2, &RadialTestFunction::zero(), &grid, &cfg()),
            Err(Error::Precondition(_))
        ));
    }
}
