//! `∫_0^∞ g(s) J_ν(sr) ds` by zero-aligned panels and Wynn's epsilon
//! acceleration of the partial sums.

use super::bessel::{bessel_j_zero_approx, j_nu};
use super::quadrature::{integrate, integrate_breaks, Domain, Estimate};
use super::QuadratureConfig;
use crate::error::{Error, Result};

const WINDOW: usize = 21;
const MIN_PANELS: usize = 7;
const DYADIC_LEVELS: i32 = 30;

/// Zero of `J_ν`, McMahon start refined by Newton for the first few indices.
fn bessel_zero(nu: f64, m: usize) -> f64 {
    let mut x = bessel_j_zero_approx(nu, m);
    if m <= 30 {
        for _ in 0..4 {
            let j = j_nu(nu, x);
            let dj = nu / x * j - j_nu(nu + 1.0, x);
            if dj == 0.0 {
                break;
            }
            let step = j / dj;
            if !step.is_finite() || step.abs() > 1.0 {
                break;
            }
            x -= step;
            if step.abs() < 1e-15 * x {
                break;
            }
        }
    }
    x
}

/// Value of the highest even column of Wynn's epsilon table built on `seq`.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    match n {
        0 => return 0.0,
        1 | 2 => return seq[n - 1],
        _ => {}
    }
    let mut best = seq[n - 1];
    let mut prev = vec![0.0; n + 1];
    let mut cur = seq.to_vec();
    for k in 1..n {
        let len = n - k;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                // column k-1 has converged (even) or the table broke down (odd)
                return if (k - 1) % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if k % 2 == 0 {
            let last = next[len - 1];
            if last.is_finite() {
                best = last;
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// `∫_0^∞ g(s) J_ν(sr) ds`.
pub fn integrate_bessel<F: Fn(f64) -> f64>(g: F, nu: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate_bessel_with(g, nu, r, cfg, 0.0).map(|e| e.value)
}

/// As [`integrate_bessel`], but never stops before the panels reach `min_extent`
/// (the scale on which `g` is known to be non-negligible).
pub fn integrate_bessel_with<F: Fn(f64) -> f64>(
    g: F,
    nu: f64,
    r: f64,
    cfg: &QuadratureConfig,
    min_extent: f64,
) -> Result<Estimate> {
    if !nu.is_finite() || nu < -0.5 {
        return Err(Error::invalid("nu", "order must be ≥ -1/2"));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::invalid("r", "must be finite and ≥ 0"));
    }
    if r == 0.0 {
        return if nu == 0.0 {
            integrate(&g, Domain::SemiInfinite(0.0), cfg)
        } else if nu > 0.0 {
            Ok(Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            })
        } else {
            Err(Error::Domain("J_ν(0) is unbounded for ν < 0".into()))
        };
    }

    let h = |s: f64| {
        let v = g(s);
        if v == 0.0 {
            0.0
        } else {
            v * j_nu(nu, s * r)
        }
    };

    let z1 = bessel_zero(nu, 1) / r;
    let mut breaks: Vec<f64> = (0..=DYADIC_LEVELS).rev().map(|j| z1 * 2f64.powi(-j)).collect();
    breaks.insert(0, 0.0);
    let first = integrate_breaks(h, &breaks, cfg)?;
    let mut evaluations = first.evaluations;
    let mut total = first.value;
    let mut max_abs = total.abs();
    let mut sums = vec![total];
    let mut estimates: Vec<f64> = Vec::new();
    let mut small_run = 0usize;
    let mut lo = z1;

    for m in 1..=cfg.oscillatory_blocks {
        let hi = bessel_zero(nu, m + 1) / r;
        let panel_cfg = cfg.with_abs_tol(cfg.abs_tol.max(1e-2 * cfg.rel_tol * max_abs));
        let panel = integrate(h, Domain::Finite(lo, hi), &panel_cfg)?;
        evaluations += panel.evaluations;
        total += panel.value;
        max_abs = max_abs.max(total.abs());
        sums.push(total);
        lo = hi;
        if hi < min_extent {
            continue;
        }

        let tol_for = |v: f64| {
            cfg.abs_tol
                .max(cfg.rel_tol * v.abs())
                .max(64.0 * f64::EPSILON * max_abs)
        };
        if panel.value.abs() <= tol_for(total) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(Estimate {
                    value: total,
                    error: panel.value.abs(),
                    evaluations,
                });
            }
        } else {
            small_run = 0;
        }

        if sums.len() >= MIN_PANELS {
            let start = sums.len().saturating_sub(WINDOW);
            let mut window = &sums[start..];
            if window.len() % 2 == 0 {
                window = &window[1..];
            }
            let e = wynn_epsilon(window);
            estimates.push(e);
            let k = estimates.len();
            if k >= 3 {
                let d1 = (estimates[k - 1] - estimates[k - 2]).abs();
                let d2 = (estimates[k - 2] - estimates[k - 3]).abs();
                let tol = tol_for(e);
                if d1 <= tol && d2 <= tol {
                    return Ok(Estimate {
                        value: e,
                        error: d1.max(d2),
                        evaluations,
                    });
                }
            }
        }
    }
    Err(Error::numeric(
        format!(
            "Bessel integral acceleration diverged after {} panels (ν={nu}, r={r})",
            cfg.oscillatory_blocks
        ),
        estimates.last().copied().unwrap_or(total),
        match estimates.len() {
            n if n >= 2 => (estimates[n - 1] - estimates[n - 2]).abs(),
            _ => f64::NAN,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gaussian_is_self_reciprocal() {
        let v = integrate_bessel(|s| s * (-0.5 * s * s).exp(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate_bessel(|_| 0.0, 0.0, 1.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn hankel_of_exponential() {
        let v = integrate_bessel(|s| s * (-s).exp(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 2f64.powf(-1.5)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn slowly_decaying_integrand_is_accelerated() {
        // ∫ e^{-as} J_0(rs) ds = (a² + r²)^{-1/2}
        for &(a, r) in &[(0.025, 1.0), (0.01, 3.0), (0.1, 12.0)] {
            let v = integrate_bessel(|s: f64| (-a * s).exp(), 0.0, r, &cfg()).unwrap();
            let exact = 1.0 / (a * a + r * r).sqrt();
            assert!((v - exact).abs() < 1e-8 * exact, "a={a} r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn cosine_transform_via_order_minus_half() {
        // J_{-1/2}(x) = √(2/(πx)) cos x, so ∫ √s e^{-s} J_{-1/2}(rs) ds = √(2/(πr)) /(1+r²)
        let r = 2.5;
        let v = integrate_bessel(|s: f64| s.sqrt() * (-s).exp(), -0.5, r, &cfg()).unwrap();
        let exact = (2.0 / (std::f64::consts::PI * r)).sqrt() / (1.0 + r * r);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn agrees_with_truncated_plain_quadrature() {
        let g = |s: f64| s * s * (-s * s).exp();
        for &(nu, r) in &[(0.5, 0.7), (1.0, 2.0), (1.5, 4.0)] {
            let v = integrate_bessel(g, nu, r, &cfg()).unwrap();
            let plain = integrate(|s| g(s) * j_nu(nu, s * r), Domain::Finite(0.0, 12.0), &cfg())
                .unwrap()
                .value;
            // tail beyond 12 is below 12²e^{-144}
            assert!((v - plain).abs() < 1e-10, "ν={nu} r={r}: {v} vs {plain}");
        }
    }

    #[test]
    fn small_radius_long_panels() {
        let v = integrate_bessel(|s| s * (-0.5 * s * s).exp(), 0.0, 1e-3, &cfg()).unwrap();
        assert!((v - (-0.5e-6f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn divergence_is_reported() {
        let tight = QuadratureConfig {
            oscillatory_blocks: 5,
            ..cfg()
        };
        let res = integrate_bessel(|s: f64| (-1e-4 * s).exp(), 0.0, 1.0, &tight);
        assert!(matches!(res, Err(Error::NumericFailure { .. })));
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let seq: Vec<f64> = (1..=15)
            .map(|n| {
                s += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
                s
            })
            .collect();
        let est = wynn_epsilon(&seq);
        assert!((est - std::f64::consts::LN_2).abs() < 1e-10, "{est}");
    }

    #[test]
    fn zeros_are_refined() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 2.5] {
            for m in 1..5 {
                let z = bessel_zero(nu, m);
                assert!(j_nu(nu, z).abs() < 1e-12, "ν={nu} m={m}");
            }
        }
    }
}
