//! Bernstein functions `f(u) = αu + ∫(1 − e^{-uy}) μ(dy)` from a closed
//! catalog of Lévy measures, sign-pattern checks and the Hartman–Wintner test.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{finite_diff_with_scale, gamma, integrate_log, noise_floor, QuadratureConfig};
use crate::report::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Lévy measure `μ` of the subordinator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LevyMeasure {
    /// `μ(dy) = A y^{-1-a} dy` with `A = a·scale/Γ(1-a)`, so `f(u) = scale·u^a`.
    StableJump {
        index: f64,
        scale: f64,
    },
    /// `μ(dy) = shape·y^{-1} e^{-rate·y} dy`, so `f(u) = shape·log(1 + u/rate)`.
    GammaJump {
        shape: f64,
        rate: f64,
    },
    /// `μ(dy) = (2π)^{-1/2} y^{-3/2} e^{-b²y/2} dy`, so `f(u) = √(2u + b²) − b`.
    InverseGaussianJump {
        barrier: f64,
    },
    /// `μ(dy) = λβ e^{-βy} dy`, so `f(u) = λu/(u + β)`.
    #[serde(rename = "exponential_cp")]
    ExponentialCp {
        intensity: f64,
        jump_rate: f64,
    },
    /// `μ = Σ w_i δ_{y_i}`.
    FiniteAtomic {
        atoms: Vec<Atom>,
    },
    Null,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl LevyMeasure {
    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasure::StableJump { index, scale } => {
                if !(index.is_finite() && *index > 0.0 && *index < 1.0) {
                    return Err(Error::invalid("index", format!("must lie in (0, 1), got {index}")));
                }
                positive("scale", *scale)
            }
            LevyMeasure::GammaJump { shape, rate } => {
                positive("shape", *shape)?;
                positive("rate", *rate)
            }
            LevyMeasure::InverseGaussianJump { barrier } => {
                if barrier.is_finite() && *barrier >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "barrier",
                        format!("must be ≥ 0 and finite, got {barrier}"),
                    ))
                }
            }
            LevyMeasure::ExponentialCp { intensity, jump_rate } => {
                positive("intensity", *intensity)?;
                positive("jump_rate", *jump_rate)
            }
            LevyMeasure::FiniteAtomic { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::invalid("atoms", "need at least one atom (use `null` for none)"));
                }
                for a in atoms {
                    positive("atoms.location", a.location)?;
                    positive("atoms.weight", a.weight)?;
                }
                Ok(())
            }
            LevyMeasure::Null => Ok(()),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            LevyMeasure::StableJump { .. } => "stable_jump",
            LevyMeasure::GammaJump { .. } => "gamma_jump",
            LevyMeasure::InverseGaussianJump { .. } => "inverse_gaussian_jump",
            LevyMeasure::ExponentialCp { .. } => "exponential_cp",
            LevyMeasure::FiniteAtomic { .. } => "finite_atomic",
            LevyMeasure::Null => "null",
        }
    }

    /// Density of `μ` at `y > 0`; `None` for the atomic family.
    pub fn density(&self, y: f64) -> Option<f64> {
        if !(y > 0.0) {
            return Some(0.0);
        }
        match *self {
            LevyMeasure::StableJump { index, scale } => Some(index * scale / gamma(1.0 - index) * y.powf(-1.0 - index)),
            LevyMeasure::GammaJump { shape, rate } => Some(shape / y * (-rate * y).exp()),
            LevyMeasure::InverseGaussianJump { barrier } => {
                Some((2.0 * std::f64::consts::PI).powf(-0.5) * y.powf(-1.5) * (-0.5 * barrier * barrier * y).exp())
            }
            LevyMeasure::ExponentialCp { intensity, jump_rate } => Some(intensity * jump_rate * (-jump_rate * y).exp()),
            LevyMeasure::FiniteAtomic { .. } => None,
            LevyMeasure::Null => Some(0.0),
        }
    }

    /// `y·μ(dy)/dy`, finite down to `y → 0` for every family.
    pub fn y_density(&self, y: f64) -> Option<f64> {
        if !(y > 0.0) {
            return Some(0.0);
        }
        match *self {
            LevyMeasure::StableJump { index, scale } => Some(index * scale / gamma(1.0 - index) * y.powf(-index)),
            LevyMeasure::GammaJump { shape, rate } => Some(shape * (-rate * y).exp()),
            LevyMeasure::InverseGaussianJump { barrier } => {
                Some((2.0 * std::f64::consts::PI).powf(-0.5) * y.powf(-0.5) * (-0.5 * barrier * barrier * y).exp())
            }
            _ => self.density(y).map(|d| d * y),
        }
    }

    /// `μ((0, ∞))`, infinite for the infinite-activity families.
    pub fn total_mass(&self) -> f64 {
        match self {
            LevyMeasure::StableJump { .. }
            | LevyMeasure::GammaJump { .. }
            | LevyMeasure::InverseGaussianJump { .. } => f64::INFINITY,
            LevyMeasure::ExponentialCp { intensity, .. } => *intensity,
            LevyMeasure::FiniteAtomic { atoms } => atoms.iter().map(|a| a.weight).sum(),
            LevyMeasure::Null => 0.0,
        }
    }

    /// Closed form of `∫(1 − e^{-uy}) μ(dy)`.
    pub fn jump_exponent(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        match self {
            LevyMeasure::StableJump { index, scale } => scale * u.powf(*index),
            LevyMeasure::GammaJump { shape, rate } => shape * (u / rate).ln_1p(),
            LevyMeasure::InverseGaussianJump { barrier } => {
                let b = *barrier;
                2.0 * u / ((2.0 * u + b * b).sqrt() + b)
            }
            LevyMeasure::ExponentialCp { intensity, jump_rate } => {
                if u.is_infinite() {
                    *intensity
                } else {
                    intensity * u / (u + jump_rate)
                }
            }
            LevyMeasure::FiniteAtomic { atoms } => atoms.iter().map(|a| -a.weight * (-u * a.location).exp_m1()).sum(),
            LevyMeasure::Null => 0.0,
        }
    }

    fn validity(&self) -> &'static str {
        match self {
            LevyMeasure::StableJump { .. } => "f(u) = scale·u^index for all u ≥ 0",
            LevyMeasure::GammaJump { .. } => "f(u) = shape·log(1 + u/rate) for all u ≥ 0",
            LevyMeasure::InverseGaussianJump { .. } => "f(u) = √(2u + b²) − b for all u ≥ 0",
            LevyMeasure::ExponentialCp { .. } => "f(u) = λu/(u + β) for all u ≥ 0",
            LevyMeasure::FiniteAtomic { .. } => "f(u) = Σ w_i (1 − e^{-u y_i}) for all u ≥ 0",
            LevyMeasure::Null => "f(u) = αu for all u ≥ 0",
        }
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    #[serde(default)]
    drift: f64,
    levy_measure: LevyMeasure,
    #[serde(default = "yes")]
    closed_form: bool,
}

fn yes() -> bool {
    true
}

/// A Bernstein function: drift plus a catalog Lévy measure.
///
/// JSON form: `{"drift": 0.0, "levy_measure": {"family": "gamma_jump", "shape": 1, "rate": 1}}`,
/// with an optional `"closed_form": false` forcing quadrature evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct BernsteinSpec {
    drift: f64,
    levy_measure: LevyMeasure,
    closed_form: bool,
}

impl TryFrom<SpecRepr> for BernsteinSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        BernsteinSpec::new(r.drift, r.levy_measure).map(|s| s.with_closed_form(r.closed_form))
    }
}

impl From<BernsteinSpec> for SpecRepr {
    fn from(s: BernsteinSpec) -> Self {
        SpecRepr {
            drift: s.drift,
            levy_measure: s.levy_measure,
            closed_form: s.closed_form,
        }
    }
}

impl fmt::Display for BernsteinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "drift={} ", self.drift)?;
        match &self.levy_measure {
            LevyMeasure::StableJump { index, scale } => write!(f, "stable_jump(index={index}, scale={scale})"),
            LevyMeasure::GammaJump { shape, rate } => write!(f, "gamma_jump(shape={shape}, rate={rate})"),
            LevyMeasure::InverseGaussianJump { barrier } => write!(f, "inverse_gaussian_jump(barrier={barrier})"),
            LevyMeasure::ExponentialCp { intensity, jump_rate } => {
                write!(f, "exponential_cp(intensity={intensity}, jump_rate={jump_rate})")
            }
            LevyMeasure::FiniteAtomic { atoms } => write!(f, "finite_atomic({} atoms)", atoms.len()),
            LevyMeasure::Null => write!(f, "null"),
        }
    }
}

impl BernsteinSpec {
    pub fn new(drift: f64, levy_measure: LevyMeasure) -> Result<Self> {
        if !(drift.is_finite() && drift >= 0.0) {
            return Err(Error::invalid("drift", format!("must be ≥ 0 and finite, got {drift}")));
        }
        levy_measure.validate()?;
        Ok(BernsteinSpec {
            drift,
            levy_measure,
            closed_form: true,
        })
    }

    /// `f(u) = u`.
    pub fn pure_drift(drift: f64) -> Result<Self> {
        BernsteinSpec::new(drift, LevyMeasure::Null)
    }

    pub fn with_closed_form(mut self, on: bool) -> Self {
        self.closed_form = on;
        self
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn levy_measure(&self) -> &LevyMeasure {
        &self.levy_measure
    }

    pub fn uses_closed_form(&self) -> bool {
        self.closed_form
    }

    /// Range over which the closed form is exact.
    pub fn closed_form_validity(&self) -> &'static str {
        self.levy_measure.validity()
    }

    pub fn is_drift_only(&self) -> bool {
        matches!(self.levy_measure, LevyMeasure::Null)
    }

    /// `c` with `P(S_t = 0) = e^{-ct}`: `μ`'s mass when driftless and finite, else `∞`.
    pub fn atom_rate(&self) -> f64 {
        if self.drift > 0.0 {
            f64::INFINITY
        } else {
            self.levy_measure.total_mass()
        }
    }

    /// `f(u)`, from the closed form unless disabled.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        if self.closed_form {
            Ok(self.eval_f_closed(u))
        } else {
            self.eval_f_quadrature(u, &QuadratureConfig::default())
        }
    }

    pub fn eval_f_closed(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let drift = if self.drift > 0.0 { self.drift * u } else { 0.0 };
        drift + self.levy_measure.jump_exponent(u)
    }

    /// `f(u)` by quadrature of the Lévy measure (sums for the atomic family).
    pub fn eval_f_quadrature(&self, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
        check_u(u)?;
        if u == 0.0 {
            return Ok(0.0);
        }
        let drift = self.drift * u;
        let jumps = match &self.levy_measure {
            LevyMeasure::Null => 0.0,
            LevyMeasure::FiniteAtomic { atoms } => atoms.iter().map(|a| -a.weight * (-u * a.location).exp_m1()).sum(),
            m => {
                let est = integrate_log(
                    |y| {
                        let yd = m.y_density(y).unwrap_or(0.0);
                        if yd == 0.0 {
                            0.0
                        } else {
                            -(-u * y).exp_m1() / y * yd
                        }
                    },
                    cfg,
                )?;
                est.value
            }
        };
        Ok(drift + jumps)
    }

    /// Short machine-friendly description.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

fn check_u(u: f64) -> Result<()> {
    if u >= 0.0 && !u.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid("u", format!("must be ≥ 0, got {u}")))
    }
}

#[derive(Clone, Copy)]
enum Pattern {
    /// `(-1)^{n-1} f^{(n)} ≥ 0`, `n ≥ 1`.
    Bernstein,
    /// `(-1)^n g^{(n)} ≥ 0`, `n ≥ 0`.
    CompletelyMonotone,
}

fn validate_grid(grid: &[f64], n_max: usize) -> Result<()> {
    if n_max == 0 || n_max > crate::numerics::finite_diff::MAX_ORDER {
        return Err(Error::invalid("n_max", "must be in 1..=8"));
    }
    if grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid("grid", "points must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "points must be strictly increasing"));
    }
    if grid.len() < n_max + 1 {
        return Err(Error::Config(format!(
            "grid of {} points is too coarse for derivatives up to order {n_max}",
            grid.len()
        )));
    }
    Ok(())
}

fn sign_pattern<F: Fn(f64) -> Result<f64>>(
    check: &str,
    name: &str,
    g: F,
    grid: &[f64],
    n_max: usize,
    pattern: Pattern,
    accuracy: f64,
) -> Result<VerificationReport> {
    let eps = accuracy.max(f64::EPSILON);
    validate_grid(grid, n_max)?;
    let orders: Vec<usize> = match pattern {
        Pattern::Bernstein => (1..=n_max).collect(),
        Pattern::CompletelyMonotone => (0..=n_max).collect(),
    };
    let mut worst = 0.0f64;
    let mut worst_at = None;
    let mut first_failure: Option<(usize, f64)> = None;
    for &n in &orders {
        let sign = match pattern {
            Pattern::Bernstein if n % 2 == 1 => 1.0,
            Pattern::Bernstein => -1.0,
            Pattern::CompletelyMonotone if n % 2 == 0 => 1.0,
            Pattern::CompletelyMonotone => -1.0,
        };
        for (i, &x) in grid.iter().enumerate() {
            let (est, floor) = if n == 0 {
                let v = g(x)?;
                (v, crate::numerics::FD_NOISE_C * eps * v.abs())
            } else {
                let spacing = match (i.checked_sub(1).map(|j| grid[j]), grid.get(i + 1)) {
                    (Some(a), Some(&b)) => (x - a).min(b - x),
                    (Some(a), None) => x - a,
                    (None, Some(&b)) => b - x,
                    (None, None) => x,
                };
                let h = (crate::numerics::finite_diff::default_step(x, n)
                    * (eps / f64::EPSILON).powf(1.0 / (n as f64 + 2.0)))
                .min(spacing)
                .min(x / n as f64);
                let (v, mag) = finite_diff_with_scale(&g, x, n, h)?;
                (v, noise_floor(n, h, mag * eps / f64::EPSILON))
            };
            let signed = sign * est;
            let ratio = if floor > 0.0 {
                -signed / floor
            } else if signed < 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst {
                worst = ratio;
                worst_at = Some(x);
            }
            if ratio > 1.0 && first_failure.is_none() {
                first_failure = Some((n, x));
            }
        }
    }
    let mut report = VerificationReport::new(check, name, worst, 1.0)
        .with_grid(grid)
        .with_worst_at(worst_at)
        .with_detail("n_max", n_max)
        .with_detail(
            "error_measure",
            "largest sign violation in units of the finite-difference noise floor",
        );
    if let Some((n, x)) = first_failure {
        report = report.with_detail("failed_order", n).with_detail("failed_at", x);
    }
    Ok(report)
}

/// Checks `(-1)^{n-1} f^{(n)} ≥ -ε_fd` for `n = 1..=n_max` on `grid`.
pub fn check_bernstein_signs(spec: &BernsteinSpec, grid: &[f64], n_max: usize) -> Result<VerificationReport> {
    check_bernstein_signs_fn(|u| spec.eval_f(u), &spec.label(), grid, n_max)
}

/// [`check_bernstein_signs`] for an arbitrary function.
pub fn check_bernstein_signs_fn<F: Fn(f64) -> Result<f64>>(
    f: F,
    name: &str,
    grid: &[f64],
    n_max: usize,
) -> Result<VerificationReport> {
    sign_pattern(
        "bernstein_signs",
        name,
        f,
        grid,
        n_max,
        Pattern::Bernstein,
        f64::EPSILON,
    )
}

/// Checks `(-1)^n g^{(n)} ≥ -ε_fd` for `n = 0..=n_max` on `grid`.
pub fn check_cm<F: Fn(f64) -> Result<f64>>(g: F, name: &str, grid: &[f64], n_max: usize) -> Result<VerificationReport> {
    sign_pattern(
        "complete_monotonicity",
        name,
        g,
        grid,
        n_max,
        Pattern::CompletelyMonotone,
        f64::EPSILON,
    )
}

/// [`check_cm`] for a function known only to relative accuracy `accuracy`
/// (e.g. a quadrature result): the roundoff part of the floor uses
/// `accuracy` in place of machine epsilon.
pub fn check_cm_with_accuracy<F: Fn(f64) -> Result<f64>>(
    g: F,
    name: &str,
    grid: &[f64],
    n_max: usize,
    accuracy: f64,
) -> Result<VerificationReport> {
    sign_pattern(
        "complete_monotonicity",
        name,
        g,
        grid,
        n_max,
        Pattern::CompletelyMonotone,
        accuracy,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HwVerdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for HwVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HwVerdict::Holds => "holds",
            HwVerdict::Fails => "fails",
            HwVerdict::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds of the numeric Hartman–Wintner test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HwConfig {
    /// The ratio `f(r)/log r` must exceed this at the top of the probe.
    pub bound: f64,
    /// Minimum relative increase between successive probe ratios for `holds`.
    pub growth: f64,
    /// Relative change below which the ratio (or `f`) counts as settled.
    pub stabilization: f64,
    /// Number of trailing probe steps examined.
    pub tail_steps: usize,
}

impl Default for HwConfig {
    fn default() -> Self {
        HwConfig {
            bound: 10.0,
            growth: 0.01,
            stabilization: 0.01,
            tail_steps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwResult {
    pub verdict: HwVerdict,
    /// `(r, f(r)/log r)` on the probe grid.
    pub witnesses: Vec<(f64, f64)>,
    pub reason: String,
}

/// Geometric grid `10, 10^{1.25}, …, 10^{12}`.
pub fn default_probe() -> Vec<f64> {
    (4..=48).map(|i| 10f64.powf(i as f64 / 4.0)).collect()
}

pub fn hartman_wintner(spec: &BernsteinSpec, probe: &[f64], cfg: &HwConfig) -> Result<HwResult> {
    hartman_wintner_fn(|u| spec.eval_f(u), probe, cfg)
}

/// Numeric verdict on `f(r)/log r → ∞` from values on `probe`.
pub fn hartman_wintner_fn<F: Fn(f64) -> Result<f64>>(f: F, probe: &[f64], cfg: &HwConfig) -> Result<HwResult> {
    if probe.len() < cfg.tail_steps + 1 {
        return Err(Error::invalid("r_probe", "too few probe points"));
    }
    if probe.windows(2).any(|w| w[1] <= w[0]) || !(probe[0] > 1.0) {
        return Err(Error::invalid("r_probe", "must be increasing and start above 1"));
    }
    if probe[probe.len() - 1] / probe[0] < 1e6 {
        return Err(Error::invalid("r_probe", "must span at least six decades"));
    }
    let values: Vec<f64> = probe.iter().map(|&r| f(r)).collect::<Result<_>>()?;
    let witnesses: Vec<(f64, f64)> = probe.iter().zip(&values).map(|(&r, &v)| (r, v / r.ln())).collect();
    let n = witnesses.len();
    let tail = &witnesses[n - cfg.tail_steps - 1..];
    let tail_f = &values[n - cfg.tail_steps - 1..];
    let rel = |a: f64, b: f64| {
        if a == 0.0 {
            if b == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            b / a - 1.0
        }
    };
    let growing = tail.windows(2).all(|w| rel(w[0].1, w[1].1) > cfg.growth);
    let top = tail[tail.len() - 1].1;
    let ratio_settled = tail.windows(2).all(|w| rel(w[0].1, w[1].1).abs() < cfg.stabilization);
    let f_settled = tail_f.windows(2).all(|w| rel(w[0], w[1]).abs() < cfg.stabilization);

    let (verdict, reason) = if growing && top > cfg.bound {
        (
            HwVerdict::Holds,
            format!(
                "f(r)/log r increases along the probe and reaches {top:.4e} > {}",
                cfg.bound
            ),
        )
    } else if ratio_settled {
        (HwVerdict::Fails, format!("f(r)/log r settles near {top:.6}"))
    } else if f_settled {
        (
            HwVerdict::Fails,
            format!(
                "f is bounded along the probe (≈ {:.6}); the ratio tends to 0",
                tail_f[tail_f.len() - 1]
            ),
        )
    } else {
        (
            HwVerdict::Inconclusive,
            format!("ratio {top:.4e} at the top neither settles nor clears the bound"),
        )
    };
    Ok(HwResult {
        verdict,
        witnesses,
        reason,
    })
}
