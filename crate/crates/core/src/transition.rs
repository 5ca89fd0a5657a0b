//! Transition densities `p_t^k` and Lévy densities `m_k` of subordinated
//! Brownian motion, and the checks built on them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::{check_cm_with_accuracy, BernsteinSpec, LevyMeasure};
use crate::convention::Convention;
use crate::error::{ErrSlot, Error, Result};
use crate::numerics::{finite_diff, gamma, integrate_log, QuadratureConfig};
use crate::radial::{default_grid, fourier_radial_fn, geometric_grid, montee, RadialProfile, TransformHints};
use crate::report::VerificationReport;
use crate::subordinator::SubordinatorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Gaussian kernels mixed against the law of `S_t`.
    #[default]
    Mixture,
    /// Radial Fourier inversion of `e^{-t f(|ξ|²)}`.
    Fourier,
    /// Elementary formula (Gaussian or Cauchy).
    ClosedForm,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Mixture => "mixture",
            Route::Fourier => "fourier",
            Route::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(Route::Mixture),
            "fourier" => Ok(Route::Fourier),
            "closed-form" | "closed_form" => Ok(Route::ClosedForm),
            other => Err(Error::invalid(
                "route",
                format!("expected `mixture` or `fourier`, got `{other}`"),
            )),
        }
    }
}

/// `P(X_t ∈ dx) = atom_weight·δ_0 + p_t^k(|x|) dx`.
#[derive(Debug, Clone)]
pub struct TransitionDensity {
    model: String,
    time: f64,
    atom_weight: f64,
    profile: RadialProfile,
    route: Route,
    convention: Convention,
}

impl TransitionDensity {
    pub fn from_profile(
        model: impl Into<String>,
        t: f64,
        atom_weight: f64,
        profile: RadialProfile,
        route: Route,
        convention: Convention,
    ) -> Result<Self> {
        check_t(t)?;
        if !(0.0..=1.0).contains(&atom_weight) {
            return Err(Error::invalid("atom_weight", "must lie in [0, 1]"));
        }
        Ok(TransitionDensity {
            model: model.into(),
            time: t,
            atom_weight,
            profile,
            route,
            convention,
        })
    }

    /// Density by the requested route.
    pub fn compute(
        model: &SubordinatorModel,
        k: usize,
        t: f64,
        route: Route,
        convention: Convention,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        match route {
            Route::Mixture => TransitionDensity::mixture(model, k, t, convention, cfg),
            Route::Fourier => TransitionDensity::fourier(model, k, t, convention, cfg),
            Route::ClosedForm => TransitionDensity::closed_form(model, k, t, convention)
                .ok_or_else(|| Error::Unsupported(format!("no closed-form density for `{}`", model.name())))?,
        }
    }

    /// Mixture of Gaussian kernels against the law of `S_t`.
    pub fn mixture(
        model: &SubordinatorModel,
        k: usize,
        t: f64,
        convention: Convention,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        check_t(t)?;
        if !model.is_point_mass() && !model.has_density() {
            // surfaces the family-specific message
            model.jump_density(t, 1.0)?;
        }
        let m = model.clone();
        let c = *cfg;
        let profile =
            RadialProfile::new(k, move |r| density_mixture(&m, k, t, r, convention, &c))?.with_accuracy(cfg.rel_tol);
        TransitionDensity::from_profile(
            model.name(),
            t,
            model.atom_weight(t),
            profile,
            Route::Mixture,
            convention,
        )
    }

    /// Fourier inversion of `e^{-t f}`, after the integrability probe.
    pub fn fourier(
        model: &SubordinatorModel,
        k: usize,
        t: f64,
        convention: Convention,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        check_t(t)?;
        let spec = model.spec().clone();
        let atom = model.atom_weight(t);
        let min_extent = fourier_preflight(&spec, k, t, atom, convention)?;
        let c = *cfg;
        let profile = RadialProfile::new(k, move |r| {
            fourier_value(&spec, k, t, r, atom, convention, min_extent, &c)
        })?
        .with_accuracy(cfg.rel_tol);
        TransitionDensity::from_profile(model.name(), t, atom, profile, Route::Fourier, convention)
    }

    /// Gaussian (`f(u) = αu`) and Cauchy (`f(u) = c√u`) densities.
    pub fn closed_form(model: &SubordinatorModel, k: usize, t: f64, convention: Convention) -> Option<Result<Self>> {
        let spec = model.spec();
        let profile = match *spec.levy_measure() {
            LevyMeasure::Null if spec.drift() > 0.0 => gaussian_profile(k, spec.drift() * t, convention),
            LevyMeasure::StableJump { index, scale } if index == 0.5 && spec.drift() == 0.0 => {
                cauchy_profile(k, scale * t, convention)
            }
            _ => return None,
        };
        Some(
            profile
                .and_then(|p| TransitionDensity::from_profile(model.name(), t, 0.0, p, Route::ClosedForm, convention)),
        )
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn atom_weight(&self) -> f64 {
        self.atom_weight
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.profile.evaluate(r)
    }

    /// Caches the profile on `grid`.
    pub fn with_grid(mut self, grid: &[f64]) -> Result<Self> {
        self.profile = self.profile.with_grid(grid)?;
        Ok(self)
    }

    /// `atom_weight + ∫_{R^k} p_t^k`, which should be 1.
    pub fn total_mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(self.atom_weight + self.profile.mass(cfg)?)
    }

    /// CM check of `g(r) = p_t^k(2√r)` up to order `n_max`.
    pub fn scaled_cm_check(&self, grid: &[f64], n_max: usize) -> Result<VerificationReport> {
        let p = &self.profile;
        let report = check_cm_with_accuracy(|r| p.evaluate(2.0 * r.sqrt()), &self.model, grid, n_max, p.accuracy())?;
        Ok(report
            .with_k(self.dim())
            .with_t(self.time)
            .with_detail("function", "p_t(2√r)"))
    }
}

/// Radial Lévy density `m_k` of the subordinated process.
#[derive(Debug, Clone)]
pub struct LevyDensity {
    model: String,
    profile: RadialProfile,
    convention: Convention,
}

impl LevyDensity {
    pub fn compute(
        model: &SubordinatorModel,
        k: usize,
        convention: Convention,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let spec = model.spec().clone();
        let profile = match spec.levy_measure() {
            LevyMeasure::Null => RadialProfile::zero(k)?,
            _ => {
                let c = *cfg;
                RadialProfile::new(k, move |r| levy_density(&spec, k, r, convention, &c))?.with_accuracy(cfg.rel_tol)
            }
        };
        Ok(LevyDensity {
            model: model.name().to_string(),
            profile,
            convention,
        })
    }

    pub fn from_profile(model: impl Into<String>, profile: RadialProfile, convention: Convention) -> Self {
        LevyDensity {
            model: model.into(),
            profile,
            convention,
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.profile.evaluate(r)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "t",
            format!("time must be positive and finite, got {t}"),
        ))
    }
}

fn gaussian_profile(k: usize, s: f64, convention: Convention) -> Result<RadialProfile> {
    let v = convention.variance_factor() * s;
    Ok(RadialProfile::from_fn(k, move |r| convention.heat_kernel(k, s, r))?
        .with_derivative(move |r| Ok(-r / v * convention.heat_kernel(k, s, r))))
}

fn cauchy_profile(k: usize, ct: f64, convention: Convention) -> Result<RadialProfile> {
    let tau = match convention {
        Convention::Default => ct,
        Convention::PaperLiteral => ct / 2f64.sqrt(),
    };
    let q = 0.5 * (k as f64 + 1.0);
    let c = gamma(q) / PI.powf(q);
    let p = move |r: f64| c * tau / (tau * tau + r * r).powf(q);
    Ok(RadialProfile::from_fn(k, p)?.with_derivative(move |r| Ok(-2.0 * q * r * p(r) / (tau * tau + r * r))))
}

/// Gaussian density `(2πvs)^{-k/2} e^{-r²/(2vs)}` at subordinator time `s`,
/// i.e. the density of `f(u) = u` (default convention) at time `s`.
pub fn gaussian_density(k: usize, s: f64, r: f64, convention: Convention) -> f64 {
    convention.heat_kernel(k, s, r)
}

/// Density of the process with `f(u) = √u` at time `t` in dimension `k`.
pub fn cauchy_density(k: usize, t: f64, r: f64, convention: Convention) -> f64 {
    let tau = match convention {
        Convention::Default => t,
        Convention::PaperLiteral => t / 2f64.sqrt(),
    };
    let q = 0.5 * (k as f64 + 1.0);
    gamma(q) / PI.powf(q) * tau / (tau * tau + r * r).powf(q)
}

/// `∫ kernel_k(s, r) P(S_t ∈ ds)` over the absolutely continuous part of
/// `S_t`, plus the kernel at `s = αt` when the jump part has an atom and
/// the drift moves it off the origin.
pub fn density_mixture(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    r: f64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_t(t)?;
    if k == 0 {
        return Err(Error::invalid("k", "dimension must be at least 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", format!("radius must be finite and ≥ 0, got {r}")));
    }
    let shift = model.spec().drift() * t;
    if model.is_point_mass() {
        return Ok(convention.heat_kernel(k, shift, r));
    }
    // once r² underflows the kernel no longer sees r
    if r * r == 0.0 {
        return density_at_origin(model, k, t, convention, cfg);
    }
    // for tiny r the kernel overflows near y = 0; r^k·kernel stays bounded
    let ln_scale = if r < 1e-20 { k as f64 * r.ln() } else { 0.0 };
    let slot = ErrSlot::new();
    let est = integrate_log(
        |y| {
            let kern = (convention.ln_heat_kernel(k, shift + y, r) + ln_scale).exp();
            if kern == 0.0 {
                return 0.0;
            }
            kern * slot.catch(model.jump_density(t, y))
        },
        cfg,
    );
    let mut value = slot.finish(est)?.value;
    if ln_scale != 0.0 {
        value = (value.ln() - ln_scale).exp();
    }
    if shift > 0.0 {
        value += model.jump_atom_weight(t) * convention.heat_kernel(k, shift, r);
    }
    Ok(value)
}

/// `p_t^k(0) = (2πv)^{-k/2} E[S_t^{-k/2}; S_t > 0]`.
fn density_at_origin(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let kappa = 0.5 * k as f64;
    let norm = (2.0 * PI * convention.variance_factor()).powf(-kappa);
    let moment = if model.atom_rate().is_infinite() {
        model.neg_moment(kappa, t, cfg)?.value
    } else {
        // compound Poisson: the jump density is positive at 0+, so
        // ∫ s^{-κ} q(s) ds is finite exactly when κ < 1
        if kappa >= 1.0 {
            f64::INFINITY
        } else {
            model.route_b(kappa, t, cfg)?
        }
    };
    Ok(norm * moment)
}

fn symbol_tail(spec: &BernsteinSpec, t: f64, atom: f64, convention: Convention, rho: f64) -> Result<f64> {
    let f = spec.eval_f(convention.symbol_argument(rho))?;
    Ok((-t * f).exp() - atom)
}

/// Rejects non-integrable `e^{-t f} - e^{-ct}` and returns the frequency
/// scale where `t·f` reaches 1.
fn fourier_preflight(spec: &BernsteinSpec, k: usize, t: f64, atom: f64, convention: Convention) -> Result<f64> {
    let lo = symbol_tail(spec, t, atom, convention, 1e4)?.abs();
    let hi = symbol_tail(spec, t, atom, convention, 1e5)?.abs();
    if lo > 0.0 && hi > 0.0 {
        let exponent = (lo / hi).log10();
        if !(exponent > k as f64) {
            return Err(Error::Precondition(format!(
                "Hartman–Wintner integrability: e^(-t f(|ξ|²)) decays like |ξ|^-{exponent:.3} at t = {t}, \
                 which is not integrable on R^{k}; use a larger t or the mixture route"
            )));
        }
    }
    let mut rho = 1e-3;
    while rho < 1e8 {
        if t * spec.eval_f(convention.symbol_argument(rho))? >= 1.0 {
            return Ok(rho);
        }
        rho *= 2.0;
    }
    Ok(1.0)
}

#[allow(clippy::too_many_arguments)]
fn fourier_value(
    spec: &BernsteinSpec,
    k: usize,
    t: f64,
    r: f64,
    atom: f64,
    convention: Convention,
    min_extent: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let slot = ErrSlot::new();
    let hints = TransformHints {
        support: None,
        min_extent,
    };
    let res = fourier_radial_fn(
        |rho| slot.catch(symbol_tail(spec, t, atom, convention, rho)),
        k,
        r,
        hints,
        cfg,
    );
    slot.finish(res)
}

/// `F_k(e^{-t f(|ξ|²)})(r)` after checking integrability.
pub fn density_fourier(
    spec: &BernsteinSpec,
    k: usize,
    t: f64,
    r: f64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_t(t)?;
    if k == 0 {
        return Err(Error::invalid("k", "dimension must be at least 1"));
    }
    let c = spec.atom_rate();
    let atom = if c.is_infinite() { 0.0 } else { (-c * t).exp() };
    let min_extent = fourier_preflight(spec, k, t, atom, convention)?;
    fourier_value(spec, k, t, r, atom, convention, min_extent, cfg)
}

/// `m_k(r) = ∫ kernel_k(y, r) μ(dy)`.
pub fn levy_density(
    spec: &BernsteinSpec,
    k: usize,
    r: f64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "dimension must be at least 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", format!("radius must be finite and ≥ 0, got {r}")));
    }
    let mu = spec.levy_measure();
    match mu {
        LevyMeasure::Null => Ok(0.0),
        LevyMeasure::FiniteAtomic { atoms } => Ok(atoms
            .iter()
            .map(|a| a.weight * convention.heat_kernel(k, a.location, r))
            .sum()),
        _ => {
            let est = integrate_log(
                |y| {
                    let kern = convention.heat_kernel(k, y, r);
                    if kern == 0.0 {
                        0.0
                    } else {
                        kern * mu.density(y).unwrap_or(0.0)
                    }
                },
                cfg,
            );
            match est {
                Ok(e) => Ok(e.value),
                Err(Error::Domain(_)) if r == 0.0 => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        }
    }
}

/// `A π^{-k/2} (2v)^a Γ(k/2 + a) r^{-k-2a}` for `μ(dy) = A y^{-1-a} dy`.
pub fn stable_levy_density(k: usize, index: f64, scale: f64, r: f64, convention: Convention) -> f64 {
    let a = index;
    let big_a = a * scale / gamma(1.0 - a);
    let v = convention.variance_factor();
    let half = 0.5 * k as f64;
    big_a * PI.powf(-half) * (2.0 * v).powf(a) * gamma(half + a) * r.powf(-(k as f64) - 2.0 * a)
}

/// How [`dimwalk_check_with`] scales the discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkMetric {
    /// `max |montée(lower) − upper| / max |upper|`.
    PeakRelative,
    /// `max |montée(lower) − upper| / |upper|` pointwise.
    Pointwise,
}

/// Montée of `lower` against `upper` on the default grid, peak-relative, tolerance `1e-4`.
pub fn dimwalk_check(lower: &TransitionDensity, upper: &TransitionDensity) -> Result<VerificationReport> {
    let grid = if upper.profile.grid().is_empty() {
        default_grid()
    } else {
        upper.profile.grid().to_vec()
    };
    dimwalk_check_with(lower, upper, &grid, WalkMetric::PeakRelative, 1e-4)
}

pub fn dimwalk_check_with(
    lower: &TransitionDensity,
    upper: &TransitionDensity,
    grid: &[f64],
    metric: WalkMetric,
    tol: f64,
) -> Result<VerificationReport> {
    if (lower.time - upper.time).abs() > 1e-12 * lower.time {
        return Err(Error::invalid("t", "both densities must share the same time"));
    }
    let name = if lower.model == upper.model {
        lower.model.clone()
    } else {
        format!("{} -> {}", lower.model, upper.model)
    };
    let report = walk_report("dimwalk", &name, &lower.profile, &upper.profile, grid, metric, tol)?;
    Ok(report.with_t(lower.time).with_detail("route", lower.route.as_str()))
}

/// Montée on Lévy densities over `[0.1, 10]`, peak-relative, tolerance `1e-4`.
pub fn levy_dimwalk_check(lower: &LevyDensity, upper: &LevyDensity) -> Result<VerificationReport> {
    let grid = geometric_grid(0.1, 10.0, 200)?;
    levy_dimwalk_check_with(lower, upper, &grid, WalkMetric::PeakRelative, 1e-4)
}

pub fn levy_dimwalk_check_with(
    lower: &LevyDensity,
    upper: &LevyDensity,
    grid: &[f64],
    metric: WalkMetric,
    tol: f64,
) -> Result<VerificationReport> {
    let name = if lower.model == upper.model {
        lower.model.clone()
    } else {
        format!("{} -> {}", lower.model, upper.model)
    };
    walk_report("levy_dimwalk", &name, &lower.profile, &upper.profile, grid, metric, tol)
}

fn walk_report(
    check: &str,
    name: &str,
    lower: &RadialProfile,
    upper: &RadialProfile,
    grid: &[f64],
    metric: WalkMetric,
    tol: f64,
) -> Result<VerificationReport> {
    if upper.dim() != lower.dim() + 2 {
        return Err(Error::DimensionMismatch(format!(
            "montée maps dimension {} to {}, but the upper profile has dimension {}",
            lower.dim(),
            lower.dim() + 2,
            upper.dim()
        )));
    }
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    let walked = montee(lower);
    let pairs = grid
        .par_iter()
        .map(|&r| Ok((walked.evaluate(r)?, upper.evaluate(r)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let peak = pairs.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for (&r, &(a, b)) in grid.iter().zip(&pairs) {
        let diff = (a - b).abs();
        let e = match metric {
            WalkMetric::PeakRelative if peak > 0.0 => diff / peak,
            WalkMetric::PeakRelative => diff,
            WalkMetric::Pointwise if b != 0.0 => diff / b.abs(),
            WalkMetric::Pointwise => diff,
        };
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if e > worst || worst_at.is_none() {
            worst = worst.max(e);
            if e >= worst {
                worst_at = Some(r);
            }
        }
    }
    Ok(VerificationReport::new(check, name, worst, tol)
        .with_k(upper.dim())
        .with_grid(grid)
        .with_worst_at(worst_at)
        .with_detail("lower_k", lower.dim())
        .with_detail("peak", peak)
        .with_detail(
            "metric",
            match metric {
                WalkMetric::PeakRelative => "peak-relative",
                WalkMetric::Pointwise => "pointwise-relative",
            },
        ))
}

/// Slopes between neighbouring grid points must not exceed the roundoff
/// floor of the profile values.
pub fn unimodality_check(td: &TransitionDensity) -> Result<VerificationReport> {
    let grid = if td.profile.grid().is_empty() {
        default_grid()
    } else {
        td.profile.grid().to_vec()
    };
    unimodality_check_on(td, &grid)
}

pub fn unimodality_check_on(td: &TransitionDensity, grid: &[f64]) -> Result<VerificationReport> {
    if grid.len() < 2 {
        return Err(Error::Config("unimodality needs at least two grid points".into()));
    }
    let cached = td.profile.grid() == grid;
    let values: Vec<f64> = if cached {
        td.profile.values().to_vec()
    } else {
        grid.par_iter()
            .map(|&r| td.profile.evaluate(r))
            .collect::<Result<_>>()?
    };
    let eps = td.profile.accuracy().max(f64::EPSILON);
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for i in 0..grid.len() - 1 {
        let h = grid[i + 1] - grid[i];
        let rise = values[i + 1] - values[i];
        let mag = values[i].abs() + values[i + 1].abs();
        let floor = crate::numerics::FD_NOISE_C * f64::EPSILON * mag / h + 2.0 * eps * mag / h;
        let ratio = if rise <= 0.0 {
            0.0
        } else if floor > 0.0 {
            (rise / h) / floor
        } else {
            f64::INFINITY
        };
        if ratio > worst {
            worst = ratio;
            worst_at = Some(grid[i]);
        }
    }
    Ok(VerificationReport::new("unimodality", &td.model, worst, 1.0)
        .with_k(td.dim())
        .with_t(td.time)
        .with_grid(grid)
        .with_worst_at(worst_at)
        .with_detail("error_measure", "largest positive slope in units of the roundoff floor"))
}

/// Times at which `t^{-1} P(X_t ∈ shell)` is evaluated.
pub const VAGUE_TIMES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// `t^{-1} P(X_t ∈ shell)` extrapolated to `t → 0` against `∫_shell m_k`.
pub fn vague_limit_check(
    model: &SubordinatorModel,
    k: usize,
    shells: &[(f64, f64)],
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<VerificationReport> {
    if shells.is_empty() {
        return Err(Error::invalid("shells", "need at least one shell"));
    }
    for &(a, b) in shells {
        if !(a > 0.0) || !(b > a) || !b.is_finite() {
            return Err(Error::invalid("shells", "annuli must satisfy 0 < a < b < ∞"));
        }
    }
    let route = if model.is_point_mass() || model.has_density() {
        Route::Mixture
    } else {
        Route::Fourier
    };
    let levy = LevyDensity::compute(model, k, convention, cfg)?;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for &(a, b) in shells {
        let scaled = VAGUE_TIMES
            .par_iter()
            .map(|&t| {
                let td = TransitionDensity::compute(model, k, t, route, convention, cfg)?;
                Ok(td.profile.shell_mass(a, b, cfg)? / t)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (limit, order) = extrapolate(&scaled);
        let target = levy.profile.shell_mass(a, b, cfg)?;
        let err = if target == 0.0 {
            limit.abs()
        } else {
            (limit - target).abs() / target.abs()
        };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        details.push(serde_json::json!({
            "shell": [a, b],
            "scaled_mass": scaled,
            "order": order,
            "extrapolated": limit,
            "levy_mass": target,
            "error": err,
        }));
    }
    Ok(VerificationReport::new("vague_limit", model.name(), worst, 2e-2)
        .with_k(k)
        .with_detail("times", VAGUE_TIMES.to_vec())
        .with_detail("shells", details)
        .with_detail(
            "error_measure",
            "relative error, or absolute when the Lévy mass of the shell is 0",
        ))
}

/// Limit of values at halving times. Richardson elimination of the orders
/// `1, 2, …` (small-time expansions of shell probabilities are in integer
/// powers of `t`) competes with the finest raw value; whichever moved less
/// on its last step wins. Also returns the order observed on the three
/// finest values.
fn extrapolate(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len();
    let finest = v[n - 1];
    if n < 3 {
        return (finest, None);
    }
    let d2 = v[n - 3] - v[n - 2];
    let d3 = v[n - 2] - v[n - 1];
    let order = (d3 != 0.0 && d2 / d3 > 0.0).then(|| (d2 / d3).log2());
    let mut row = v.to_vec();
    let mut prev_last = finest;
    for j in 1..n {
        prev_last = row[row.len() - 1];
        let f = 2f64.powi(j as i32);
        row = row.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    let richardson = row[0];
    let richardson_step = (richardson - prev_last).abs();
    let raw_step = d3.abs();
    if richardson.is_finite() && richardson_step < raw_step {
        (richardson, order)
    } else {
        (finest, order)
    }
}

/// `dⁿ/drⁿ g^k = (−4π)ⁿ g^{k+2n}` for `g^k(r) = p_t^k(2√r)`, with
/// `uppers[n-1]` in dimension `k + 2n`; relative error, tolerance `1e-3`.
pub fn cm_ladder_check(
    lower: &TransitionDensity,
    uppers: &[TransitionDensity],
    grid: &[f64],
) -> Result<VerificationReport> {
    if uppers.is_empty() || grid.is_empty() {
        return Err(Error::invalid(
            "uppers",
            "need at least one upper density and grid point",
        ));
    }
    for (i, u) in uppers.iter().enumerate() {
        if u.dim() != lower.dim() + 2 * (i + 1) {
            return Err(Error::DimensionMismatch(format!(
                "ladder rung {} must have dimension {}, got {}",
                i + 1,
                lower.dim() + 2 * (i + 1),
                u.dim()
            )));
        }
    }
    if grid.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("grid", "points must be positive"));
    }
    let acc = lower.profile.accuracy().max(f64::EPSILON);
    let g = |r: f64| lower.profile.evaluate(2.0 * r.sqrt());
    let rows = grid
        .par_iter()
        .map(|&r| {
            let mut worst = 0.0f64;
            for (i, u) in uppers.iter().enumerate() {
                let n = i + 1;
                let h = (2.0 * r.max(0.1) * acc.powf(1.0 / (n as f64 + 2.0))).min(r / n as f64);
                let slot = ErrSlot::new();
                let fd = finite_diff(|x| slot.catch(g(x)), r, n, h);
                let fd = slot.finish(fd)?;
                let want = (-4.0 * PI).powi(n as i32) * u.profile.evaluate(2.0 * r.sqrt())?;
                let e = (fd - want).abs() / want.abs();
                worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (i, &worst) = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    Ok(VerificationReport::new("cm_ladder", &lower.model, worst, 1e-3)
        .with_k(lower.dim())
        .with_t(lower.time)
        .with_grid(grid)
        .with_worst_at(Some(grid[i]))
        .with_detail("orders", uppers.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::linear_grid;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn model(name: &str) -> SubordinatorModel {
        SubordinatorModel::from_catalog(name).unwrap()
    }

    #[test]
    fn gaussian_peak_by_mixture() {
        let v = density_mixture(&model("drift"), 3, 1.0, 0.0, Convention::Default, &cfg()).unwrap();
        assert!((v - (4.0 * PI).powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn cauchy_by_mixture() {
        let m = model("stable12");
        let v = density_mixture(&m, 1, 1.0, 1.0, Convention::Default, &cfg()).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-10, "{v}");
        let v0 = density_mixture(&m, 1, 1.0, 0.0, Convention::Default, &cfg()).unwrap();
        assert!((v0 - 1.0 / PI).abs() < 1e-8, "{v0}");
        for k in [1, 3] {
            for &r in &[0.3, 2.0, 7.0] {
                let v = density_mixture(&m, k, 0.5, r, Convention::PaperLiteral, &cfg()).unwrap();
                let want = cauchy_density(k, 0.5, r, Convention::PaperLiteral);
                assert!((v - want).abs() < 1e-9 * want, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn gamma_mixture_normalizes() {
        let td = TransitionDensity::mixture(&model("gamma"), 1, 3.0, Convention::Default, &cfg()).unwrap();
        assert!((td.total_mass(&cfg()).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fourier_examples() {
        let drift = BernsteinSpec::pure_drift(1.0).unwrap();
        let v = density_fourier(&drift, 1, 1.0, 2.0, Convention::Default, &cfg()).unwrap();
        assert!((v - (-1.0f64).exp() / (4.0 * PI).sqrt()).abs() < 1e-9, "{v}");
        let st = catalog_spec("stable12");
        let v = density_fourier(&st, 3, 1.0, 1.0, Convention::Default, &cfg()).unwrap();
        assert!((v - 1.0 / (4.0 * PI * PI)).abs() < 1e-9, "{v}");
        let g = catalog_spec("gamma");
        let e = density_fourier(&g, 1, 0.3, 1.0, Convention::Default, &cfg()).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref m) if m.contains("Hartman")), "{e}");
    }

    fn catalog_spec(name: &str) -> BernsteinSpec {
        crate::catalog::lookup(name).unwrap()
    }

    #[test]
    fn routes_agree_for_ig() {
        let m = model("ig");
        for k in [1, 3] {
            let a = TransitionDensity::mixture(&m, k, 1.0, Convention::Default, &cfg()).unwrap();
            let b = TransitionDensity::fourier(&m, k, 1.0, Convention::Default, &cfg()).unwrap();
            let peak = a.value(0.0).unwrap();
            for &r in &[0.0, 0.1, 1.0, 3.0, 8.0] {
                let d = (a.value(r).unwrap() - b.value(r).unwrap()).abs();
                assert!(d < 1e-6 * peak, "k={k} r={r}: {d}");
            }
        }
    }

    #[test]
    fn cp_mixture_has_atom() {
        let m = model("cp");
        let td = TransitionDensity::mixture(&m, 1, 1.0, Convention::Default, &cfg()).unwrap();
        assert!((td.atom_weight() - (-2.0f64).exp()).abs() < 1e-15);
        assert!((td.total_mass(&cfg()).unwrap() - 1.0).abs() < 1e-8);
        let f = TransitionDensity::fourier(&m, 1, 1.0, Convention::Default, &cfg()).unwrap();
        for &r in &[0.2, 1.0, 4.0] {
            let (a, b) = (td.value(r).unwrap(), f.value(r).unwrap());
            assert!((a - b).abs() < 1e-6 * a, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn levy_density_examples() {
        let st = catalog_spec("stable12");
        for &r in &[0.3, 1.0, 5.0] {
            let v = levy_density(&st, 1, r, Convention::Default, &cfg()).unwrap();
            assert!((v - 1.0 / (PI * r * r)).abs() < 1e-9 * v, "r={r}");
            let c = stable_levy_density(1, 0.5, 1.0, r, Convention::Default);
            assert!((v - c).abs() < 1e-9 * v);
        }
        let cp = model("cp");
        let m = LevyDensity::compute(&cp, 1, Convention::Default, &cfg()).unwrap();
        let mass = m.profile().shell_mass(1e-9, f64::INFINITY, &cfg()).unwrap();
        assert!((mass - 2.0).abs() < 1e-6, "{mass}");
        let z = LevyDensity::compute(&model("drift"), 3, Convention::Default, &cfg()).unwrap();
        assert_eq!(z.value(0.5).unwrap(), 0.0);
    }

    #[test]
    fn dimwalk_gaussian_and_cauchy() {
        let cf = |name: &str, k| {
            TransitionDensity::closed_form(&model(name), k, 1.0, Convention::Default)
                .unwrap()
                .unwrap()
        };
        let r = dimwalk_check(&cf("drift", 1), &cf("drift", 3)).unwrap();
        assert!(r.pass && r.max_error < 1e-8, "{r:?}");
        let r = dimwalk_check(&cf("stable12", 1), &cf("stable12", 3)).unwrap();
        assert!(r.pass, "{r:?}");
        let r = dimwalk_check(&cf("drift", 1), &cf("stable12", 3)).unwrap();
        assert!(!r.pass);
        assert!(matches!(
            dimwalk_check(&cf("drift", 1), &cf("drift", 1)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dimwalk_quadrature_cauchy_pointwise() {
        let m = model("stable12");
        let lo = TransitionDensity::mixture(&m, 1, 0.5, Convention::Default, &cfg()).unwrap();
        let hi = TransitionDensity::mixture(&m, 3, 0.5, Convention::Default, &cfg()).unwrap();
        let grid = geometric_grid(0.01, 10.0, 60).unwrap();
        let r = dimwalk_check_with(&lo, &hi, &grid, WalkMetric::Pointwise, 1e-4).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn levy_dimwalk() {
        for name in ["stable12", "cp"] {
            let m = model(name);
            let lo = LevyDensity::compute(&m, 1, Convention::Default, &cfg()).unwrap();
            let hi = LevyDensity::compute(&m, 3, Convention::Default, &cfg()).unwrap();
            let r = levy_dimwalk_check(&lo, &hi).unwrap();
            assert!(r.pass, "{name}: {r:?}");
        }
        let z = LevyDensity::compute(&model("drift"), 1, Convention::Default, &cfg()).unwrap();
        let z3 = LevyDensity::compute(&model("drift"), 3, Convention::Default, &cfg()).unwrap();
        assert!(levy_dimwalk_check(&z, &z3).unwrap().pass);
    }

    #[test]
    fn unimodality() {
        for name in ["drift", "stable12"] {
            for k in [1, 3] {
                let td = TransitionDensity::closed_form(&model(name), k, 1.0, Convention::Default)
                    .unwrap()
                    .unwrap();
                assert!(unimodality_check(&td).unwrap().pass);
            }
        }
        let bimodal = RadialProfile::from_fn(1, |r| (-(r - 2.0).powi(2)).exp() + (-r * r).exp()).unwrap();
        let td = TransitionDensity::from_profile("bimodal", 1.0, 0.0, bimodal, Route::ClosedForm, Convention::Default)
            .unwrap();
        assert!(!unimodality_check(&td).unwrap().pass);
    }

    #[test]
    fn vague_limits() {
        let shells = [(1.0, 2.0), (2.0, 4.0)];
        let r = vague_limit_check(&model("stable12"), 1, &shells, Convention::Default, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let r = vague_limit_check(&model("drift"), 1, &[(1.0, 2.0)], Convention::Default, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let r = vague_limit_check(&model("cp"), 1, &[(0.5, 3.0)], Convention::Default, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
        let r = vague_limit_check(&model("ig"), 1, &shells, Convention::Default, &cfg()).unwrap();
        assert!(r.pass && r.max_error < 1e-3, "{r:?}");
    }

    #[test]
    fn extrapolation_recovers_quadratic() {
        let v: Vec<f64> = VAGUE_TIMES.iter().map(|t| 3.0 + 2.0 * t * t - t * t * t).collect();
        let (l, p) = extrapolate(&v);
        assert!((l - 3.0).abs() < 1e-12);
        assert!((p.unwrap() - 2.0).abs() < 0.2);
        // faster than any power: the finest value is kept
        let v: Vec<f64> = VAGUE_TIMES.iter().map(|t| (-1.0 / t).exp() / t).collect();
        assert_eq!(extrapolate(&v).0, v[3]);
    }

    #[test]
    fn ladder_and_scaled_cm() {
        let m = model("stable12");
        let lower = TransitionDensity::mixture(&m, 1, 1.0, Convention::Default, &cfg()).unwrap();
        let uppers: Vec<_> = [3, 5]
            .iter()
            .map(|&k| TransitionDensity::mixture(&m, k, 1.0, Convention::Default, &cfg()).unwrap())
            .collect();
        let grid = linear_grid(0.1, 5.0, 25).unwrap();
        let r = cm_ladder_check(&lower, &uppers, &grid).unwrap();
        assert!(r.pass, "{r:?}");
        let r = lower.scaled_cm_check(&grid, 4).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
