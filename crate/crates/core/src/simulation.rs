//! Monte Carlo for `X_t = B(S_t)`: seeded parallel sampling, histogram and
//! atom checks, jump counts of compound-Poisson paths, negative moments and
//! the one-dimensional gradient bound.
//!
//! Samples are drawn in chunks of [`CHUNK`]; chunk `j` uses ChaCha8 seeded
//! with `seed` on stream `j`, so output does not depend on the thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::bernstein::{default_probe, hartman_wintner, HwConfig, HwVerdict, LevyMeasure};
use crate::convention::Convention;
use crate::error::{ErrSlot, Error, Result};
use crate::numerics::{five_point_derivative, integrate, integrate_breaks, Domain, NeumaierSum, QuadratureConfig};
use crate::report::SimulationReport;
use crate::subordinator::SubordinatorModel;
use crate::transition::{LevyDensity, Route, TransitionDensity};

pub const CHUNK: usize = 8192;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `draw` for `n` indices in seeded chunks, preserving order.
fn chunked<T: Send, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "sample count must be at least 1"))
    } else {
        Ok(())
    }
}

/// `n` draws of `S_t`.
pub fn sample_subordinator(model: &SubordinatorModel, t: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    check_t(t)?;
    Ok(chunked(n, seed, |rng| model.sample(t, rng)))
}

fn draw_point<R: Rng + ?Sized>(model: &SubordinatorModel, k: usize, t: f64, v: f64, rng: &mut R) -> Vec<f64> {
    let s = model.sample(t, rng);
    let scale = (v * s).sqrt();
    (0..k)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            scale * z
        })
        .collect()
}

/// `n` draws of `X_t = √(v S_t)·Z` in `R^k`.
pub fn sample_subordinated(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    n: usize,
    seed: u64,
    convention: Convention,
) -> Result<Vec<Vec<f64>>> {
    check_n(n)?;
    check_t(t)?;
    check_k(k)?;
    let v = convention.variance_factor();
    Ok(chunked(n, seed, |rng| draw_point(model, k, t, v, rng)))
}

/// `|X_t|` for the same draws as [`sample_subordinated`].
pub fn sample_radii(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    n: usize,
    seed: u64,
    convention: Convention,
) -> Result<Vec<f64>> {
    check_n(n)?;
    check_t(t)?;
    check_k(k)?;
    let v = convention.variance_factor();
    Ok(chunked(n, seed, |rng| {
        draw_point(model, k, t, v, rng)
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }))
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

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("k", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[i]
}

/// The density used as the analytic side of histogram checks.
pub fn reference_density(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<TransitionDensity> {
    if let Some(td) = TransitionDensity::closed_form(model, k, t, convention) {
        return td;
    }
    let route = if model.is_point_mass() || model.has_density() {
        Route::Mixture
    } else {
        Route::Fourier
    };
    TransitionDensity::compute(model, k, t, route, convention, cfg)
}

/// Radial histogram of `|X_t|` against shell masses of `p_t^k`, and the
/// exact-zero fraction against `e^{-ct}`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_density_check(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    n: usize,
    bins: usize,
    seed: u64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<SimulationReport> {
    if n < 10_000 {
        return Err(Error::invalid("n", "histogram checks need n ≥ 10⁴"));
    }
    if bins < 2 {
        return Err(Error::invalid("bins", "need at least two bins"));
    }
    let td = reference_density(model, k, t, convention, cfg)?;
    let radii = sample_radii(model, k, t, n, seed, convention)?;
    let zeros = radii.iter().filter(|&&r| r == 0.0).count();
    let mut positive: Vec<f64> = radii.into_iter().filter(|&r| r > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    let nf = n as f64;

    let atom = td.atom_weight();
    let atom_obs = zeros as f64 / nf;
    let atom_se = (atom * (1.0 - atom) / nf).sqrt();
    let atom_ok = if atom == 0.0 {
        zeros == 0
    } else {
        (atom_obs - atom).abs() <= 3.0 * atom_se
    };

    let mut tv = 0.0;
    if positive.len() >= bins {
        let lo = quantile(&positive, 0.5 / bins as f64);
        let hi = quantile(&positive, 1.0 - 0.5 / bins as f64);
        // edges 0 < e_1 < … < e_{bins-1} < ∞, geometric between lo and hi
        let ratio = (hi / lo).powf(1.0 / (bins - 2).max(1) as f64);
        let mut edges = vec![0.0];
        for i in 0..bins - 1 {
            edges.push(lo * ratio.powi(i as i32));
        }
        let predicted = edges
            .windows(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| td.profile().shell_mass(w[0], w[1], cfg))
            .collect::<Result<Vec<f64>>>()?;
        let tail = (1.0 - atom - predicted.iter().sum::<f64>()).max(0.0);
        let mut counts = vec![0usize; bins];
        for &r in &positive {
            let i = edges.partition_point(|&e| e <= r).saturating_sub(1);
            counts[i.min(bins - 1)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = if i < bins - 1 { predicted[i] } else { tail };
            tv += (c as f64 / nf - p).abs();
        }
        tv *= 0.5;
    } else {
        // nearly everything sits in the atom
        tv = 0.5 * ((positive.len() as f64 / nf) - (1.0 - atom)).abs() * 2.0;
    }
    let budget = 4.0 * (bins as f64 / nf).sqrt();
    Ok(
        SimulationReport::new(model.name(), k, t, n, seed, "radial_histogram_tv", tv, 0.0)
            .within(budget)
            .with_pass(tv <= budget && atom_ok)
            .with_detail("bins", bins)
            .with_detail("atom_observed", atom_obs)
            .with_detail("atom_predicted", atom)
            .with_detail("atom_standard_error", atom_se)
            .with_detail("atom_pass", atom_ok)
            .with_detail("convention", convention.as_str())
            .with_detail("route", td.route().as_str()),
    )
}

/// Fraction of exact zeros of `S_t` against `e^{-ct}`.
pub fn atom_check(model: &SubordinatorModel, t: f64, n: usize, seed: u64) -> Result<SimulationReport> {
    let s = sample_subordinator(model, t, n, seed)?;
    let zeros = s.iter().filter(|&&x| x == 0.0).count();
    let p = model.atom_weight(t);
    let obs = zeros as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let report = SimulationReport::new(model.name(), 0, t, n, seed, "zero_fraction", obs, p);
    Ok(if p == 0.0 {
        report.within(0.0).with_detail("zeros", zeros)
    } else {
        report.within_se(se, 3.0).with_detail("zeros", zeros)
    })
}

/// Empirical `E e^{-u S_t}` against `e^{-t f(u)}`, one report per `u`.
pub fn laplace_check(
    model: &SubordinatorModel,
    t: f64,
    us: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<SimulationReport>> {
    let s = sample_subordinator(model, t, n, seed)?;
    us.iter()
        .map(|&u| {
            let (mean, se) = mean_se(s.iter().map(|&x| (-u * x).exp()));
            let want = model.laplace(t, u)?;
            Ok(
                SimulationReport::new(model.name(), 0, t, n, seed, format!("laplace_u={u}"), mean, want)
                    .within_se(se.max(1e-15 * want), 3.0)
                    .with_detail("u", u),
            )
        })
        .collect()
}

/// Compensated mean and standard error.
fn mean_se<I: Iterator<Item = f64> + Clone>(values: I) -> (f64, f64) {
    let mut sum = NeumaierSum::new();
    let mut n = 0usize;
    for v in values.clone() {
        sum.add(v);
        n += 1;
    }
    let mean = sum.value() / n as f64;
    let mut sq = NeumaierSum::new();
    for v in values {
        sq.add((v - mean) * (v - mean));
    }
    let var = if n > 1 { sq.value() / (n - 1) as f64 } else { 0.0 };
    (mean, (var / n as f64).sqrt())
}

/// Share of the largest term above which a Monte Carlo mean is declared unstable.
pub const TOP_SHARE_LIMIT: f64 = 0.2;

/// Monte Carlo `E S_t^{-κ}` with the top-sample concentration diagnostic.
pub fn neg_moment_mc(
    model: &SubordinatorModel,
    kappa: f64,
    t: f64,
    n: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<SimulationReport> {
    if model.atom_rate().is_finite() {
        return Err(Error::Precondition(format!(
            "`{}` has an atom at 0, so E S_t^-κ is infinite",
            model.name()
        )));
    }
    let s = sample_subordinator(model, t, n, seed)?;
    let values: Vec<f64> = s.iter().map(|&x| x.powf(-kappa)).collect();
    let (mean, se) = mean_se(values.iter().copied());
    let total: f64 = values.iter().sum();
    let top = values.iter().copied().fold(0.0f64, f64::max);
    let share = if total > 0.0 { top / total } else { 0.0 };
    let unstable = !(share <= TOP_SHARE_LIMIT) || !mean.is_finite();
    let exact = model.neg_moment(kappa, t, cfg)?.value;
    let finite = exact.is_finite();
    let close = finite && (mean - exact).abs() <= (3.0 * se).max(1e-12 * exact.abs());
    let pass = (finite && !unstable && close) || (!finite && unstable);
    let mut report = SimulationReport::new(
        model.name(),
        0,
        t,
        n,
        seed,
        format!("neg_moment_kappa={kappa}"),
        mean,
        exact,
    )
    .with_pass(pass)
    .with_detail("top_share", share)
    .with_detail("unstable", unstable)
    .with_detail("kappa", kappa);
    report.standard_error = Some(se);
    report.tolerance = if finite {
        (3.0 * se).max(1e-12 * exact.abs())
    } else {
        f64::INFINITY
    };
    Ok(report)
}

/// Jump counts of exactly simulated compound-Poisson paths on `[0, t]`.
///
/// One report per shell for the mean and the variance of the count, one for
/// the probability of no jump at all, and one for the covariance of the
/// counts in the first pair of disjoint shells.
#[allow(clippy::too_many_arguments)]
pub fn jump_count_check(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    shells: &[(f64, f64)],
    n_paths: usize,
    seed: u64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<Vec<SimulationReport>> {
    check_n(n_paths)?;
    check_t(t)?;
    check_k(k)?;
    let intensity = model.spec().levy_measure().total_mass();
    if !intensity.is_finite() || intensity == 0.0 {
        return Err(Error::Precondition(format!(
            "jump counts need a compound-Poisson subordinator, `{}` is not",
            model.name()
        )));
    }
    for &(a, b) in shells {
        if !(a >= 0.0) || !(b > a) {
            return Err(Error::invalid("shells", "need 0 ≤ a < b"));
        }
    }
    let measure = model.spec().levy_measure().clone();
    let v = convention.variance_factor();
    let drift_free = model.spec().drift() == 0.0;
    // per path: counts per shell, total jumps, |X_t| == 0
    let paths = chunked(n_paths, seed, |rng| {
        let n_jumps = {
            let x: f64 = Poisson::new(intensity * t).expect("positive mean").sample(rng);
            x as usize
        };
        let mut counts = vec![0u32; shells.len()];
        let mut position = vec![0.0; k];
        for _ in 0..n_jumps {
            let y = jump_size(&measure, intensity, rng);
            let scale = (v * y).sqrt();
            let mut r2 = 0.0;
            for p in position.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *p += scale * z;
                r2 += scale * scale * z * z;
            }
            let r = r2.sqrt();
            for (c, &(a, b)) in counts.iter_mut().zip(shells) {
                if r > a && r <= b {
                    *c += 1;
                }
            }
        }
        let at_origin = position.iter().all(|&x| x == 0.0);
        (counts, n_jumps, at_origin)
    });
    let levy = LevyDensity::compute(model, k, convention, cfg)?;
    let nf = n_paths as f64;
    let mut reports = Vec::new();
    let mut means = Vec::new();
    for (i, &(a, b)) in shells.iter().enumerate() {
        let mass = if a == 0.0 && b.is_infinite() {
            intensity
        } else {
            levy.profile().shell_mass(a, b, cfg)?
        };
        let mu = t * mass;
        means.push(mu);
        let (mean, _) = mean_se(paths.iter().map(|p| p.0[i] as f64));
        let var = paths.iter().map(|p| (p.0[i] as f64 - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
        let shell = serde_json::json!([
            a,
            if b.is_finite() {
                serde_json::json!(b)
            } else {
                serde_json::json!("inf")
            }
        ]);
        reports.push(
            SimulationReport::new(model.name(), k, t, n_paths, seed, "jump_count_mean", mean, mu)
                .within_se((mu / nf).sqrt(), 3.0)
                .with_detail("shell", shell.clone()),
        );
        reports.push(
            SimulationReport::new(model.name(), k, t, n_paths, seed, "jump_count_variance", var, mu)
                .within_se(((mu + 2.0 * mu * mu) / nf).sqrt(), 3.0)
                .with_detail("shell", shell),
        );
    }
    let none = paths.iter().filter(|p| p.1 == 0).count();
    let p0 = (-intensity * t).exp();
    let coincide = paths.iter().all(|p| (p.1 == 0) == p.2);
    reports.push(
        SimulationReport::new(
            model.name(),
            k,
            t,
            n_paths,
            seed,
            "no_jump_fraction",
            none as f64 / nf,
            p0,
        )
        .within_se((p0 * (1.0 - p0) / nf).sqrt(), 3.0)
        .with_detail("origin_iff_no_jump", coincide),
    );
    if drift_free {
        let last = reports.len() - 1;
        let pass = reports[last].pass && coincide;
        reports[last].pass = pass;
    }
    let disjoint = (0..shells.len())
        .flat_map(|i| (i + 1..shells.len()).map(move |j| (i, j)))
        .find(|&(i, j)| shells[i].1 <= shells[j].0 || shells[j].1 <= shells[i].0);
    if let Some((i, j)) = disjoint {
        let mi = paths.iter().map(|p| p.0[i] as f64).sum::<f64>() / nf;
        let mj = paths.iter().map(|p| p.0[j] as f64).sum::<f64>() / nf;
        let cov = paths
            .iter()
            .map(|p| (p.0[i] as f64 - mi) * (p.0[j] as f64 - mj))
            .sum::<f64>()
            / (nf - 1.0).max(1.0);
        let (u0, u1) = (means[i], means[j]);
        let se = ((u0 * u1 + u0 * u1 * u1 + u0 * u0 * u1) / nf).sqrt();
        reports.push(
            SimulationReport::new(model.name(), k, t, n_paths, seed, "jump_count_covariance", cov, 0.0)
                .within_se(se, 3.0)
                .with_detail("shells", serde_json::json!([i, j])),
        );
    }
    Ok(reports)
}

fn jump_size<R: Rng + ?Sized>(measure: &LevyMeasure, intensity: f64, rng: &mut R) -> f64 {
    match measure {
        LevyMeasure::ExponentialCp { jump_rate, .. } => Exp::new(*jump_rate).expect("positive rate").sample(rng),
        LevyMeasure::FiniteAtomic { atoms } => {
            let mut target = rng.random::<f64>() * intensity;
            for a in atoms {
                if target < a.weight {
                    return a.location;
                }
                target -= a.weight;
            }
            atoms.last().map(|a| a.location).unwrap_or(0.0)
        }
        _ => unreachable!("finite-activity measures only"),
    }
}

/// Bounded test functions for the gradient bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `tanh(x/w)`, a smooth sign.
    Step {
        width: f64,
    },
    Constant(f64),
    /// `sin(ωx + x²)·exp(-x²/(2σ²))`.
    Chirp {
        omega: f64,
        sigma: f64,
    },
}

impl TestFunction {
    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Step { width } => (x / width).tanh(),
            TestFunction::Constant(c) => c,
            TestFunction::Chirp { omega, sigma } => (omega * x + x * x).sin() * (-0.5 * x * x / (sigma * sigma)).exp(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            TestFunction::Step { width } => format!("tanh(x/{width})"),
            TestFunction::Constant(c) => format!("constant({c})"),
            TestFunction::Chirp { omega, sigma } => format!("chirp({omega},{sigma})"),
        }
    }

    /// `sup |u|` (sampled on a fine grid for the chirp).
    pub fn sup_norm(&self) -> f64 {
        match *self {
            TestFunction::Step { .. } => 1.0,
            TestFunction::Constant(c) => c.abs(),
            TestFunction::Chirp { sigma, .. } => {
                let reach = 8.0 * sigma;
                (0..=200_000)
                    .map(|i| self.evaluate(-reach + 2.0 * reach * i as f64 / 200_000.0).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Where the function is not locally constant.
    fn active_range(&self) -> (f64, f64) {
        match *self {
            TestFunction::Step { width } => (-30.0 * width, 30.0 * width),
            TestFunction::Constant(_) => (0.0, 0.0),
            TestFunction::Chirp { sigma, .. } => (-10.0 * sigma, 10.0 * sigma),
        }
    }

    /// The three functions used by the gradient suite.
    pub fn standard_set() -> Vec<TestFunction> {
        vec![
            TestFunction::Step { width: 0.25 },
            TestFunction::Constant(1.0),
            TestFunction::Chirp { omega: 6.0, sigma: 3.0 },
        ]
    }
}

/// `p_t^1` on `|y| ≤ TABLE_END` by cubic interpolation on a uniform grid,
/// direct evaluation beyond; closed forms are always evaluated directly.
struct DensityTable<'a> {
    td: &'a TransitionDensity,
    values: Vec<f64>,
}

const TABLE_STEP: f64 = 0.01;
const TABLE_END: f64 = 60.0;

impl<'a> DensityTable<'a> {
    fn new(td: &'a TransitionDensity) -> Result<Self> {
        let values = if td.route() == Route::ClosedForm {
            Vec::new()
        } else {
            let n = (TABLE_END / TABLE_STEP) as usize + 3;
            (0..n)
                .into_par_iter()
                .map(|i| td.value(i as f64 * TABLE_STEP))
                .collect::<Result<Vec<f64>>>()?
        };
        Ok(DensityTable { td, values })
    }

    fn value(&self, y: f64) -> Result<f64> {
        let y = y.abs();
        if self.values.is_empty() || y >= TABLE_END {
            return self.td.value(y);
        }
        let s = y / TABLE_STEP;
        let i = s.floor() as usize;
        let f = s - i as f64;
        // even extension: p(-h) = p(h)
        let at = |j: isize| self.values[j.unsigned_abs()];
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // four-point Lagrange on nodes -1, 0, 1, 2
        Ok(
            -p0 * f * (f - 1.0) * (f - 2.0) / 6.0 + p1 * (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
                - p2 * (f + 1.0) * f * (f - 2.0) / 2.0
                + p3 * (f + 1.0) * f * (f - 1.0) / 6.0,
        )
    }
}

/// `P_t u(x) = ∫ u(x + y) p_t^1(|y|) dy`.
fn semigroup(table: &DensityTable, u: &TestFunction, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let td = table.td;
    let slot = ErrSlot::new();
    let p = |y: f64| slot.catch(table.value(y));
    let atom = td.atom_weight() * u.evaluate(x);
    let value = match *u {
        TestFunction::Constant(c) => c * (1.0 - td.atom_weight()),
        _ => {
            let (lo, hi) = u.active_range();
            let (a, b) = (lo - x, hi - x);
            let mut breaks = vec![a];
            let step = 0.05;
            let mut y = a + step;
            while y < b {
                breaks.push(y);
                y += step;
            }
            breaks.push(b);
            if a < 0.0 && b > 0.0 {
                breaks.push(0.0);
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
            }
            let f = |y: f64| u.evaluate(x + y) * p(y);
            let mid = integrate_breaks(f, &breaks, cfg)?.value;
            let left_value = u.evaluate(lo - 1.0);
            let right_value = u.evaluate(hi + 1.0);
            let left = if left_value == 0.0 {
                0.0
            } else {
                left_value * integrate(|s| p(-s), Domain::SemiInfinite(-a), cfg)?.value
            };
            let right = if right_value == 0.0 {
                0.0
            } else {
                right_value * integrate(p, Domain::SemiInfinite(b), cfg)?.value
            };
            mid + left + right
        }
    };
    slot.finish(Ok(value + atom))
}

/// `max |d/dx P_t u| ≤ 4 ‖u‖_∞ ‖p_t‖_∞ + 1e-6` on a grid over `[-5, 5]`, one
/// report per test function; the dimension is 1.
pub fn gradient_bound_check(
    model: &SubordinatorModel,
    t: f64,
    tests: &[TestFunction],
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<Vec<SimulationReport>> {
    check_t(t)?;
    let hw = hartman_wintner(model.spec(), &default_probe(), &HwConfig::default())?;
    if hw.verdict != HwVerdict::Holds {
        return Err(Error::Precondition(format!(
            "gradient bound needs the Hartman–Wintner condition; verdict for `{}` is {}",
            model.name(),
            hw.verdict
        )));
    }
    let td = reference_density(model, 1, t, convention, cfg)?;
    let sup_p = td.value(0.0)?;
    let table = DensityTable::new(&td)?;
    let xs: Vec<f64> = (0..=200).map(|i| -5.0 + 0.05 * i as f64).collect();
    tests
        .iter()
        .map(|u| {
            let derivs = xs
                .par_iter()
                .map(|&x| five_point_derivative(|y| semigroup(&table, u, y, cfg), x, 1e-3))
                .collect::<Result<Vec<f64>>>()?;
            let (i, worst) = derivs
                .iter()
                .map(|d| d.abs())
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
            let bound = 4.0 * u.sup_norm() * sup_p + 1e-6;
            Ok(
                SimulationReport::new(model.name(), 1, t, 0, 0, "gradient_bound", worst, bound)
                    .with_pass(worst <= bound)
                    .with_detail("test_function", u.name())
                    .with_detail("ratio", worst / (bound - 1e-6).max(f64::MIN_POSITIVE))
                    .with_detail("worst_x", xs[i])
                    .with_detail("sup_p", sup_p),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map(|mut v: Vec<SimulationReport>| {
            for r in v.iter_mut() {
                r.tolerance = r.predicted;
            }
            v
        })
}

/// Every applicable Monte Carlo check for one model.
#[allow(clippy::too_many_arguments)]
pub fn simulation_suite(
    model: &SubordinatorModel,
    k: usize,
    t: f64,
    n: usize,
    seed: u64,
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<Vec<SimulationReport>> {
    check_n(n)?;
    let mut out = Vec::new();
    out.push(atom_check(model, t, n, seed)?);
    out.extend(laplace_check(model, t, &[0.5, 1.0, 2.0], n, seed)?);
    if n >= 10_000 {
        out.push(empirical_density_check(model, k, t, n, 40, seed, convention, cfg)?);
    }
    if model.atom_rate().is_infinite() {
        out.push(neg_moment_mc(model, 0.5 * k as f64, t, n, seed, cfg)?);
    }
    if model.spec().levy_measure().total_mass().is_finite() && !model.is_point_mass() {
        out.extend(jump_count_check(
            model,
            k,
            t,
            &[(0.0, f64::INFINITY), (0.0, 1.0), (1.0, 3.0)],
            n,
            seed,
            convention,
            cfg,
        )?);
    }
    Ok(out)
}
