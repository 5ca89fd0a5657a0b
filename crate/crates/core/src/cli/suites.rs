//! Report producers behind `verify --suite`.

use clap::ValueEnum;

use crate::bernstein::{check_bernstein_signs, check_bernstein_signs_fn, check_cm, default_probe, hartman_wintner};
use crate::bernstein::{HwConfig, HwVerdict, LevyMeasure};
use crate::error::Result;
use crate::generator::{intertwine_check, RadialTestFunction};
use crate::radial::{geometric_grid, linear_grid};
use crate::report::VerificationReport;
use crate::simulation::{gradient_bound_check, TestFunction};
use crate::subordinator::SubordinatorModel;
use crate::transition::{dimwalk_check, levy_dimwalk_check, vague_limit_check, LevyDensity, TransitionDensity};

use super::{RunConfig, Selected};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cm,
    Hw,
    Dimwalk,
    Intertwine,
    Gradient,
    VagueLimit,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Cm,
                Suite::Hw,
                Suite::Dimwalk,
                Suite::Intertwine,
                Suite::Gradient,
                Suite::VagueLimit,
            ],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Cm => "cm",
            Suite::Hw => "hw",
            Suite::Dimwalk => "dimwalk",
            Suite::Intertwine => "intertwine",
            Suite::Gradient => "gradient",
            Suite::VagueLimit => "vague-limit",
            Suite::All => "all",
        }
    }
}

/// One entry per sub-suite: an optional skip note and the reports produced.
/// Errors inside a check become failing reports.
pub fn run_suite(suite: Suite, target: &Selected, cfg: &RunConfig) -> Vec<(Option<String>, Vec<VerificationReport>)> {
    suite
        .expand()
        .into_iter()
        .map(|s| {
            let out = match target {
                Selected::NonBernstein => non_bernstein(),
                Selected::Model(m) => match s {
                    Suite::Cm => cm(m),
                    Suite::Hw => hw(m, cfg),
                    Suite::Dimwalk => dimwalk(m, cfg),
                    Suite::Intertwine => intertwine(m, cfg),
                    Suite::Gradient => gradient(m, cfg),
                    Suite::VagueLimit => vague(m, cfg),
                    Suite::All => unreachable!(),
                },
            };
            match out {
                Ok(Outcome::Reports(r)) => (None, r),
                Ok(Outcome::Skipped(why)) => (Some(format!("{}: {why}", s.name())), Vec::new()),
                Err(e) => {
                    let report = VerificationReport::new(s.name(), target.name(), f64::NAN, 0.0)
                        .with_pass(false)
                        .with_detail("error", e.to_string());
                    (None, vec![report])
                }
            }
        })
        .collect()
}

enum Outcome {
    Reports(Vec<VerificationReport>),
    Skipped(String),
}

fn holds(m: &SubordinatorModel) -> Result<bool> {
    Ok(hartman_wintner(m.spec(), &default_probe(), &HwConfig::default())?.verdict == HwVerdict::Holds)
}

fn bernstein_grid() -> Vec<f64> {
    geometric_grid(0.5, 50.0, 40).expect("static grid")
}

fn non_bernstein() -> Result<Outcome> {
    let r = check_bernstein_signs_fn(|u| Ok(u * u), super::NON_BERNSTEIN_FIXTURE, &bernstein_grid(), 5)?;
    Ok(Outcome::Reports(vec![r]))
}

/// Sign pattern of `f` to order 5 and complete monotonicity of `e^{-t f}`.
fn cm(m: &SubordinatorModel) -> Result<Outcome> {
    let mut out = vec![check_bernstein_signs(m.spec(), &bernstein_grid(), 5)?];
    let grid = geometric_grid(0.1, 20.0, 40)?;
    for t in [0.1, 1.0, 5.0] {
        let spec = m.spec();
        let r = check_cm(|u| Ok((-t * spec.eval_f(u)?).exp()), m.name(), &grid, 5)?;
        out.push(r.with_t(t).with_detail("function", "exp(-t f)"));
    }
    Ok(Outcome::Reports(out))
}

/// The Hartman–Wintner verdict against finiteness of `E S_t^{-k/2}`.
fn hw(m: &SubordinatorModel, cfg: &RunConfig) -> Result<Outcome> {
    let result = hartman_wintner(m.spec(), &default_probe(), &HwConfig::default())?;
    let mut moments = Vec::new();
    let mut all_finite = true;
    for k in [1usize, 3] {
        for t in [0.1, 1.0] {
            let nm = m.neg_moment(0.5 * k as f64, t, &cfg.quadrature)?;
            all_finite &= nm.value.is_finite();
            moments.push(serde_json::json!({
                "k": k, "t": t,
                "value": crate::export::fmt_f64(nm.value),
                "route_a": crate::export::fmt_f64(nm.route_a),
            }));
        }
    }
    let consistent = match result.verdict {
        HwVerdict::Holds => all_finite,
        HwVerdict::Fails => !all_finite,
        HwVerdict::Inconclusive => false,
    };
    let report = VerificationReport::new("hartman_wintner", m.name(), if consistent { 0.0 } else { 1.0 }, 0.0)
        .with_detail("verdict", result.verdict.to_string())
        .with_detail("reason", result.reason)
        .with_detail("negative_moments", moments);
    Ok(Outcome::Reports(vec![report]))
}

fn dimwalk(m: &SubordinatorModel, cfg: &RunConfig) -> Result<Outcome> {
    if !holds(m)? && cfg.route == Some(crate::transition::Route::Fourier) {
        return Ok(Outcome::Skipped(
            "Fourier route needs the Hartman–Wintner condition".into(),
        ));
    }
    let route = cfg.route.unwrap_or_default();
    let q = &cfg.quadrature;
    let mut out = Vec::new();
    for k in [1usize, 3] {
        for t in [0.5, 1.0] {
            let lo = TransitionDensity::compute(m, k, t, route, cfg.convention, q)?;
            let hi = TransitionDensity::compute(m, k + 2, t, route, cfg.convention, q)?;
            out.push(dimwalk_check(&lo, &hi)?);
        }
    }
    if !matches!(m.spec().levy_measure(), LevyMeasure::Null) {
        let lo = LevyDensity::compute(m, 1, cfg.convention, q)?;
        let hi = LevyDensity::compute(m, 3, cfg.convention, q)?;
        out.push(levy_dimwalk_check(&lo, &hi)?);
    }
    Ok(Outcome::Reports(out))
}

fn intertwine(m: &SubordinatorModel, cfg: &RunConfig) -> Result<Outcome> {
    if !holds(m)? {
        return Ok(Outcome::Skipped("needs the Hartman–Wintner condition".into()));
    }
    let grid = linear_grid(0.2, 2.5, 24)?;
    let mut out = Vec::new();
    for u in [
        RadialTestFunction::poly_bump(4, 3.0)?,
        RadialTestFunction::poly_bump(3, 2.75)?,
    ] {
        out.push(intertwine_check(m.spec(), 3, &u, &grid, &cfg.quadrature)?);
    }
    Ok(Outcome::Reports(out))
}

fn gradient(m: &SubordinatorModel, cfg: &RunConfig) -> Result<Outcome> {
    if !holds(m)? {
        return Ok(Outcome::Skipped("needs the Hartman–Wintner condition".into()));
    }
    let mut out = Vec::new();
    for t in [0.5, 1.0] {
        for r in gradient_bound_check(m, t, &TestFunction::standard_set(), cfg.convention, &cfg.quadrature)? {
            let mut v = VerificationReport::new("gradient_bound", m.name(), r.observed, r.predicted)
                .with_k(1)
                .with_t(t)
                .with_pass(r.pass);
            v.details = r.details;
            out.push(v);
        }
    }
    Ok(Outcome::Reports(out))
}

fn vague(m: &SubordinatorModel, cfg: &RunConfig) -> Result<Outcome> {
    let shells = [(1.0, 2.0), (2.0, 4.0)];
    let r = vague_limit_check(m, 1, &shells, cfg.convention, &cfg.quadrature)?;
    Ok(Outcome::Reports(vec![r]))
}
