//! The law of `S_t`: atom at zero, closed-form densities, exact samplers and
//! negative moments.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bernstein::{BernsteinSpec, LevyMeasure};
use crate::catalog;
use crate::error::{ErrSlot, Error, Result};
use crate::numerics::{gamma, integrate, ln_gamma, Domain, QuadratureConfig};

const POISSON_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorModel {
    name: String,
    spec: BernsteinSpec,
}

/// Both routes of `E S_t^{-κ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegMoment {
    /// Route A; infinite when the moment diverges.
    pub value: f64,
    /// `Γ(κ)^{-1} ∫ e^{-t f(r)} r^{κ-1} dr`.
    pub route_a: f64,
    /// `∫ s^{-κ} P(S_t ∈ ds)` when a density is available.
    pub route_b: Option<f64>,
}

impl SubordinatorModel {
    pub fn new(spec: BernsteinSpec) -> Self {
        let name = catalog::name_of(&spec)
            .map(str::to_string)
            .unwrap_or_else(|| spec.label());
        SubordinatorModel { name, spec }
    }

    pub fn named(name: impl Into<String>, spec: BernsteinSpec) -> Self {
        SubordinatorModel {
            name: name.into(),
            spec,
        }
    }

    pub fn from_catalog(name: &str) -> Result<Self> {
        Ok(SubordinatorModel::named(name, catalog::lookup(name)?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &BernsteinSpec {
        &self.spec
    }

    /// `c` in `P(S_t = 0) = e^{-ct}`.
    pub fn atom_rate(&self) -> f64 {
        self.spec.atom_rate()
    }

    /// `P(S_t = 0)`.
    pub fn atom_weight(&self, t: f64) -> f64 {
        let c = self.atom_rate();
        if c.is_infinite() {
            0.0
        } else {
            (-c * t).exp()
        }
    }

    /// Rate of the jump part alone; finite only for compound-Poisson measures.
    fn jump_atom_rate(&self) -> f64 {
        self.spec.levy_measure().total_mass()
    }

    /// `P(J_t = 0)` for the jump part `J_t = S_t - αt`.
    pub fn jump_atom_weight(&self, t: f64) -> f64 {
        let c = self.jump_atom_rate();
        if c.is_infinite() {
            0.0
        } else {
            (-c * t).exp()
        }
    }

    /// `S_t = αt` deterministically.
    pub fn is_point_mass(&self) -> bool {
        self.spec.is_drift_only()
    }

    /// Whether the jump part has a closed-form absolutely continuous law.
    pub fn has_density(&self) -> bool {
        match self.spec.levy_measure() {
            LevyMeasure::StableJump { index, .. } => *index == 0.5,
            LevyMeasure::GammaJump { .. }
            | LevyMeasure::InverseGaussianJump { .. }
            | LevyMeasure::ExponentialCp { .. } => true,
            LevyMeasure::FiniteAtomic { .. } | LevyMeasure::Null => false,
        }
    }

    /// Density of the absolutely continuous part of `J_t = S_t - αt` at `y > 0`.
    pub fn jump_density(&self, t: f64, y: f64) -> Result<f64> {
        check_t(t)?;
        if !(y > 0.0) {
            return Ok(0.0);
        }
        match *self.spec.levy_measure() {
            LevyMeasure::StableJump { index: 0.5, scale } => {
                let c = scale * t;
                let log = (c / (2.0 * PI.sqrt())).ln() - 1.5 * y.ln() - c * c / (4.0 * y);
                Ok(log.exp())
            }
            LevyMeasure::StableJump { index, .. } => Err(Error::Unsupported(format!(
                "no elementary density for stable index {index}; use the Fourier route"
            ))),
            LevyMeasure::GammaJump { shape, rate } => {
                let a = shape * t;
                let log = a * rate.ln() + (a - 1.0) * y.ln() - rate * y - ln_gamma(a);
                Ok(log.exp())
            }
            LevyMeasure::InverseGaussianJump { barrier } => {
                let log = t.ln() - 0.5 * (2.0 * PI).ln() - 1.5 * y.ln() - (t - barrier * y).powi(2) / (2.0 * y);
                Ok(log.exp())
            }
            LevyMeasure::ExponentialCp { intensity, jump_rate } => Ok(cp_density(intensity * t, jump_rate, y)),
            LevyMeasure::FiniteAtomic { .. } => Err(Error::Unsupported(
                "finite atomic measures give a discrete law; use the Fourier route".into(),
            )),
            LevyMeasure::Null => Err(Error::Unsupported(
                "pure drift: S_t = αt is a point mass with no density".into(),
            )),
        }
    }

    /// Density of the absolutely continuous part of `S_t` at `s > 0`.
    pub fn density(&self, t: f64, s: f64) -> Result<f64> {
        self.jump_density(t, s - self.spec.drift() * t)
    }

    /// `E e^{-u S_t} = e^{-t f(u)}`.
    pub fn laplace(&self, t: f64, u: f64) -> Result<f64> {
        Ok((-t * self.spec.eval_f(u)?).exp())
    }

    /// One exact draw of `S_t`.
    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        self.spec.drift() * t + self.sample_jumps(t, rng)
    }

    fn sample_jumps<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        match self.spec.levy_measure() {
            LevyMeasure::StableJump { index, scale } => {
                if *index == 0.5 {
                    // Lévy law: (ct)²/(2Z²)
                    let z: f64 = rng.sample(StandardNormal);
                    let c = scale * t;
                    c * c / (2.0 * z * z)
                } else {
                    (scale * t).powf(1.0 / index) * positive_stable(*index, rng)
                }
            }
            LevyMeasure::GammaJump { shape, rate } => Gamma::new(shape * t, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            LevyMeasure::InverseGaussianJump { barrier } => {
                if *barrier == 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    t * t / (z * z)
                } else {
                    InverseGaussian::new(t / barrier, t * t)
                        .expect("validated inverse Gaussian parameters")
                        .sample(rng)
                }
            }
            LevyMeasure::ExponentialCp { intensity, jump_rate } => {
                let n = poisson(intensity * t, rng);
                if n == 0 {
                    0.0
                } else {
                    Gamma::new(n as f64, 1.0 / jump_rate)
                        .expect("positive shape")
                        .sample(rng)
                }
            }
            LevyMeasure::FiniteAtomic { atoms } => atoms
                .iter()
                .map(|a| poisson(a.weight * t, rng) as f64 * a.location)
                .sum(),
            LevyMeasure::Null => 0.0,
        }
    }

    /// `E S_t^{-κ}` by route A, cross-checked against route B when a density exists.
    pub fn neg_moment(&self, kappa: f64, t: f64, cfg: &QuadratureConfig) -> Result<NegMoment> {
        check_t(t)?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::invalid("kappa", format!("must be positive, got {kappa}")));
        }
        if self.atom_rate().is_finite() {
            // mass at S_t = 0
            return Ok(NegMoment {
                value: f64::INFINITY,
                route_a: f64::INFINITY,
                route_b: None,
            });
        }
        if self.is_point_mass() {
            let v = (self.spec.drift() * t).powf(-kappa);
            return Ok(NegMoment {
                value: v,
                route_a: self.route_a(kappa, t, cfg)?,
                route_b: Some(v),
            });
        }
        let a = self.route_a(kappa, t, cfg)?;
        let b = if self.has_density() {
            Some(self.route_b(kappa, t, cfg)?)
        } else {
            None
        };
        if let Some(b) = b {
            let both_infinite = a.is_infinite() && b.is_infinite();
            if !both_infinite && !((a - b).abs() <= 1e-6 * a.abs()) {
                return Err(Error::numeric(
                    format!("negative moment routes disagree (route B = {b:e})"),
                    a,
                    (a - b).abs(),
                ));
            }
        }
        Ok(NegMoment {
            value: a,
            route_a: a,
            route_b: b,
        })
    }

    /// `Γ(κ)^{-1} ∫_0^∞ e^{-t f(r)} r^{κ-1} dr` in the variable `x = log r`,
    /// with unit panels upwards from `x = 0`.
    pub fn route_a(&self, kappa: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let spec = &self.spec;
        let g = |x: f64| {
            let r = x.exp();
            match spec.eval_f(r) {
                Ok(f) => (kappa * x - t * f).exp(),
                Err(_) => f64::NAN,
            }
        };
        let left = integrate(|y| g(-y), Domain::SemiInfinite(0.0), cfg)?.value;
        Ok((left + panel_sum(g, left, cfg, "negative moment route A")?) / gamma(kappa))
    }

    /// `∫ s^{-κ} ρ_t(s) ds` against the closed-form density, in `x = log s`
    /// with the two half-lines integrated separately.
    pub fn route_b(&self, kappa: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let slot = ErrSlot::new();
        let g = |x: f64| {
            if !(-700.0..=700.0).contains(&x) {
                return 0.0;
            }
            let d = slot.catch(self.density(t, x.exp()));
            if d == 0.0 {
                0.0
            } else {
                d * ((1.0 - kappa) * x).exp()
            }
        };
        let est = integrate(g, Domain::SemiInfinite(0.0), cfg).and_then(|right| {
            let left = panel_sum(|y| g(-y), right.value, cfg, "negative moment route B")?;
            Ok(right.value + left)
        });
        match slot.finish(Ok(est))? {
            Err(Error::Domain(_)) => Ok(f64::INFINITY),
            r => r,
        }
    }
}

/// `∫_0^∞ g` over unit panels, closed by a geometric tail once successive
/// panel ratios settle below 1; infinite when they settle at or above 1.
/// `known` is the part of the integral already summed elsewhere, used only
/// for the relative stopping rule.
fn panel_sum<F: Fn(f64) -> f64>(g: F, known: f64, cfg: &QuadratureConfig, what: &str) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_q: Option<f64> = None;
    for j in 0..700 {
        let x0 = j as f64;
        let scale = known + total;
        let panel_cfg = cfg.with_abs_tol(cfg.abs_tol.max(1e-3 * cfg.rel_tol * scale));
        let p = integrate(&g, Domain::Finite(x0, x0 + 1.0), &panel_cfg)?.value;
        if p.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += p;
        if let Some(pp) = prev {
            let q = if pp > 0.0 { p / pp } else { 0.0 };
            if q < 1.0 && p * q / (1.0 - q) <= cfg.rel_tol * (known + total) {
                return Ok(total + p * q / (1.0 - q));
            }
            if j >= 40 {
                if q >= 1.0 {
                    return Ok(f64::INFINITY);
                }
                if let Some(pq) = prev_q {
                    if (q - pq).abs() < 1e-3 {
                        return Ok(total + p * q / (1.0 - q));
                    }
                }
            }
            prev_q = Some(q);
        }
        if p == 0.0 && j > 0 {
            return Ok(total);
        }
        prev = Some(p);
    }
    Err(Error::numeric(
        format!("{what} did not settle"),
        known + total,
        f64::NAN,
    ))
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

/// Absolutely continuous part of a compound Poisson sum of `Exp(β)` jumps
/// with Poisson mean `m`: `Σ_{n≥1} Pois(n; m) Gamma(n, β)(y)`.
fn cp_density(m: f64, beta: f64, y: f64) -> f64 {
    let x = m * beta * y;
    let lx = x.ln();
    // Σ xⁿ/(n!(n-1)!) ≤ x e^{2√x}
    if -m - beta * y + 2.0 * x.sqrt() + lx - y.ln() < -750.0 {
        return 0.0;
    }
    let ln_m = m.ln();
    // n = 1 term: e^{-m-βy} mβ
    let mut log_term = -m - beta * y + ln_m + beta.ln();
    let mut log_pois = -m + ln_m;
    let mut poisson_cdf = (-m).exp() + log_pois.exp();
    let mut sum = log_term.exp();
    let mut n = 1u64;
    loop {
        n += 1;
        let nf = n as f64;
        // ratio of successive terms: mβy / (n (n-1))
        log_term += lx - nf.ln() - (nf - 1.0).ln();
        log_pois += ln_m - nf.ln();
        poisson_cdf += log_pois.exp();
        let term = log_term.exp();
        sum += term;
        let past_mode = nf * (nf - 1.0) > m * beta * y;
        if (past_mode && 1.0 - poisson_cdf < POISSON_TAIL && term <= 1e-17 * sum) || n > 100_000 {
            break;
        }
    }
    sum
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let v: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    v as u64
}

/// Kanter's representation of the positive stable law with `E e^{-uS} = e^{-u^a}`.
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() * PI;
    let e: f64 = rng.sample(Exp1);
    let num = (a * u).sin() / u.sin().powf(1.0 / a);
    let tail = ((1.0 - a) * u).sin() / e;
    num * tail.powf((1.0 - a) / a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_log;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn model(name: &str) -> SubordinatorModel {
        SubordinatorModel::from_catalog(name).unwrap()
    }

    #[test]
    fn gamma_density_closed_form() {
        let m = model("gamma");
        for &t in &[0.5, 1.0, 3.0] {
            for &s in &[0.1, 1.0, 4.0] {
                let want = f64::powf(s, t - 1.0) * f64::exp(-s) / gamma(t);
                assert!((m.density(t, s).unwrap() - want).abs() < 1e-13 * want.max(1.0));
            }
        }
    }

    #[test]
    fn densities_normalize_and_match_laplace() {
        for name in ["stable12", "ig", "gamma", "cp"] {
            let m = model(name);
            for &t in &[0.5, 1.0, 2.0] {
                let mass = integrate_log(|s| m.density(t, s).unwrap(), &cfg()).unwrap().value;
                assert!((mass - (1.0 - m.atom_weight(t))).abs() < 1e-8, "{name} t={t}: {mass}");
                for &u in &[0.5, 1.0, 3.0] {
                    let lt = integrate_log(|s| (-u * s).exp() * m.density(t, s).unwrap(), &cfg())
                        .unwrap()
                        .value
                        + m.atom_weight(t);
                    let want = m.laplace(t, u).unwrap();
                    assert!((lt - want).abs() < 1e-8, "{name} t={t} u={u}: {lt} vs {want}");
                }
            }
        }
    }

    #[test]
    fn stable_half_density() {
        let m = model("stable12");
        let s: f64 = 0.7;
        let want = (-1.0 / (4.0 * s)).exp() / (2.0 * PI.sqrt() * s.powf(1.5));
        assert!((m.density(1.0, s).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn unsupported_densities() {
        assert!(matches!(model("drift").density(1.0, 2.0), Err(Error::Unsupported(_))));
        let s = BernsteinSpec::new(0.0, LevyMeasure::StableJump { index: 0.3, scale: 1.0 }).unwrap();
        assert!(matches!(
            SubordinatorModel::new(s).density(1.0, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn atom_rates() {
        assert_eq!(model("cp").atom_rate(), 2.0);
        assert!(model("stable12").atom_rate().is_infinite());
        assert!(model("drift").atom_rate().is_infinite());
        assert_eq!(model("drift").atom_weight(1.0), 0.0);
    }

    #[test]
    fn drift_sampler_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(model("drift").sample(1.7, &mut rng), 1.7);
    }

    #[test]
    fn sampler_laplace_transforms() {
        let general = SubordinatorModel::new(
            BernsteinSpec::new(0.2, LevyMeasure::StableJump { index: 0.3, scale: 1.5 }).unwrap(),
        );
        let atomic = SubordinatorModel::new(
            BernsteinSpec::new(
                0.0,
                LevyMeasure::FiniteAtomic {
                    atoms: vec![
                        crate::bernstein::Atom {
                            location: 0.5,
                            weight: 1.0,
                        },
                        crate::bernstein::Atom {
                            location: 2.0,
                            weight: 0.5,
                        },
                    ],
                },
            )
            .unwrap(),
        );
        let models = [
            model("stable12"),
            model("ig"),
            model("gamma"),
            model("cp"),
            general,
            atomic,
        ];
        let n = 40_000;
        for m in &models {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let samples: Vec<f64> = (0..n).map(|_| m.sample(1.0, &mut rng)).collect();
            for &u in &[0.5, 1.0, 2.0] {
                let vals: Vec<f64> = samples.iter().map(|s| (-u * s).exp()).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let want = m.laplace(1.0, u).unwrap();
                assert!(
                    (mean - want).abs() <= 4.0 * se + 1e-12,
                    "{}: u={u} {mean} vs {want}",
                    m.name()
                );
            }
        }
    }

    #[test]
    fn neg_moment_examples() {
        let g = model("gamma");
        let m = g.neg_moment(1.0, 2.0, &cfg()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-8, "{m:?}");
        assert!((m.route_b.unwrap() - 1.0).abs() < 1e-8);
        assert!(g.neg_moment(1.0, 0.5, &cfg()).unwrap().value.is_infinite());
        assert!(g.neg_moment(1.0, 1.0, &cfg()).unwrap().value.is_infinite());
        let s = model("stable12").neg_moment(0.5, 1.0, &cfg()).unwrap();
        assert!((s.value - 2.0 / PI.sqrt()).abs() < 1e-8, "{s:?}");
        let d = model("drift").neg_moment(1.0, 2.0, &cfg()).unwrap();
        assert!((d.value - 0.5).abs() < 1e-15);
        assert!((d.route_a - 0.5).abs() < 1e-9);
        assert!(model("cp").neg_moment(0.5, 1.0, &cfg()).unwrap().value.is_infinite());
    }

    #[test]
    fn gamma_moment_matches_gamma_ratio() {
        let g = model("gamma");
        for &(t, k) in &[(2.0, 1.0), (3.0, 0.5), (1.0, 0.5), (2.5, 1.5)] {
            let v = g.neg_moment(k, t, &cfg()).unwrap().value;
            let want = gamma(t - k) / gamma(t);
            assert!((v - want).abs() < 1e-8 * want, "t={t} κ={k}: {v} vs {want}");
        }
    }
}
