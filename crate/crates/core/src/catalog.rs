//! Named models used by the CLI, the suites and the FFI.

use crate::bernstein::{BernsteinSpec, LevyMeasure};
use crate::error::{Error, Result};

/// `(name, spec)` for every catalog model.
pub fn catalog() -> Vec<(&'static str, BernsteinSpec)> {
    NAMES.iter().map(|&n| (n, lookup(n).expect("catalog entry"))).collect()
}

pub const NAMES: [&str; 5] = ["drift", "stable12", "ig", "gamma", "cp"];

/// Name of the `f(u) = u²` fixture; not a Bernstein function, so it has no spec.
pub const NON_BERNSTEIN_FIXTURE: &str = "synthetic-nonbernstein";

pub fn lookup(name: &str) -> Result<BernsteinSpec> {
    match name {
        // f(u) = u: Brownian motion, Gaussian densities
        "drift" => BernsteinSpec::pure_drift(1.0),
        // f(u) = √u: Cauchy process
        "stable12" => BernsteinSpec::new(0.0, LevyMeasure::StableJump { index: 0.5, scale: 1.0 }),
        // f(u) = √(2u + 1) − 1: normal inverse Gaussian process
        "ig" => BernsteinSpec::new(0.0, LevyMeasure::InverseGaussianJump { barrier: 1.0 }),
        // f(u) = log(1 + u): variance gamma process
        "gamma" => BernsteinSpec::new(0.0, LevyMeasure::GammaJump { shape: 1.0, rate: 1.0 }),
        // f(u) = 2u/(1 + u): compound Poisson with Gaussian-mixture jumps
        "cp" => BernsteinSpec::new(
            0.0,
            LevyMeasure::ExponentialCp {
                intensity: 2.0,
                jump_rate: 1.0,
            },
        ),
        NON_BERNSTEIN_FIXTURE => Err(Error::Unsupported(format!(
            "`{NON_BERNSTEIN_FIXTURE}` (f(u) = u²) is a test fixture, not a Bernstein function"
        ))),
        other => Err(Error::invalid(
            "model",
            format!("unknown model `{other}`; expected one of {}", NAMES.join(", ")),
        )),
    }
}

/// The catalog name of `spec`, if it is one of the catalog entries.
pub fn name_of(spec: &BernsteinSpec) -> Option<&'static str> {
    NAMES
        .iter()
        .copied()
        .find(|n| lookup(n).map(|s| &s == spec).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_resolve() {
        for (name, spec) in catalog() {
            assert_eq!(name_of(&spec), Some(name));
        }
        assert!(lookup("nope").is_err());
        assert!(matches!(lookup(NON_BERNSTEIN_FIXTURE), Err(Error::Unsupported(_))));
    }

    #[test]
    fn expected_closed_forms() {
        let u = 3.0f64;
        assert_eq!(lookup("drift").unwrap().eval_f(u).unwrap(), 3.0);
        assert!((lookup("stable12").unwrap().eval_f(u).unwrap() - u.sqrt()).abs() < 1e-15);
        assert!((lookup("ig").unwrap().eval_f(u).unwrap() - (7f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((lookup("gamma").unwrap().eval_f(u).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!((lookup("cp").unwrap().eval_f(u).unwrap() - 1.5).abs() < 1e-15);
    }
}
