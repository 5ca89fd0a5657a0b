//! Which Gaussian kernel mixes against the subordinator.
//!
//! With `ψ(ξ) = f(|ξ|²)` the Fourier inverse of `e^{-t ψ}` is the mixture of
//! `(4πs)^{-k/2} e^{-r²/(4s)}`, i.e. Brownian motion run at twice the
//! standard speed. The standard heat kernel `(2πs)^{-k/2} e^{-r²/(2s)}`
//! instead pairs with `f(|ξ|²/2)`. Both are available; the first is the default.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Kernel `(4πs)^{-k/2} e^{-r²/(4s)}`, symbol `f(ρ²)`.
    #[default]
    Default,
    /// Kernel `(2πs)^{-k/2} e^{-r²/(2s)}`, symbol `f(ρ²/2)`.
    PaperLiteral,
}

impl Convention {
    /// Per-coordinate variance of the Gaussian at subordinator time `s = 1`.
    pub fn variance_factor(self) -> f64 {
        match self {
            Convention::Default => 2.0,
            Convention::PaperLiteral => 1.0,
        }
    }

    /// The argument passed to `f` at frequency `ρ`.
    pub fn symbol_argument(self, rho: f64) -> f64 {
        0.5 * self.variance_factor() * rho * rho
    }

    /// Gaussian kernel in dimension `k` at time `s`, radius `r`.
    pub fn heat_kernel(self, k: usize, s: f64, r: f64) -> f64 {
        self.ln_heat_kernel(k, s, r).exp()
    }

    /// `ln` of [`Convention::heat_kernel`]; `-∞` for `s ≤ 0`.
    pub fn ln_heat_kernel(self, k: usize, s: f64, r: f64) -> f64 {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = self.variance_factor() * s;
        -0.5 * k as f64 * (2.0 * PI * v).ln() - r * r / (2.0 * v)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Default => "default",
            Convention::PaperLiteral => "paper-literal",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "default" => Ok(Convention::Default),
            "paper-literal" | "paper_literal" => Ok(Convention::PaperLiteral),
            other => Err(Error::invalid(
                "convention",
                format!("expected `default` or `paper-literal`, got `{other}`"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels() {
        let d = Convention::Default.heat_kernel(3, 1.0, 0.0);
        assert!((d - (4.0 * PI).powf(-1.5)).abs() < 1e-15);
        let p = Convention::PaperLiteral.heat_kernel(1, 1.0, 1.0);
        assert!((p - (-0.5f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn symbol_arguments() {
        assert_eq!(Convention::Default.symbol_argument(3.0), 9.0);
        assert_eq!(Convention::PaperLiteral.symbol_argument(3.0), 4.5);
    }

    #[test]
    fn parse_round_trip() {
        for c in [Convention::Default, Convention::PaperLiteral] {
            assert_eq!(c.as_str().parse::<Convention>().unwrap(), c);
        }
        assert!("other".parse::<Convention>().is_err());
    }
}
