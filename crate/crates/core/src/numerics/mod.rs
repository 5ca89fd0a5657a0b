//! Special functions and quadrature shared by every other module.

mod bessel;
pub(crate) mod finite_diff;
mod gamma;
mod oscillatory;
mod quadrature;
mod summation;

pub(crate) use bessel::j_nu;
pub use bessel::{bessel_j, bessel_j_zero_approx};
pub use finite_diff::{
    central_weights, finite_diff, finite_diff_with_scale, five_point_derivative, noise_floor, FD_NOISE_C,
};
pub use gamma::{gamma, ln_gamma};
pub use oscillatory::{integrate_bessel, integrate_bessel_with, wynn_epsilon};
pub use quadrature::{integrate, integrate_breaks, integrate_log, Domain, Estimate};
pub use summation::NeumaierSum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and work limits for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the number of Gauss–Kronrod intervals per adaptive call.
    pub max_subdivisions: usize,
    /// Upper bound on the number of zero-aligned panels in a Bessel integral.
    pub oscillatory_blocks: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_subdivisions: 4000,
            oscillatory_blocks: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let cfg = QuadratureConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::invalid("rel_tol", "must be a positive finite number"));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::invalid("abs_tol", "must be a positive finite number"));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::invalid("max_subdivisions", "must be at least 16"));
        }
        if self.oscillatory_blocks < 1 {
            return Err(Error::invalid("oscillatory_blocks", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Surface area of the unit sphere in `R^k`: `2 π^{k/2} / Γ(k/2)`.
pub fn sphere_surface(k: usize) -> f64 {
    let half = k as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}
