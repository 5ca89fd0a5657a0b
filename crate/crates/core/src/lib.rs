//! Radial Lévy processes obtained by subordinating Brownian motion.
//!
//! The crate evaluates Bernstein functions and the laws of the matching
//! subordinators, computes transition densities `p_t^k` and Lévy densities
//! `m_k` of `X_t = B(S_t)` in any dimension `k` by two independent routes
//! (Gaussian mixture against the subordinator law, radial Fourier inversion
//! of `exp(-t f(|ξ|²))`), and checks the identities linking dimensions:
//! the dimension walk `p^{k+2} = -(2π r)^{-1} d/dr p^k`, complete
//! monotonicity, the Hartman–Wintner condition, generator intertwining and a
//! gradient bound for the one-dimensional semigroup.
//!
//! Fourier convention throughout:
//!
//! ```text
//! F_k u(ξ)      = (2π)^{-k} ∫ e^{-i x·ξ} u(x) dx
//! F_k^{-1} u(ξ) =           ∫ e^{+i x·ξ} u(x) dx
//! ```
//!
//! so for radial `u`, `F_k^{-1} u = (2π)^k F_k u`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod catalog;
pub mod cli;
pub mod convention;
pub mod error;
pub mod export;
pub mod generator;
pub mod numerics;
pub mod radial;
pub mod report;
pub mod simulation;
pub mod subordinator;
pub mod transition;

pub use bernstein::{BernsteinSpec, HwVerdict, LevyMeasure};
pub use convention::Convention;
pub use error::{Error, Result};
pub use numerics::QuadratureConfig;
pub use radial::RadialProfile;
pub use report::{SimulationReport, VerificationReport};
pub use subordinator::SubordinatorModel;
pub use transition::{LevyDensity, Route, TransitionDensity};
