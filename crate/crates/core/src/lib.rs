//! Numerical analysis of the nonlocal fractional boundary value problem
//!
//! ```text
//! D^alpha u(t) + f(t, u(t)) = 0,            t in (0,1),  2 < alpha <= 3,
//! u(0) = u''(0) = 0,
//! u(1) = mu*u(eta) + beta * integral_0^1 u(s) dA(s),
//! ```
//!
//! where `D^alpha` is the Caputo derivative and `A` is a function of bounded
//! variation (the boundary term is a Riemann-Stieltjes integral against a
//! signed measure `dA`).
//!
//! The crate provides:
//!
//! * [`measures`] — signed measures (atoms + density) and Riemann-Stieltjes
//!   integration against them,
//! * [`quadrature`] — breakpoint-aware composite Gauss-Legendre rules,
//! * [`kernel`] — the Green's function `G`, the nonlocal kernel `H`, the
//!   bounding functions `Psi`, `Phi`, `rho`, the constant `Lambda`, and the
//!   admissibility hypotheses,
//! * [`spectral`] — the spectral-radius sandwich `tau1 <= r(K) <= tau2`,
//!   Nystrom discretization, power iteration, and a Gelfand-formula check,
//! * [`existence`] — growth-envelope certificates for existence of a
//!   positive solution,
//! * [`solver`] — the linear solve `u = int H h`, damped Picard iteration
//!   for the nonlinear problem, and residual verification,
//! * [`expr`] — a small expression language for nonlinearities and densities,
//! * [`selftest`] — seeded randomized invariant suites.

pub mod error;
pub mod existence;
pub mod expr;
pub mod grid;
pub mod kernel;
pub mod measures;
pub mod quadrature;
pub mod selftest;
pub mod solver;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use existence::{
    CertifyOptions, CheckOutcome, CheckStatus, ExistenceCertificate, GrowthEnvelope,
};
pub use grid::GridFunction;
pub use kernel::{HypothesisReport, KernelContext, Nonlinearity, ProblemSpec};
pub use measures::SignedMeasure;
pub use quadrature::QuadSettings;
pub use solver::{SolveOptions, SolveReport};
pub use spectral::{DenseMatrix, PowerIterationOutcome, SpectralBounds, SpectralOptions};
