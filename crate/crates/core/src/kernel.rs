//! Green's function, nonlocal kernel, and admissibility hypotheses.
//!
//! For `2 < alpha <= 3` the linear problem `D^alpha u + h = 0`, `u(0) =
//! u''(0) = 0`, `u(1) = mu*u(eta) + beta*gamma[u]` has the solution
//! `u(t) = int_0^1 H(t,s) h(s) ds` with
//!
//! ```text
//! H(t,s) = beta*t/(1-Lambda) * g_A(s) + mu*t/(1-Lambda) * G(eta,s) + G(t,s),
//! G(t,s) = [ t(1-s)^{alpha-1} - (t-s)^{alpha-1} ] / Gamma(alpha)   (s <= t),
//!          [ t(1-s)^{alpha-1} ] / Gamma(alpha)                     (t <= s),
//! ```
//!
//! where `Lambda = mu*eta + beta*gamma[t]` and `g_A(s) = int_0^1 G(t,s)
//! dA(t)`. The operator theory rests on two hypotheses: `H1: 0 <= Lambda <
//! 1` and `H2: g_A >= 0 on [0,1]`, plus the pointwise bounds
//! `(t - t^{alpha-1}) Psi(s) <= G(t,s) <= Psi(s)` and
//! `rho(t) Phi(s) <= H(t,s) <= Phi(s)`.

use crate::error::{Error, Result};
use crate::expr::{self, Expression};
use crate::grid::{self, GridFunction};
use crate::measures::{self, SignedMeasure};
use crate::quadrature::{self, QuadSettings};
use crate::special;
use std::fmt;
use std::sync::Arc;

/// Node count of the cached density contribution to `g_A`.
const G_TABLE_NODES: usize = 1025;
/// Panels per segment when tabulating the density contribution.
const G_TABLE_PANELS: usize = 8;
/// Sampling slack for the sign check of `g_A` in H2.
pub const H2_TOL: f64 = 1e-10;

/// The nonlinearity `f(t, x)`: a parsed expression over `{t, u}` or a
/// built-in closure.
#[derive(Clone)]
pub enum Nonlinearity {
    Expr(Expression),
    Builtin(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Nonlinearity {
    pub fn from_expr(expr: Expression) -> Self {
        Nonlinearity::Expr(expr)
    }

    /// Parse an expression over the variables `t` and `u`.
    pub fn parse(source: &str) -> Result<Self> {
        Ok(Nonlinearity::Expr(expr::parse(source, &["t", "u"])?))
    }

    pub fn builtin<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Nonlinearity::Builtin(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Self::builtin(move |_, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        match self {
            Nonlinearity::Expr(e) => expr::evaluate(e, &[("t", t), ("u", x)]),
            Nonlinearity::Builtin(f) => {
                let v = f(t, x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteResult)
                }
            }
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Expr(e) => write!(f, "Nonlinearity::Expr({e})"),
            Nonlinearity::Builtin(_) => write!(f, "Nonlinearity::Builtin(..)"),
        }
    }
}

/// All boundary data of the problem: order, nonlocal coefficients, measure,
/// and nonlinearity.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub mu: f64,
    pub eta: f64,
    pub beta: f64,
    pub measure: SignedMeasure,
    pub nonlinearity: Nonlinearity,
    lambda: f64,
}

impl ProblemSpec {
    pub fn new(
        alpha: f64,
        mu: f64,
        eta: f64,
        beta: f64,
        measure: SignedMeasure,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        if !(alpha > 2.0 && alpha <= 3.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::EtaOutOfRange(eta));
        }
        if mu < 0.0 || mu.is_nan() {
            return Err(Error::MuNegative(mu));
        }
        if beta < 0.0 || beta.is_nan() {
            return Err(Error::BetaNegative(beta));
        }
        let gamma_of_t = measures::rs_integral(|t| t, &measure, QuadSettings::default().order)?;
        let lambda = mu * eta + beta * gamma_of_t;
        Ok(Self {
            alpha,
            mu,
            eta,
            beta,
            measure,
            nonlinearity,
            lambda,
        })
    }

    /// `Lambda = mu*eta + beta*gamma[t]`, fixed at construction.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// H1: `0 <= Lambda < 1`.
    pub fn is_admissible(&self) -> bool {
        self.lambda >= 0.0 && self.lambda < 1.0
    }
}

/// `Lambda = mu*eta + beta*gamma[t]` as cached on the spec.
pub fn lambda_const(spec: &ProblemSpec) -> f64 {
    spec.lambda()
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

#[inline]
fn g_raw(t: f64, s: f64, alpha: f64, inv_gamma_alpha: f64) -> f64 {
    let q = (1.0 - s).powf(alpha - 1.0);
    if s <= t {
        (t * q - (t - s).powf(alpha - 1.0)) * inv_gamma_alpha
    } else {
        t * q * inv_gamma_alpha
    }
}

/// The Green's function `G(t, s)` of the local part of the problem.
pub fn green_g(t: f64, s: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha <= 3.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(g_raw(t, s, alpha, 1.0 / special::gamma(alpha)))
}

/// Upper envelope `Psi(s) = (1-s)^{alpha-1} / Gamma(alpha)` of `G`.
pub fn psi(s: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha <= 3.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    check_unit("s", s)?;
    Ok((1.0 - s).powf(alpha - 1.0) / special::gamma(alpha))
}

/// `max_{t in [0,1]} (t - t^{alpha-1}) = (alpha-2) / (alpha-1)^{(alpha-1)/(alpha-2)}`,
/// attained at `t = (alpha-1)^{-1/(alpha-2)}`.
pub fn rho_max(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 && alpha <= 3.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok((alpha - 2.0) / (alpha - 1.0).powf((alpha - 1.0) / (alpha - 2.0)))
}

/// Immutable evaluation context: validated spec, cached constants, and the
/// tabulated density contribution to `g_A`.
#[derive(Debug, Clone)]
pub struct KernelContext {
    spec: ProblemSpec,
    quad: QuadSettings,
    gamma_alpha: f64,
    gamma_alpha_plus_1: f64,
    /// Cache of `s -> int_0^1 G(t,s) density(t) dt`; `None` for atom-only
    /// measures, which are summed exactly on demand.
    density_g_table: Option<GridFunction>,
    /// `int_0^1 g_A(s) ds`, via Fubini: `int_0^1 (t - t^alpha)/Gamma(alpha+1) dA(t)`.
    int_g_a: f64,
}

impl KernelContext {
    pub fn new(spec: ProblemSpec, quad: QuadSettings) -> Result<Self> {
        let gamma_alpha = special::gamma(spec.alpha);
        let gamma_alpha_plus_1 = spec.alpha * gamma_alpha;
        let alpha = spec.alpha;

        let density_g_table = match spec.measure.density() {
            None => None,
            Some(density) => {
                let inv_g = 1.0 / gamma_alpha;
                let mut t_breaks = density.breakpoints().to_vec();
                let nodes = grid::clustered_nodes(G_TABLE_NODES, &spec.measure.breakpoints());
                let mut values = Vec::with_capacity(nodes.len());
                for &s in &nodes {
                    t_breaks.push(s);
                    let v = quadrature::integrate(
                        |t| g_raw(t, s, alpha, inv_g) * density.eval(t),
                        0.0,
                        1.0,
                        &t_breaks,
                        quad.order,
                        G_TABLE_PANELS,
                    )?;
                    t_breaks.pop();
                    values.push(v);
                }
                Some(GridFunction::new(nodes, values, 3)?)
            }
        };

        let int_g_a = measures::rs_integral(
            |t| (t - t.powf(alpha)) / gamma_alpha_plus_1,
            &spec.measure,
            quad.order,
        )?;

        Ok(Self {
            spec,
            quad,
            gamma_alpha,
            gamma_alpha_plus_1,
            density_g_table,
            int_g_a,
        })
    }

    pub fn with_defaults(spec: ProblemSpec) -> Result<Self> {
        Self::new(spec, QuadSettings::default())
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn quad(&self) -> &QuadSettings {
        &self.quad
    }

    pub fn lambda(&self) -> f64 {
        self.spec.lambda()
    }

    pub fn gamma_alpha(&self) -> f64 {
        self.gamma_alpha
    }

    pub fn gamma_alpha_plus_1(&self) -> f64 {
        self.gamma_alpha_plus_1
    }

    /// Cached `int_0^1 g_A(s) ds`.
    pub fn int_g_a(&self) -> f64 {
        self.int_g_a
    }

    /// The tabulated density contribution to `g_A`, when a density is present.
    pub fn density_g_table(&self) -> Option<&GridFunction> {
        self.density_g_table.as_ref()
    }

    /// Errors unless `Lambda < 1` (the resolvent of the boundary condition
    /// exists and is positive only then).
    pub fn require_subcritical(&self) -> Result<()> {
        if self.lambda() < 1.0 {
            Ok(())
        } else {
            Err(Error::H1Violated(self.lambda()))
        }
    }

    /// Sorted union of `{0,1}`, atom locations, and density breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.spec.measure.breakpoints()
    }

    /// Breakpoints of `s -> H(t, s)`: the measure's own, plus `eta` where
    /// the `G(eta, s)` term loses smoothness.
    pub fn kernel_breakpoints(&self) -> Vec<f64> {
        let mut pts = self.spec.measure.breakpoints();
        pts.push(self.spec.eta);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    #[inline]
    pub(crate) fn g_value(&self, t: f64, s: f64) -> f64 {
        g_raw(t, s, self.spec.alpha, 1.0 / self.gamma_alpha)
    }

    pub(crate) fn psi_value(&self, s: f64) -> f64 {
        (1.0 - s).powf(self.spec.alpha - 1.0) / self.gamma_alpha
    }

    pub(crate) fn g_weight_value(&self, s: f64) -> f64 {
        let atoms: f64 = self
            .spec
            .measure
            .atoms()
            .iter()
            .map(|a| a.weight * self.g_value(a.location, s))
            .sum();
        let density = match &self.density_g_table {
            None => 0.0,
            Some(table) => table.eval(s),
        };
        atoms + density
    }

    #[inline]
    pub(crate) fn h_value(&self, t: f64, s: f64) -> f64 {
        let spec = &self.spec;
        let resolvent = t / (1.0 - spec.lambda());
        let nonlocal = if spec.beta != 0.0 {
            spec.beta * self.g_weight_value(s)
        } else {
            0.0
        } + if spec.mu != 0.0 {
            spec.mu * self.g_value(spec.eta, s)
        } else {
            0.0
        };
        resolvent * nonlocal + self.g_value(t, s)
    }

    pub(crate) fn phi_value(&self, s: f64) -> f64 {
        let spec = &self.spec;
        let lambda = spec.lambda();
        (spec.beta * self.g_weight_value(s) + (spec.mu - lambda + 1.0) * self.psi_value(s))
            / (1.0 - lambda)
    }

    pub(crate) fn rho_value(&self, t: f64) -> f64 {
        let a = self.spec.alpha - 1.0;
        let eta = self.spec.eta;
        (eta - eta.powf(a)) * (t - t.powf(a))
    }

    /// Row integral `sigma(t) = int_0^1 H(t,s) ds` in closed form, using
    /// `int_0^1 G(t,s) ds = (t - t^alpha)/Gamma(alpha+1)`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.require_subcritical()?;
        let spec = &self.spec;
        let ga1 = self.gamma_alpha_plus_1;
        let eta_row = (spec.eta - spec.eta.powf(spec.alpha)) / ga1;
        let own_row = (t - t.powf(spec.alpha)) / ga1;
        Ok(t / (1.0 - spec.lambda()) * (spec.beta * self.int_g_a + spec.mu * eta_row) + own_row)
    }
}

/// `g_A(s) = int_0^1 G(t, s) dA(t)`; exact finite sum for atom-only measures.
pub fn g_weight(ctx: &KernelContext, s: f64) -> Result<f64> {
    check_unit("s", s)?;
    Ok(ctx.g_weight_value(s))
}

/// The nonlocal kernel `H(t, s)`; requires `Lambda < 1`.
pub fn kernel_h(ctx: &KernelContext, t: f64, s: f64) -> Result<f64> {
    ctx.require_subcritical()?;
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(ctx.h_value(t, s))
}

/// Upper envelope `Phi(s)` of `H` (pointwise `H(t, s) <= Phi(s)`).
pub fn bound_phi(ctx: &KernelContext, s: f64) -> Result<f64> {
    ctx.require_subcritical()?;
    check_unit("s", s)?;
    Ok(ctx.phi_value(s))
}

/// Lower-bound weight `rho(t) = (eta - eta^{alpha-1})(t - t^{alpha-1})`,
/// with `rho(t) Phi(s) <= H(t, s)`.
pub fn bound_rho(ctx: &KernelContext, t: f64) -> Result<f64> {
    ctx.require_subcritical()?;
    check_unit("t", t)?;
    Ok(ctx.rho_value(t))
}

/// Outcome of checking H1 (exact) and H2 (sampled on a grid).
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub lambda: f64,
    pub h1_pass: bool,
    pub h2_pass: bool,
    /// Number of sample points used for H2 (grid plus breakpoints).
    pub h2_grid_size: usize,
    pub h2_min_value: f64,
    pub h2_min_at: f64,
    /// Sample locations where `g_A` dipped below the tolerance.
    pub h2_violations: Vec<f64>,
}

/// H1 is decided exactly from `Lambda`; H2 is sampled: `g_A(s) >= -tol` on a
/// uniform grid of `grid_size` points merged with all measure breakpoints.
pub fn check_hypotheses(ctx: &KernelContext, grid_size: usize) -> HypothesisReport {
    let lambda = ctx.lambda();
    let h1_pass = (0.0..1.0).contains(&lambda);

    let n = grid_size.max(2);
    let mut samples: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    samples.extend(ctx.breakpoints());
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples.dedup();

    let mut min_value = f64::INFINITY;
    let mut min_at = 0.0;
    let mut violations = Vec::new();
    for &s in &samples {
        let v = ctx.g_weight_value(s);
        if v < min_value {
            min_value = v;
            min_at = s;
        }
        if v < -H2_TOL {
            violations.push(s);
        }
    }

    HypothesisReport {
        lambda,
        h1_pass,
        h2_pass: violations.is_empty(),
        h2_grid_size: samples.len(),
        h2_min_value: min_value,
        h2_min_at: min_at,
        h2_violations: violations,
    }
}
