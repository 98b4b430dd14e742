//! Linear and nonlinear solves via the kernel representation
//! `u(t) = int_0^1 H(t,s) h(s) ds`.
//!
//! The nonlinear problem is the fixed point `u = Au` with `(Au)(t) =
//! int_0^1 H(t,s) f(s, u(s)) ds`, attacked by damped Picard iteration inside
//! the cone of nonnegative functions. Existence comes from index theory, not
//! from a contraction, so convergence is monitored rather than assumed: the
//! damping factor halves itself when the residual history oscillates, and a
//! non-converged run returns its best iterate in the report instead of
//! raising an error.

use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};
use crate::kernel::{KernelContext, Nonlinearity};
use crate::measures;
use crate::quadrature::{self, QuadratureRule};

/// Iteration controls for [`picard_solve`] and grid defaults for the solves.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stop when `||u - Au||_inf` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping factor in (0, 1].
    pub damping: f64,
    /// Requested node count before breakpoints are merged in.
    pub grid_size: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            damping: 0.5,
            grid_size: 257,
        }
    }
}

/// Damping never drops below this during auto-tuning.
const MIN_DAMPING: f64 = 1.0 / 16.0;
/// Consecutive residual increases tolerated before halving the damping.
const OSCILLATION_WINDOW: usize = 5;
/// Test points for the integral-identity residual.
const IDENTITY_TEST_POINTS: usize = 33;

/// Outcome and diagnostics of a solve or a verification pass.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||u - Au||_inf` over the grid nodes.
    pub fixed_point_residual: f64,
    /// `max(|u(1) - mu u(eta) - beta gamma[u]|, |u(0)|)`.
    pub bc_residual: f64,
    /// Residual of the equivalent integral identity
    /// `u(t) = -I^alpha[g](t) + t (u(1) + I^alpha[g](1))` with `g = f(., u)`.
    pub reformulation_residual: f64,
    pub min_value: f64,
    pub sup_norm: f64,
    pub converged: bool,
    pub damping_used: f64,
}

/// Precomputed quadrature of `t -> int_0^1 H(t,s) w(s) ds` on a fixed grid:
/// per output node, the `s` samples (split at the kernel kink `s = t` and at
/// all measure breakpoints), premultiplied kernel weights, and interpolation
/// stencils against the same grid.
pub struct OperatorApplicator {
    nodes: Vec<f64>,
    rows: Vec<ApplicatorRow>,
    degree: usize,
}

struct ApplicatorRow {
    s: Vec<f64>,
    /// `H(t_i, s_j) * w_j`
    hw: Vec<f64>,
    stencil_start: Vec<usize>,
    stencil_weights: Vec<f64>,
    width: usize,
}

impl OperatorApplicator {
    /// Build the plan for the given output grid.
    pub fn new(ctx: &KernelContext, nodes: &[f64], degree: usize) -> Result<Self> {
        ctx.require_subcritical()?;
        let quad = *ctx.quad();
        let base_breaks = ctx.kernel_breakpoints();
        let width = (degree + 1).min(nodes.len());
        let mut rows = Vec::with_capacity(nodes.len());
        let mut breaks = base_breaks.clone();
        for &t in nodes {
            breaks.push(t);
            let rule = QuadratureRule::new(0.0, 1.0, &breaks, quad.order, quad.panels_per_segment)?;
            breaks.pop();
            let s = rule.nodes().to_vec();
            let hw: Vec<f64> = s
                .iter()
                .zip(rule.weights())
                .map(|(&sj, &wj)| ctx.h_value(t, sj) * wj)
                .collect();
            let mut stencil_start = Vec::with_capacity(s.len());
            let mut stencil_weights = Vec::with_capacity(s.len() * width);
            for &sj in &s {
                let (start, weights) = grid::stencil(nodes, degree, sj);
                stencil_start.push(start);
                stencil_weights.extend_from_slice(&weights);
            }
            rows.push(ApplicatorRow {
                s,
                hw,
                stencil_start,
                stencil_weights,
                width,
            });
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            rows,
            degree,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Apply with an arbitrary integrand factor `w(s, u(s))`.
    fn apply_with<W>(&self, values: &[f64], mut w: W) -> Result<Vec<f64>>
    where
        W: FnMut(f64, f64) -> Result<f64>,
    {
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut acc = 0.0;
            for (j, &sj) in row.s.iter().enumerate() {
                let start = row.stencil_start[j];
                let wts = &row.stencil_weights[j * row.width..(j + 1) * row.width];
                let u_s: f64 = wts
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| c * values[start + k])
                    .sum();
                acc += row.hw[j] * w(sj, u_s)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `(Au)(t_i) = int_0^1 H(t_i, s) f(s, u(s)) ds` at every grid node.
    pub fn apply(&self, values: &[f64], f: &Nonlinearity) -> Result<Vec<f64>> {
        self.apply_with(values, |s, u_s| {
            f.eval(s, u_s).map_err(|e| Error::NonlinearityEval {
                s,
                u: u_s,
                source: Box::new(e),
            })
        })
    }
}

/// Default solve grid: clustered nodes merged with all measure breakpoints
/// and the nonlocal point `eta`.
pub fn solve_nodes(ctx: &KernelContext, grid_size: usize) -> Vec<f64> {
    let mut extra = ctx.breakpoints();
    extra.push(ctx.spec().eta);
    grid::clustered_nodes(grid_size, &extra)
}

/// `(Au)(t) = int_0^1 H(t,s) f(s, u(s)) ds` evaluated at `u`'s nodes.
pub fn apply_operator(
    ctx: &KernelContext,
    f: &Nonlinearity,
    u: &GridFunction,
) -> Result<GridFunction> {
    let plan = OperatorApplicator::new(ctx, u.nodes(), u.degree())?;
    let values = plan.apply(u.values(), f)?;
    u.with_values(values)
}

/// Unique solution of the linear problem with forcing `h`:
/// `u(t) = int_0^1 H(t,s) h(s) ds`.
pub fn solve_linear<F>(ctx: &KernelContext, h: F, opts: &SolveOptions) -> Result<GridFunction>
where
    F: Fn(f64) -> f64,
{
    let nodes = solve_nodes(ctx, opts.grid_size);
    let plan = OperatorApplicator::new(ctx, &nodes, 3)?;
    let zeros = vec![0.0; nodes.len()];
    let values = plan.apply_with(&zeros, |s, _| {
        let v = h(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteSample { at: s })
        }
    })?;
    GridFunction::new(nodes, values, 3)
}

/// Damped Picard iteration `u <- (1 - omega) u + omega Au`, projected onto
/// the cone (negative nodal values are clamped to zero) after every step.
///
/// Non-convergence is reported, not raised: the best iterate comes back with
/// `converged = false`.
pub fn picard_solve(
    ctx: &KernelContext,
    f: &Nonlinearity,
    u0: Option<&GridFunction>,
    opts: &SolveOptions,
) -> Result<(GridFunction, SolveReport)> {
    let nodes = match u0 {
        Some(g) => g.nodes().to_vec(),
        None => solve_nodes(ctx, opts.grid_size),
    };
    let plan = OperatorApplicator::new(ctx, &nodes, 3)?;

    // start from A(0), the image of the zero function, unless told otherwise
    let mut values = match u0 {
        Some(g) => g.values().to_vec(),
        None => plan.apply(&vec![0.0; nodes.len()], f)?,
    };

    let mut omega = opts.damping.clamp(MIN_DAMPING, 1.0);
    let mut prev_residual = f64::INFINITY;
    let mut increases = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for k in 1..=opts.max_iter {
        iterations = k;
        let image = plan.apply(&values, f)?;
        let residual = values
            .iter()
            .zip(&image)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        if residual <= opts.tol {
            converged = true;
            break;
        }
        if residual > prev_residual {
            increases += 1;
            if increases >= OSCILLATION_WINDOW && omega > MIN_DAMPING {
                omega = (omega * 0.5).max(MIN_DAMPING);
                increases = 0;
            }
        } else {
            increases = 0;
        }
        prev_residual = residual;
        for (v, &a) in values.iter_mut().zip(&image) {
            *v = ((1.0 - omega) * *v + omega * a).max(0.0);
        }
    }

    let u = GridFunction::new(nodes, values, 3)?;
    let mut report = verify_solution(ctx, f, &u, opts)?;
    report.iterations = iterations;
    report.converged = converged;
    report.damping_used = omega;
    Ok((u, report))
}

/// Recompute all residuals of a candidate solution:
/// the fixed-point residual, the boundary-condition residual, and the
/// residual of the integral identity the differential equation is equivalent
/// to, the latter with the Riemann-Liouville integral `I^alpha[g]` evaluated
/// by direct quadrature of `(t-s)^{alpha-1} g(s) / Gamma(alpha)`.
pub fn verify_solution(
    ctx: &KernelContext,
    f: &Nonlinearity,
    u: &GridFunction,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let spec = ctx.spec();
    let quad = *ctx.quad();

    // (i) fixed-point residual
    let image = apply_operator(ctx, f, u)?;
    let fixed_point_residual = u.sup_distance(&image);

    // (ii) boundary residuals
    let gamma_u = measures::rs_integral(|s| u.eval(s), &spec.measure, quad.order)?;
    let at_one = u.eval(1.0);
    let nonlocal = (at_one - spec.mu * u.eval(spec.eta) - spec.beta * gamma_u).abs();
    let at_zero = u.eval(0.0).abs();
    let bc_residual = nonlocal.max(at_zero);

    // (iii) integral-identity residual at spread-out test points
    let g = |s: f64| -> Result<f64> {
        f.eval(s, u.eval(s)).map_err(|e| Error::NonlinearityEval {
            s,
            u: u.eval(s),
            source: Box::new(e),
        })
    };
    let breakpoints = ctx.breakpoints();
    let frac_integral = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut err = None;
        let v = quadrature::integrate(
            |s| match g(s) {
                Ok(v) => (t - s).powf(spec.alpha - 1.0) * v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            0.0,
            t,
            &breakpoints,
            quad.order,
            quad.panels_per_segment,
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(v? / ctx.gamma_alpha())
    };
    let i_at_one = frac_integral(1.0)?;
    let mut reformulation_residual = 0.0f64;
    for i in 0..IDENTITY_TEST_POINTS {
        let t = i as f64 / (IDENTITY_TEST_POINTS - 1) as f64;
        let lhs = u.eval(t) + frac_integral(t)? - t * (at_one + i_at_one);
        reformulation_residual = reformulation_residual.max(lhs.abs());
    }

    Ok(SolveReport {
        iterations: 0,
        fixed_point_residual,
        bc_residual,
        reformulation_residual,
        min_value: u.min_value(),
        sup_norm: u.max_norm(),
        converged: fixed_point_residual <= opts.tol,
        damping_used: opts.damping,
    })
}
