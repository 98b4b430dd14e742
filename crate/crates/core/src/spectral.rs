//! Spectral-radius bounds for the integral operator `(Ku)(t) = int_0^1
//! H(t,s) u(s) ds`.
//!
//! Two computable constants sandwich the spectral radius, `tau1 <= r(K) <=
//! tau2`, and scaling the operator scales all three linearly. The radius
//! itself is estimated by Nystrom discretization (composite Gauss nodes with
//! measure breakpoints as panel edges) followed by power iteration, which is
//! adequate here because the kernel is nonnegative: the dominant eigenpair
//! is a Perron pair, reachable from a positive start vector without complex
//! arithmetic. A Gelfand-formula sequence `(||K^k||_inf)^{1/k}` gives an
//! independent family of upper witnesses.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::KernelContext;
use crate::quadrature::{self, QuadratureRule};

/// Dense row-major square matrix; just enough linear algebra for power
/// iteration and norm estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::BadMatrixShape {
                rows: n,
                len: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n);
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.data[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }
}

/// Nystrom discretization of `K`: matrix `M[i][j] = H(t_i, s_j) w_j` on a
/// shared node set, plus the nodes and weights for interpolation.
#[derive(Debug, Clone)]
pub struct NystromDiscretization {
    pub matrix: DenseMatrix,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Lower bound `tau1 = int_0^1 rho(s) Phi(s) ds`, spelled out as
/// `(eta - eta^{alpha-1})/(1 - Lambda) * int (s - s^{alpha-1})
/// (beta g_A(s) + (mu - Lambda + 1) Psi(s)) ds`.
pub fn tau1(ctx: &KernelContext) -> Result<f64> {
    ctx.require_subcritical()?;
    let spec = ctx.spec();
    let (alpha, eta, mu, beta) = (spec.alpha, spec.eta, spec.mu, spec.beta);
    let lambda = ctx.lambda();
    let quad = *ctx.quad();
    let integral = quadrature::integrate(
        |s| {
            (s - s.powf(alpha - 1.0))
                * (beta * ctx.g_weight_value(s) + (mu - lambda + 1.0) * ctx.psi_value(s))
        },
        0.0,
        1.0,
        &ctx.kernel_breakpoints(),
        quad.order,
        quad.panels_per_segment,
    )?;
    Ok((eta - eta.powf(alpha - 1.0)) / (1.0 - lambda) * integral)
}

/// Upper bound `tau2 = (beta int g_A + (mu - Lambda + 1)/Gamma(alpha+1)) / (1 - Lambda)`.
pub fn tau2(ctx: &KernelContext) -> Result<f64> {
    ctx.require_subcritical()?;
    let spec = ctx.spec();
    let lambda = ctx.lambda();
    Ok(
        (spec.beta * ctx.int_g_a() + (spec.mu - lambda + 1.0) / ctx.gamma_alpha_plus_1())
            / (1.0 - lambda),
    )
}

/// Build the Nystrom matrix with at least `n` nodes. Panel edges include
/// every measure breakpoint and the nonlocal point `eta`; each segment is
/// tiled with enough equal panels of the context's Gauss order to reach the
/// requested size.
pub fn nystrom_matrix(ctx: &KernelContext, n: usize) -> Result<NystromDiscretization> {
    ctx.require_subcritical()?;
    if n < 8 {
        return Err(Error::NystromTooCoarse(n));
    }
    let order = ctx.quad().order.min(n);
    let breakpoints = ctx.kernel_breakpoints();
    let segments = breakpoints.len() - 1;
    let panels_needed = n.div_ceil(order);
    let panels_per_segment = panels_needed.div_ceil(segments).max(1);
    let rule = QuadratureRule::ungraded(0.0, 1.0, &breakpoints, order, panels_per_segment)?;

    let nodes = rule.nodes().to_vec();
    let weights = rule.weights().to_vec();
    let size = nodes.len();
    let mut data = vec![0.0; size * size];
    // g_A varies only with the column, so hoist it out of the row loop
    let g_col: Vec<f64> = nodes.iter().map(|&s| ctx.g_weight_value(s)).collect();
    let g_eta: Vec<f64> = nodes
        .iter()
        .map(|&s| ctx.g_value(ctx.spec().eta, s))
        .collect();
    let spec = ctx.spec();
    let resolvent = 1.0 / (1.0 - ctx.lambda());
    for (i, &t) in nodes.iter().enumerate() {
        let row = &mut data[i * size..(i + 1) * size];
        for (j, &s) in nodes.iter().enumerate() {
            let h = t * resolvent * (spec.beta * g_col[j] + spec.mu * g_eta[j]) + ctx.g_value(t, s);
            row[j] = h * weights[j];
        }
    }
    Ok(NystromDiscretization {
        matrix: DenseMatrix::from_rows(size, data)?,
        nodes,
        weights,
    })
}

/// Converged Perron pair: ratio estimate `r`, eigenvector with unit max-norm,
/// and the residual `||Mv - rv||_inf`.
#[derive(Debug, Clone)]
pub struct PowerIterationOutcome {
    pub r: f64,
    pub v: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Power iteration from the all-ones start vector. Requires a nonnegative
/// matrix; the estimate is the max-norm growth ratio and convergence is
/// declared on the eigen-residual.
pub fn power_iteration(
    m: &DenseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<PowerIterationOutcome> {
    for i in 0..m.n() {
        for j in 0..m.n() {
            let v = m.entry(i, j);
            if v < 0.0 {
                return Err(Error::NegativeMatrixEntry { i, j, value: v });
            }
        }
    }
    let n = m.n();
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut r = 0.0;
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        m.matvec(&v, &mut w);
        r = max_norm(&w);
        if r == 0.0 {
            // zero image: the radius is 0 and any vector is a witness
            return Ok(PowerIterationOutcome {
                r: 0.0,
                v,
                residual: 0.0,
                iterations: k,
            });
        }
        residual = v
            .iter()
            .zip(&w)
            .fold(0.0f64, |acc, (&vi, &wi)| acc.max((wi - r * vi).abs()));
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / r;
        }
        if residual <= tol {
            return Ok(PowerIterationOutcome {
                r,
                v,
                residual,
                iterations: k,
            });
        }
    }
    Err(Error::PowerIterationStalled {
        r,
        residual,
        iterations: max_iter,
    })
}

/// Gelfand sequence `(||M^k||_inf)^{1/k}` for `k = 1..=n_max`.
///
/// For a nonnegative matrix the infinity norm of `M^k` is the largest entry
/// of `M^k * 1`, so the powers are tracked as a vector iteration. The vector
/// is renormalized every step and the accumulated log-scale corrects the
/// root, which keeps the computation overflow-free for any radius.
pub fn gelfand_check(m: &DenseMatrix, n_max: usize) -> Result<Vec<f64>> {
    for i in 0..m.n() {
        for j in 0..m.n() {
            let v = m.entry(i, j);
            if v < 0.0 {
                return Err(Error::NegativeMatrixEntry { i, j, value: v });
            }
        }
    }
    let n = m.n();
    let mut ones = vec![1.0; n];
    let mut image = vec![0.0; n];
    let mut log_norm = 0.0f64;
    let mut out = Vec::with_capacity(n_max);
    for k in 1..=n_max.max(1) {
        m.matvec(&ones, &mut image);
        let c = max_norm(&image);
        if c == 0.0 {
            // nilpotent tail: every later norm is zero
            out.resize(n_max.max(1), 0.0);
            return Ok(out);
        }
        log_norm += c.ln();
        // k = 1 is the plain max row sum; exp(ln c) would round it
        out.push(if k == 1 {
            c
        } else {
            (log_norm / k as f64).exp()
        });
        for (o, i) in ones.iter_mut().zip(&image) {
            *o = i / c;
        }
    }
    Ok(out)
}

/// Spectral summary: the sandwich, the discrete radius estimate, and the
/// Perron eigenfunction extended back to [0, 1] by Nystrom interpolation.
#[derive(Debug, Clone)]
pub struct SpectralBounds {
    pub tau1: f64,
    pub tau2: f64,
    pub r_estimate: f64,
    pub eigenfunction: GridFunction,
    pub n_nodes: usize,
    pub residual: f64,
    /// |r(n) - r(2n)| from one mesh doubling.
    pub mesh_error: f64,
    /// True when the discretized operator annihilates the start vector.
    pub degenerate: bool,
}

/// Controls for [`spectral_bounds`].
#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Requested Nystrom size; the estimate itself uses the doubled mesh.
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n: 256,
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

/// Compute the sandwich and the Nystrom/power-iteration estimate at `n` and
/// `2n` nodes; the doubled mesh provides the reported estimate and the
/// difference is the mesh error.
pub fn spectral_bounds(ctx: &KernelContext, opts: &SpectralOptions) -> Result<SpectralBounds> {
    let t1 = tau1(ctx)?;
    let t2 = tau2(ctx)?;

    let coarse = nystrom_matrix(ctx, opts.n)?;
    let fine = nystrom_matrix(ctx, 2 * opts.n)?;
    let coarse_out = power_iteration(&coarse.matrix, opts.tol, opts.max_iter)?;
    let fine_out = power_iteration(&fine.matrix, opts.tol, opts.max_iter)?;

    let degenerate = fine_out.r == 0.0;
    let eigenfunction = extend_eigenfunction(ctx, &fine, &fine_out)?;

    Ok(SpectralBounds {
        tau1: t1,
        tau2: t2,
        r_estimate: fine_out.r,
        eigenfunction,
        n_nodes: fine.nodes.len(),
        residual: fine_out.residual,
        mesh_error: (fine_out.r - coarse_out.r).abs(),
        degenerate,
    })
}

/// Nystrom natural interpolation `phi(t) = (1/r) sum_j H(t, s_j) w_j v_j`,
/// evaluated on the quadrature nodes extended with both endpoints, then
/// normalized to unit max-norm.
fn extend_eigenfunction(
    ctx: &KernelContext,
    disc: &NystromDiscretization,
    pair: &PowerIterationOutcome,
) -> Result<GridFunction> {
    let mut nodes = Vec::with_capacity(disc.nodes.len() + 2);
    nodes.push(0.0);
    nodes.extend_from_slice(&disc.nodes);
    nodes.push(1.0);
    nodes.dedup();

    if pair.r == 0.0 {
        return GridFunction::new(nodes.clone(), vec![0.0; nodes.len()], 3);
    }
    let mut values = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let acc: f64 = disc
            .nodes
            .iter()
            .zip(&disc.weights)
            .zip(&pair.v)
            .map(|((&s, &w), &vj)| ctx.h_value(t, s) * w * vj)
            .sum();
        values.push(acc / pair.r);
    }
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    GridFunction::new(nodes, values, 3)
}

/// Rescale the bounds for the operator `a*K`: `tau1`, `tau2`, the radius
/// estimate, and the residual all scale by `a`; the eigenfunction does not.
pub fn scale_radius(a: f64, bounds: &SpectralBounds) -> Result<SpectralBounds> {
    if a <= 0.0 || a.is_nan() {
        return Err(Error::NonPositiveScale(a));
    }
    let mut scaled = bounds.clone();
    scaled.tau1 *= a;
    scaled.tau2 *= a;
    scaled.r_estimate *= a;
    scaled.residual *= a;
    scaled.mesh_error *= a;
    Ok(scaled)
}
