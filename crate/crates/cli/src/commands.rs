//! Subcommand implementations: analyze, certify, solve, greens, selftest.

use crate::config::ProblemConfig;
use crate::report::{render, render_csv, Json};
use crate::{CliError, QuadFlags};
use fracbvp_core::existence::{self, CertifyOptions, CheckOutcome, ExistenceCertificate};
use fracbvp_core::kernel::{self, KernelContext};
use fracbvp_core::selftest::{self, SelftestOptions};
use fracbvp_core::solver::{self, SolveOptions, SolveReport};
use fracbvp_core::spectral::{self, SpectralOptions};

const DEFAULT_H2_GRID: usize = 512;
const DEFAULT_ENVELOPE_GRID: usize = 200;
const DEFAULT_NYSTROM_N: usize = 256;

fn context(cfg: &ProblemConfig, quad: &QuadFlags) -> Result<KernelContext, CliError> {
    let spec = cfg.to_spec()?;
    let settings = cfg.quad_settings(quad.quad_order, quad.quad_panels, quad.quad_tol);
    KernelContext::new(spec, settings).map_err(|e| CliError::Validation(e.to_string()))
}

/// `analyze`: hypotheses, the sandwich, and the discrete radius as JSON.
pub fn analyze(cfg: &ProblemConfig, quad: &QuadFlags) -> Result<String, CliError> {
    let ctx = context(cfg, quad)?;
    let numerics = cfg.numerics();
    let hyp = kernel::check_hypotheses(&ctx, numerics.h2_grid.unwrap_or(DEFAULT_H2_GRID));

    let mut fields: Vec<(&'static str, Json)> = vec![("lambda", Json::Float(hyp.lambda))];
    if hyp.lambda < 1.0 {
        let opts = SpectralOptions {
            n: numerics.nystrom_n.unwrap_or(DEFAULT_NYSTROM_N),
            ..Default::default()
        };
        let bounds = spectral::spectral_bounds(&ctx, &opts)
            .map_err(|e| CliError::NonConvergence(e.to_string()))?;
        fields.extend([
            ("tau1", Json::Float(bounds.tau1)),
            ("tau2", Json::Float(bounds.tau2)),
            ("tau1_inv", Json::Float(1.0 / bounds.tau1)),
            ("tau2_inv", Json::Float(1.0 / bounds.tau2)),
            ("r_estimate", Json::Float(bounds.r_estimate)),
            ("n_nodes", Json::Int(bounds.n_nodes as i64)),
            ("residual", Json::Float(bounds.residual)),
            ("mesh_error", Json::Float(bounds.mesh_error)),
        ]);
    } else {
        // the resolvent does not exist; the sandwich is undefined
        for key in [
            "tau1",
            "tau2",
            "tau1_inv",
            "tau2_inv",
            "r_estimate",
            "n_nodes",
            "residual",
            "mesh_error",
        ] {
            fields.push((key, Json::Null));
        }
    }
    fields.push(("h1", Json::Bool(hyp.h1_pass)));
    fields.push(("h2", Json::Bool(hyp.h2_pass)));
    Ok(render(&Json::Object(fields)))
}

fn outcome_json(outcome: &CheckOutcome) -> Json {
    Json::Object(vec![
        ("status", Json::Str(outcome.status.as_str().into())),
        (
            "threshold",
            outcome.threshold.map_or(Json::Null, Json::Float),
        ),
        ("worst_margin", Json::Float(outcome.worst_margin)),
        (
            "worst_point",
            outcome.worst_point.map_or(Json::Null, |(t, x)| {
                Json::Array(vec![Json::Float(t), Json::Float(x)])
            }),
        ),
        (
            "grid",
            outcome.grid.map_or(Json::Null, |(n, m)| {
                Json::Array(vec![Json::Int(n as i64), Json::Int(m as i64)])
            }),
        ),
        ("detail", Json::Str(outcome.detail.clone())),
    ])
}

fn certificate_json(cert: &ExistenceCertificate) -> Json {
    Json::Object(vec![
        ("h1", outcome_json(&cert.h1)),
        ("h2", outcome_json(&cert.h2)),
        ("c1", outcome_json(&cert.c1)),
        ("c2", outcome_json(&cert.c2)),
        ("verdict", Json::Bool(cert.verdict)),
        (
            "notes",
            Json::Array(cert.notes.iter().map(|n| Json::Str(n.clone())).collect()),
        ),
    ])
}

/// `certify`: existence certificate JSON plus the verdict.
pub fn certify(cfg: &ProblemConfig, quad: &QuadFlags) -> Result<(String, bool), CliError> {
    let ctx = context(cfg, quad)?;
    let envelope = cfg.envelope()?.ok_or_else(|| {
        CliError::Validation("certify needs an `envelope` block in the problem file".into())
    })?;
    let numerics = cfg.numerics();
    let env_cfg = cfg.envelope.as_ref().expect("checked above");
    let opts = CertifyOptions {
        x_max: env_cfg.x_max.unwrap_or(50.0),
        grid: numerics.envelope_grid.unwrap_or(DEFAULT_ENVELOPE_GRID),
        h2_grid: numerics.h2_grid.unwrap_or(DEFAULT_H2_GRID),
        c1_declared_global: env_cfg.declare_global_bound,
    };
    let f = ctx.spec().nonlinearity.clone();
    let cert = existence::certify(&ctx, &f, &envelope, &opts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((render(&certificate_json(&cert)), cert.verdict))
}

fn report_json(report: &SolveReport, grid_nodes: usize, notes: Vec<String>) -> Json {
    Json::Object(vec![
        ("converged", Json::Bool(report.converged)),
        ("iterations", Json::Int(report.iterations as i64)),
        (
            "fixed_point_residual",
            Json::Float(report.fixed_point_residual),
        ),
        ("bc_residual", Json::Float(report.bc_residual)),
        (
            "reformulation_residual",
            Json::Float(report.reformulation_residual),
        ),
        ("min_value", Json::Float(report.min_value)),
        ("sup_norm", Json::Float(report.sup_norm)),
        ("damping_used", Json::Float(report.damping_used)),
        ("grid_nodes", Json::Int(grid_nodes as i64)),
        (
            "notes",
            Json::Array(notes.into_iter().map(Json::Str).collect()),
        ),
    ])
}

/// Artifacts of a `solve` run.
pub struct SolveArtifacts {
    pub table_csv: String,
    pub report_json: String,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveFlags {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub grid: Option<usize>,
}

/// `solve`: damped Picard iteration; CSV of the iterate plus a report.
pub fn solve(
    cfg: &ProblemConfig,
    quad: &QuadFlags,
    flags: &SolveFlags,
) -> Result<SolveArtifacts, CliError> {
    let ctx = context(cfg, quad)?;
    let numerics = cfg.numerics();
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        tol: flags.tol.or(numerics.tol).unwrap_or(defaults.tol),
        max_iter: flags
            .max_iter
            .or(numerics.max_iter)
            .unwrap_or(defaults.max_iter),
        damping: flags
            .damping
            .or(numerics.damping)
            .unwrap_or(defaults.damping),
        grid_size: flags.grid.or(numerics.grid).unwrap_or(defaults.grid_size),
    };
    let f = ctx.spec().nonlinearity.clone();
    let (u, report) = solver::picard_solve(&ctx, &f, None, &opts)
        .map_err(|e| CliError::NonConvergence(e.to_string()))?;

    let mut notes = Vec::new();
    if let Some(env) = cfg.envelope()? {
        if report.sup_norm <= env.delta {
            notes.push(format!(
                "sup norm {} does not exceed the envelope delta {}; the iterate may be \
                 the excluded small fixed point",
                report.sup_norm, env.delta
            ));
        }
    }
    if !report.converged {
        notes.push(format!(
            "iteration stopped after {} steps with residual {}",
            report.iterations, report.fixed_point_residual
        ));
    }

    let rows: Vec<Vec<f64>> = u
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&t, &v)| vec![t, v])
        .collect();
    Ok(SolveArtifacts {
        table_csv: render_csv("t,u", &rows),
        report_json: render(&report_json(&report, u.node_count(), notes)),
        converged: report.converged,
    })
}

/// `greens`: tabulate H, G, Phi, and rho*Phi on a t x s grid.
pub fn greens(
    cfg: &ProblemConfig,
    quad: &QuadFlags,
    t_points: usize,
    s_points: usize,
) -> Result<String, CliError> {
    if t_points < 2 || s_points < 2 {
        return Err(CliError::Validation(
            "greens needs at least 2 points per axis".into(),
        ));
    }
    let ctx = context(cfg, quad)?;
    let alpha = ctx.spec().alpha;
    let mut rows = Vec::with_capacity(t_points * s_points);
    for i in 0..t_points {
        let t = i as f64 / (t_points - 1) as f64;
        let rho = kernel::bound_rho(&ctx, t).map_err(|e| CliError::Validation(e.to_string()))?;
        for j in 0..s_points {
            let s = j as f64 / (s_points - 1) as f64;
            let h =
                kernel::kernel_h(&ctx, t, s).map_err(|e| CliError::Validation(e.to_string()))?;
            let g =
                kernel::green_g(t, s, alpha).map_err(|e| CliError::Validation(e.to_string()))?;
            let phi =
                kernel::bound_phi(&ctx, s).map_err(|e| CliError::Validation(e.to_string()))?;
            rows.push(vec![t, s, h, g, phi, rho * phi]);
        }
    }
    Ok(render_csv("t,s,H,G,Phi,rhoPhi", &rows))
}

/// `selftest`: run the seeded invariant suites; true iff everything passed.
pub fn selftest(cases: usize, seed: u64) -> (String, bool) {
    let opts = SelftestOptions {
        cases: cases.max(1),
        seed,
    };
    let results = selftest::run_all(&opts);
    let mut out = String::new();
    let mut all_ok = true;
    for suite in &results {
        if suite.passed() {
            out.push_str(&format!("{}: ok ({} checks)\n", suite.name, suite.checks));
        } else {
            all_ok = false;
            out.push_str(&format!(
                "{}: FAILED ({} of {} checks)\n",
                suite.name,
                suite.failure_count(),
                suite.checks
            ));
            for failure in &suite.failures {
                out.push_str(&format!("  - {failure}\n"));
            }
            let suppressed = suite.failure_count() - suite.failures.len();
            if suppressed > 0 {
                out.push_str(&format!("  - ... and {suppressed} more\n"));
            }
        }
    }
    let passed = results.iter().filter(|s| s.passed()).count();
    out.push_str(&format!(
        "selftest: {passed}/{} suites passed (cases {}, seed {seed})\n",
        results.len(),
        opts.cases
    ));
    (out, all_ok)
}
