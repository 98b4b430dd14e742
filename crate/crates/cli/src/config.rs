//! Problem files: JSON schema, validation, and conversion to core types.

use fracbvp_core::existence::GrowthEnvelope;
use fracbvp_core::expr;
use fracbvp_core::kernel::{Nonlinearity, ProblemSpec};
use fracbvp_core::measures::{Density, SignedMeasure};
use fracbvp_core::quadrature::QuadSettings;
use serde::Deserialize;
use std::path::Path;

use crate::CliError;

/// On-disk problem description.
///
/// ```json
/// {
///   "alpha": 2.5, "mu": 2.0, "eta": 0.14285714285714285, "beta": 1.0,
///   "measure": {
///     "atoms": [[0.42857142857142855, 2.0], [0.5714285714285714, -1.0]],
///     "density": null,
///     "density_breakpoints": []
///   },
///   "f": "1 - t + exp(t/4 - u)",
///   "envelope": {"a": 0.4, "c": 3.0, "b": 58.0, "delta": 0.015, "x_max": 50.0},
///   "numerics": {"grid": 257, "tol": 1e-10}
/// }
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub mu: f64,
    pub eta: f64,
    pub beta: f64,
    pub measure: MeasureConfig,
    pub f: String,
    #[serde(default)]
    pub envelope: Option<EnvelopeConfig>,
    #[serde(default)]
    pub numerics: Option<NumericsConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    /// Expression over `t` (or `s`) for the absolutely continuous part.
    #[serde(default)]
    pub density: Option<String>,
    #[serde(default)]
    pub density_breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub a: f64,
    pub c: f64,
    pub b: f64,
    pub delta: f64,
    #[serde(default)]
    pub x_max: Option<f64>,
    /// Declares that `f <= a x + c` holds for every `x >= 0`, upgrading the
    /// sampled C1 check to an exact pass.
    #[serde(default)]
    pub declare_global_bound: bool,
}

/// Optional numeric overrides; command-line flags win over these.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub quad_order: Option<usize>,
    pub quad_panels: Option<usize>,
    pub quad_tol: Option<f64>,
    pub nystrom_n: Option<usize>,
    pub envelope_grid: Option<usize>,
    pub h2_grid: Option<usize>,
    /// Accepted for schema compatibility; the analysis commands are
    /// deterministic and the randomized `selftest` takes `--seed` directly.
    #[allow(dead_code)]
    pub seed: Option<u64>,
}

impl ProblemConfig {
    /// Read and decode a problem file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        if text.trim().is_empty() {
            return Err(CliError::Validation(format!(
                "{}: empty problem file",
                path.display()
            )));
        }
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Validate the fields and build the core spec; errors carry the
    /// offending field path.
    pub fn to_spec(&self) -> Result<ProblemSpec, CliError> {
        let density = match &self.measure.density {
            None => None,
            Some(source) => {
                let parsed = expr::parse(source, &["t", "s"])
                    .map_err(|e| CliError::Validation(format!("measure.density: {e}")))?;
                let breaks = self.measure.density_breakpoints.clone();
                Some(
                    Density::new(
                        move |t| expr::evaluate(&parsed, &[("t", t), ("s", t)]).unwrap_or(f64::NAN),
                        breaks,
                    )
                    .map_err(|e| {
                        CliError::Validation(format!("measure.density_breakpoints: {e}"))
                    })?,
                )
            }
        };
        let measure = SignedMeasure::new(self.measure.atoms.clone(), density)
            .map_err(|e| CliError::Validation(format!("measure.atoms: {e}")))?;

        let f =
            Nonlinearity::parse(&self.f).map_err(|e| CliError::Validation(format!("f: {e}")))?;

        ProblemSpec::new(self.alpha, self.mu, self.eta, self.beta, measure, f)
            .map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn envelope(&self) -> Result<Option<GrowthEnvelope>, CliError> {
        match &self.envelope {
            None => Ok(None),
            Some(e) => GrowthEnvelope::new(e.a, e.c, e.b, e.delta)
                .map(Some)
                .map_err(|err| CliError::Validation(format!("envelope: {err}"))),
        }
    }

    pub fn numerics(&self) -> NumericsConfig {
        self.numerics.unwrap_or_default()
    }

    /// Quadrature settings: defaults, overridden by the config's numerics
    /// block, overridden by command-line flags.
    pub fn quad_settings(
        &self,
        order_flag: Option<usize>,
        panels_flag: Option<usize>,
        tol_flag: Option<f64>,
    ) -> QuadSettings {
        let n = self.numerics();
        let mut q = QuadSettings::default();
        if let Some(v) = n.quad_order {
            q.order = v;
        }
        if let Some(v) = n.quad_panels {
            q.panels_per_segment = v;
        }
        if let Some(v) = n.quad_tol {
            q.rel_tol = v;
        }
        if let Some(v) = order_flag {
            q.order = v;
        }
        if let Some(v) = panels_flag {
            q.panels_per_segment = v;
        }
        if let Some(v) = tol_flag {
            q.rel_tol = v;
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!(
            "fracbvp-config-test-{name}-{}.json",
            std::process::id()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    const EXAMPLE: &str = r#"{
        "alpha": 2.5, "mu": 2.0, "eta": 0.14285714285714285, "beta": 1.0,
        "measure": {"atoms": [[0.42857142857142855, 2.0], [0.5714285714285714, -1.0]],
                    "density": null, "density_breakpoints": []},
        "f": "1 - t + exp(t/4 - u)",
        "envelope": {"a": 0.4, "c": 3.0, "b": 58.0, "delta": 0.015, "x_max": 50.0}
    }"#;

    #[test]
    fn example_config_round_trips() {
        let path = write_temp("ok", EXAMPLE);
        let cfg = ProblemConfig::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let spec = cfg.to_spec().unwrap();
        assert!((spec.lambda() - 4.0 / 7.0).abs() < 1e-14);
        assert_eq!(spec.measure.atoms().len(), 2);
        let env = cfg.envelope().unwrap().unwrap();
        assert_eq!(env.b, 58.0);
    }

    #[test]
    fn alpha_out_of_range_names_the_field() {
        let bad = EXAMPLE.replace("\"alpha\": 2.5", "\"alpha\": 3.5");
        let path = write_temp("alpha", &bad);
        let cfg = ProblemConfig::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let err = cfg.to_spec().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha must lie in (2,3]"), "{msg}");
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let path = write_temp("empty", "");
        let err = ProblemConfig::load(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(err.to_string().contains("empty problem file"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = EXAMPLE.replace("\"alpha\"", "\"alpha_typo\"");
        let path = write_temp("unknown", &bad);
        let err = ProblemConfig::load(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(err.to_string().contains("alpha_typo"), "{err}");
    }

    #[test]
    fn density_expression_compiles() {
        let cfg_text = r#"{
            "alpha": 2.5, "mu": 0.0, "eta": 0.5, "beta": 1.0,
            "measure": {"atoms": [], "density": "1 + t/2", "density_breakpoints": []},
            "f": "1"
        }"#;
        let path = write_temp("density", cfg_text);
        let cfg = ProblemConfig::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let spec = cfg.to_spec().unwrap();
        // Lambda = int_0^1 t (1 + t/2) dt = 1/2 + 1/6 = 2/3
        assert!((spec.lambda() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn flag_overrides_beat_numerics_block() {
        let cfg_text = EXAMPLE.replace(
            "\"envelope\"",
            "\"numerics\": {\"quad_order\": 4}, \"envelope\"",
        );
        let path = write_temp("numerics", &cfg_text);
        let cfg = ProblemConfig::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(cfg.quad_settings(None, None, None).order, 4);
        assert_eq!(cfg.quad_settings(Some(10), None, None).order, 10);
    }
}
