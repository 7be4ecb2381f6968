//! Run-configuration schema: a JSON document with complex numbers written as
//! [re, im] pairs. Unknown fields are rejected.

use crate::linalg::{CMat, C64};
use crate::models::{ChargeAnsatz, ModelError, SystemConfig};
use crate::oracle::{IntegratorSettings, Method};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub system: SystemSection,
    /// "exact", "oracle", or "both"
    pub solver: String,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub variant: String,
    pub g: f64,
    pub q0: Vec<[f64; 2]>,
    pub p0: Vec<[f64; 2]>,
    pub t_end: f64,
    /// coupling strength for the sutherland variants
    #[serde(default)]
    pub e: Option<f64>,
    /// spin matrix for rational_spin, rows of [re, im] entries
    #[serde(default)]
    pub s0: Option<Vec<Vec<[f64; 2]>>>,
    /// site positions for delta_sites
    #[serde(default)]
    pub sites: Option<Vec<f64>>,
    /// per-site charge matrices for delta_sites
    #[serde(default)]
    pub rho0: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    /// breakpoint grid for piecewise_exp (must span [-pi, pi])
    #[serde(default)]
    pub breakpoints: Option<Vec<f64>>,
    /// per-panel weight matrices for piecewise_exp
    #[serde(default)]
    pub weights: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    /// "rk45" (default) or "rk4"
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// fixed step for rk4
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_method() -> String {
    "rk45".into()
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_max_steps() -> u64 {
    50_000_000
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            method: default_method(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            step: None,
            max_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// explicit sample times; overrides t_max/dt_out when present
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub dt_out: Option<f64>,
    /// "csv" (default) or "jsonl"
    #[serde(default = "default_format")]
    pub format: String,
    /// output file stem (solver suffix and extension are appended)
    pub path: String,
}

fn default_format() -> String {
    "csv".into()
}

fn cx(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMat, ModelError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ModelError::InvalidConfig(
            "matrix rows must be square".into(),
        ));
    }
    let mut m = CMat::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = cx(*v);
        }
    }
    Ok(m)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cfg.schema_version != 1 {
            return Err(format!("unsupported schema_version {}", cfg.schema_version));
        }
        if !matches!(cfg.solver.as_str(), "exact" | "oracle" | "both") {
            return Err(format!("unknown solver '{}'", cfg.solver));
        }
        if !matches!(cfg.output.format.as_str(), "csv" | "jsonl") {
            return Err(format!("unknown output format '{}'", cfg.output.format));
        }
        if cfg.output.times.is_none() && (cfg.output.t_max.is_none() || cfg.output.dt_out.is_none())
        {
            return Err("output needs either `times` or both `t_max` and `dt_out`".into());
        }
        Ok(cfg)
    }

    pub fn system_config(&self) -> Result<SystemConfig, ModelError> {
        let s = &self.system;
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.into()));
        let ansatz = match s.variant.as_str() {
            "rational_spin" => match &s.s0 {
                Some(rows) => ChargeAnsatz::RationalSpin { s0: matrix(rows)? },
                None => return bad("rational_spin requires `s0`"),
            },
            "sutherland_trig" => match s.e {
                Some(e) => ChargeAnsatz::SutherlandTrig { e },
                None => return bad("sutherland_trig requires `e`"),
            },
            "sutherland_hyp" => match s.e {
                Some(e) => ChargeAnsatz::SutherlandHyp { e },
                None => return bad("sutherland_hyp requires `e`"),
            },
            "delta_sites" => match (&s.sites, &s.rho0) {
                (Some(sites), Some(rho0)) => ChargeAnsatz::DeltaSites {
                    sites: sites.clone(),
                    rho0: rho0
                        .iter()
                        .map(|m| matrix(m))
                        .collect::<Result<Vec<_>, _>>()?,
                },
                _ => return bad("delta_sites requires `sites` and `rho0`"),
            },
            "piecewise_exp" => match (&s.breakpoints, &s.weights) {
                (Some(bp), Some(w)) => ChargeAnsatz::PiecewiseExp {
                    breakpoints: bp.clone(),
                    s0: w.iter().map(|m| matrix(m)).collect::<Result<Vec<_>, _>>()?,
                },
                _ => return bad("piecewise_exp requires `breakpoints` and `weights`"),
            },
            other => {
                return Err(ModelError::InvalidConfig(format!(
                    "unknown variant '{other}'"
                )))
            }
        };
        let config = SystemConfig {
            ansatz,
            g: s.g,
            q0: s.q0.iter().map(|v| cx(*v)).collect(),
            p0: s.p0.iter().map(|v| cx(*v)).collect(),
            t_end: s.t_end,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn integrator_settings(&self) -> Result<IntegratorSettings, String> {
        let it = &self.integrator;
        let method = match it.method.as_str() {
            "rk45" => Method::Rk45Adaptive {
                rel_tol: it.rel_tol,
                abs_tol: it.abs_tol,
            },
            "rk4" => Method::Rk4Fixed {
                step: it
                    .step
                    .ok_or_else(|| "rk4 integrator requires `step`".to_string())?,
            },
            other => return Err(format!("unknown integrator method '{other}'")),
        };
        Ok(IntegratorSettings {
            method,
            max_steps: it.max_steps,
        })
    }

    pub fn output_times(&self) -> Result<Vec<f64>, String> {
        if let Some(times) = &self.output.times {
            let mut t = times.clone();
            if t.is_empty() {
                return Err("`times` must be nonempty".into());
            }
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if t[0] < 0.0 {
                return Err("output times must be nonnegative".into());
            }
            return Ok(t);
        }
        let t_max = self.output.t_max.unwrap();
        let dt = self.output.dt_out.unwrap();
        if !(t_max > 0.0 && dt > 0.0) {
            return Err("t_max and dt_out must be positive".into());
        }
        let k = (t_max / dt).round() as usize;
        Ok((0..=k).map(|i| i as f64 * dt).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"{
        "schema_version": 1,
        "system": {
            "variant": "delta_sites",
            "g": 0.31,
            "q0": [[-0.5, 0.0], [0.45, 0.0]],
            "p0": [[0.2, 0.0], [-0.15, 0.0]],
            "t_end": 1.0,
            "sites": [-1.1, 0.7],
            "rho0": [
                [[[0.0, 0.0], [0.4, 0.1]], [[0.4, -0.1], [0.0, 0.0]]],
                [[[0.0, 0.0], [-0.2, 0.3]], [[-0.2, -0.3], [0.0, 0.0]]]
            ]
        },
        "solver": "both",
        "integrator": {"method": "rk45", "rel_tol": 1e-10, "abs_tol": 1e-12},
        "output": {"t_max": 1.0, "dt_out": 0.25, "format": "csv", "path": "out"},
        "seed": 7
    }"#;

    #[test]
    fn parses_and_validates() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let sys = cfg.system_config().unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(cfg.output_times().unwrap().len(), 5);
        cfg.integrator_settings().unwrap();
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = SAMPLE.replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_bad_solver_and_format() {
        let bad = SAMPLE.replace("\"both\"", "\"quantum\"");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = SAMPLE.replace("\"csv\"", "\"parquet\"");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_constraint_violation() {
        // nonzero diagonal sum in the site charges
        let bad = SAMPLE.replace("[[0.0, 0.0], [0.4, 0.1]]", "[[0.5, 0.0], [0.4, 0.1]]");
        let cfg = RunConfig::parse(&bad).unwrap();
        assert!(cfg.system_config().is_err());
    }
}
