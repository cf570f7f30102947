//! Run configuration: one JSON document per experiment.

use std::path::{Path, PathBuf};

use qcf_core::analysis::{lj_contraction_region, lj_existence_region, AnalysisError, Theorem};
use qcf_core::solvers::{Method, SolverError};
use qcf_core::{Centered, ChainError, Load, QcGeometry, RegionCertificate, SolverConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LENNARD_JONES: &str = "lennard-jones";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("invalid geometry")]
    Geometry(#[from] ChainError),
    #[error("invalid region")]
    Region(#[from] AnalysisError),
    #[error("invalid field `solver_config`")]
    Solver(#[from] SolverError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Per-interval atom counts: `"uniform:k"` (one inside the interface band,
/// `k` elsewhere) or the explicit list `ν_{−N..N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuSpec {
    Policy(String),
    Explicit(Vec<usize>),
}

impl Default for NuSpec {
    fn default() -> Self {
        NuSpec::Policy("uniform:1".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Newton,
    Homotopy,
    Gfi,
}

impl From<SolverChoice> for Method {
    fn from(s: SolverChoice) -> Method {
        match s {
            SolverChoice::Newton => Method::Newton,
            SolverChoice::Homotopy => Method::Homotopy,
            SolverChoice::Gfi => Method::GhostForceIteration,
        }
    }
}

/// Certified region passed to the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub theorem: Theorem,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub r_upper: Option<f64>,
}

impl RegionSpec {
    pub fn certificate(&self) -> Result<RegionCertificate, ConfigError> {
        match self.theorem {
            Theorem::Existence => {
                let r_upper = self.r_upper.ok_or_else(|| {
                    invalid("region.r_upper", "required for the existence region")
                })?;
                Ok(lj_existence_region(r_upper)?)
            }
            Theorem::Contraction => {
                let gamma = self.gamma.ok_or_else(|| {
                    invalid("region.gamma", "required for the contraction region")
                })?;
                Ok(lj_contraction_region(gamma, self.r_upper)?.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_potential")]
    pub potential: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub nu: NuSpec,
    /// End tension `T`; the default load when no other is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tension: Option<f64>,
    /// Atomistic dead loads `f̃_{−M..M+1}`, left to right.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_tilde: Option<Vec<f64>>,
    /// External conjugate force `Φ_{−N..N}`, left to right.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub solver_config: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_csv: Option<PathBuf>,
}

fn default_potential() -> String {
    LENNARD_JONES.into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: default_potential(),
            n: 12,
            k: 4,
            nu: NuSpec::default(),
            tension: None,
            f_tilde: None,
            phi: None,
            solver: SolverChoice::default(),
            solver_config: SolverConfig::default(),
            region: None,
            out_json: None,
            out_csv: None,
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub geometry: QcGeometry,
    pub load: Load,
    pub method: Method,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn geometry(&self) -> Result<QcGeometry, ConfigError> {
        match &self.nu {
            NuSpec::Policy(policy) => {
                let nu = policy
                    .strip_prefix("uniform:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| {
                        invalid(
                            "nu",
                            format!("expected \"uniform:<k>\" or a list, got {policy:?}"),
                        )
                    })?;
                Ok(QcGeometry::with_coarsening(self.n, self.k, nu)?)
            }
            NuSpec::Explicit(nu) => Ok(QcGeometry::new(self.n, self.k, nu.clone())?),
        }
    }

    pub fn build(&self) -> Result<Problem, ConfigError> {
        if self.potential != LENNARD_JONES {
            return Err(invalid(
                "potential",
                format!("unsupported potential {:?}", self.potential),
            ));
        }
        let geometry = self.geometry()?;
        let given = [
            self.tension.is_some(),
            self.f_tilde.is_some(),
            self.phi.is_some(),
        ];
        if given.iter().filter(|&&b| b).count() > 1 {
            return Err(invalid(
                "tension",
                "give at most one of `tension`, `f_tilde`, `phi`",
            ));
        }
        let load = if let Some(values) = &self.f_tilde {
            let mi = geometry.m() as isize;
            if values.len() != 2 * geometry.m() + 2 {
                return Err(invalid(
                    "f_tilde",
                    format!(
                        "expected {} values, got {}",
                        2 * geometry.m() + 2,
                        values.len()
                    ),
                ));
            }
            geometry.aggregate_loads(&Centered::new(-mi, values.clone()))?
        } else if let Some(values) = &self.phi {
            let ni = geometry.ni();
            if values.len() != geometry.strain_len() {
                return Err(invalid(
                    "phi",
                    format!(
                        "expected {} values, got {}",
                        geometry.strain_len(),
                        values.len()
                    ),
                ));
            }
            Load::from_conjugate(&geometry, Centered::new(-ni, values.clone()))?
        } else {
            Load::end_tension(&geometry, self.tension.unwrap_or(0.0))?
        };
        let mut solver = self.solver_config.clone();
        if let Some(region) = &self.region {
            solver.certificate = Some(region.certificate()?);
        }
        solver.validate()?;
        if let Some(r0) = &solver.initial_strain {
            geometry.check_strain(r0)?;
        }
        Ok(Problem {
            geometry,
            load,
            method: self.solver.into(),
            solver,
        })
    }
}
