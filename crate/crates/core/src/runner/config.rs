use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::{MeanFieldParams, DEFAULT_NOISE_AMPLITUDE};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::trajectory::{Algorithm, MeasurementModel, TrajectoryConfig, DEFAULT_PROPAGATION_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    EventDriven,
    FirstOrder,
}

/// Everything a run needs, in the dimensionless units `chi/J`, `N Gamma/J`
/// and `t J`. Loaded from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_atoms: usize,
    pub j_tunnel: f64,
    /// Repulsive interaction used to prepare the initial ground state.
    /// Defaults to `|chi_over_j_run|`, making the quench a pure sign flip.
    pub chi_over_j_prepare: Option<f64>,
    pub chi_over_j_run: f64,
    pub n_gamma_over_j: f64,
    pub model: ModelKind,
    /// `N^2 Gamma2 / J` for the quadratic model; defaults to `n_gamma_over_j`.
    pub g2_total_over_j: Option<f64>,
    pub algorithm: AlgorithmKind,
    /// First-order step in units of `1/J`.
    pub dt_j: Option<f64>,
    pub t_max_j: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub n_traj: usize,
    /// Local tolerance of the quantum propagators.
    pub tol: f64,
    /// Allowed relative energy drift of classical runs.
    pub classical_tol: f64,
    pub out_dir: PathBuf,
    /// Classical initial condition and noise.
    pub z0: f64,
    pub phi0: f64,
    pub noise: f64,
    /// Phase-portrait grid.
    pub portrait_nz: usize,
    pub portrait_nphi: usize,
    pub separatrix_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_atoms: 100,
            j_tunnel: 1.0,
            chi_over_j_prepare: None,
            chi_over_j_run: -1.5,
            n_gamma_over_j: 1.0,
            model: ModelKind::Linear,
            g2_total_over_j: None,
            algorithm: AlgorithmKind::EventDriven,
            dt_j: None,
            t_max_j: 100.0,
            sample_count: 5000,
            seed: 0,
            n_traj: 100,
            tol: DEFAULT_PROPAGATION_TOL,
            classical_tol: 1e-10,
            out_dir: PathBuf::from("out"),
            z0: 0.0,
            phi0: 0.0,
            noise: DEFAULT_NOISE_AMPLITUDE,
            portrait_nz: 201,
            portrait_nphi: 201,
            separatrix_points: 801,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn chi_prepare(&self) -> f64 {
        self.chi_over_j_prepare.unwrap_or(self.chi_over_j_run.abs())
    }

    pub fn validate(&self) -> Result<()> {
        self.run_params()?;
        if !(self.chi_prepare() > 1.0) {
            return Err(Error::Config(format!(
                "chi_over_j_prepare must exceed 1 (repulsive preparation), got {}",
                self.chi_prepare()
            )));
        }
        if !(self.t_max_j > 0.0) || !self.t_max_j.is_finite() {
            return Err(Error::Config(format!("t_max_j must be positive, got {}", self.t_max_j)));
        }
        if self.sample_count < 2 {
            return Err(Error::Config("sample_count must be at least 2".into()));
        }
        if self.n_traj == 0 {
            return Err(Error::Config("n_traj must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.classical_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Config(format!("noise must be >= 0, got {}", self.noise)));
        }
        if self.algorithm == AlgorithmKind::FirstOrder && self.dt_j.is_none() {
            return Err(Error::Config("first_order algorithm needs dt_j".into()));
        }
        self.trajectory_config()?.validate()
    }

    /// Parameters after the quench.
    pub fn run_params(&self) -> Result<ModelParams> {
        ModelParams::from_ratios(self.n_atoms, self.j_tunnel, self.chi_over_j_run, self.n_gamma_over_j)
            .map_err(config_error)
    }

    /// Parameters of the preparation stage (no measurement).
    pub fn prepare_params(&self) -> Result<ModelParams> {
        ModelParams::from_ratios(self.n_atoms, self.j_tunnel, self.chi_prepare(), 0.0).map_err(config_error)
    }

    pub fn mean_field(&self) -> Result<MeanFieldParams> {
        MeanFieldParams::new(self.j_tunnel, self.chi_over_j_run * self.j_tunnel).map_err(config_error)
    }

    pub fn measurement(&self) -> MeasurementModel {
        match self.model {
            ModelKind::Linear => MeasurementModel::Linear,
            ModelKind::Quadratic => {
                let total = self.g2_total_over_j.unwrap_or(self.n_gamma_over_j) * self.j_tunnel;
                MeasurementModel::quadratic_from_total(total, self.n_atoms)
            }
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max_j / self.j_tunnel
    }

    pub fn trajectory_config(&self) -> Result<TrajectoryConfig> {
        let algorithm = match self.algorithm {
            AlgorithmKind::EventDriven => Algorithm::EventDriven,
            AlgorithmKind::FirstOrder => Algorithm::FirstOrder {
                dt: self.dt_j.ok_or_else(|| Error::Config("first_order algorithm needs dt_j".into()))?
                    / self.j_tunnel,
            },
        };
        let mut c = TrajectoryConfig::new(self.run_params()?, self.measurement(), algorithm, self.t_max())
            .with_samples(self.sample_count)
            .with_seed(self.seed);
        c.tol = self.tol;
        Ok(c)
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::InvalidParams(m) => Error::Config(m),
        other => other,
    }
}
