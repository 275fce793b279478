//! Configuration, the quench protocol and file output for every command of
//! the `dwtraj` tool.

mod compare;
mod config;
pub mod table;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classical::{integrate_classical, perturb, phase_portrait, separatrix, ClassicalState};
use crate::error::{Error, Result};
use crate::fock::{ground_state, QuantumState};
use crate::master::{propagate_master, DensityMatrix};
use crate::trajectory::{run_ensemble, run_trajectory};

pub use compare::{
    check_compatible, compare_ensemble_to_master, CompareReport, Discrepancy, MomentSeries, ABS_FLOOR,
    CONFIG_ECHO, SIGMAS,
};
pub use config::{AlgorithmKind, ExperimentConfig, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Portrait,
    Classical,
    Trajectory,
    Ensemble,
    Master,
    Compare { ensemble: PathBuf, master: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Portrait => "portrait",
            Command::Classical => "classical",
            Command::Trajectory => "trajectory",
            Command::Ensemble => "ensemble",
            Command::Master => "master",
            Command::Compare { .. } => "compare",
        }
    }
}

/// Ground state of the repulsive preparation Hamiltonian. The run itself
/// uses `chi_over_j_run`, so the quench is a sudden change of interaction.
pub fn prepare_quench_initial(cfg: &ExperimentConfig) -> Result<QuantumState> {
    cfg.validate()?;
    Ok(ground_state(&cfg.prepare_params()?).0)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    /// One-paragraph human-readable summary.
    pub summary: String,
}

/// Collects written files so a failed run leaves nothing half-written.
struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        f(&path)
    }

    fn discard(self) {
        for f in self.files {
            let _ = fs::remove_file(f);
        }
    }
}

/// Run one command and write its files into `cfg.out_dir`. Files are
/// removed again if any step fails.
pub fn run_experiment(cfg: &ExperimentConfig, command: &Command) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    match execute(cfg, command, &mut out) {
        Ok(summary) => Ok(RunOutput { files: out.files, summary }),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn execute(cfg: &ExperimentConfig, command: &Command, out: &mut Outputs) -> Result<String> {
    let summary = match command {
        Command::Portrait => {
            let mf = cfg.mean_field()?;
            let grid = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
            };
            let portrait = phase_portrait(&mf, &grid(cfg.portrait_nz, -1.0, 1.0), &grid(cfg.portrait_nphi, -PI, PI))?;
            let sep = match separatrix(&mf, cfg.separatrix_points) {
                Ok(s) => Some(s),
                Err(Error::NoSeparatrix { .. }) => None,
                Err(e) => return Err(e),
            };
            out.write("portrait.csv", |p| table::write_portrait(p, &portrait))?;
            out.write("separatrix.csv", |p| table::write_separatrix(p, sep.as_ref()))?;
            match sep {
                Some(s) => format!("separatrix energy {} with max |z| = {}", s.energy, s.z_max),
                None => "no hyperbolic fixed point: separatrix.csv is empty".to_string(),
            }
        }
        Command::Classical => {
            let mf = cfg.mean_field()?;
            let s0 = ClassicalState::new(cfg.z0, cfg.phi0).map_err(|e| Error::Config(e.to_string()))?;
            let mut rng = cfg.trajectory_config()?.rng();
            let start = perturb(s0, cfg.noise, &mut rng);
            let run = integrate_classical(start, &mf, cfg.t_max(), cfg.sample_count, cfg.classical_tol)?;
            out.write("classical.csv", |p| table::write_classical(p, &run))?;
            format!("max energy drift {:e}", run.max_energy_drift)
        }
        Command::Trajectory => {
            let initial = prepare_quench_initial(cfg)?;
            let rec = run_trajectory(&cfg.trajectory_config()?, &initial)?;
            out.write("trajectory.csv", |p| table::write_trajectory(p, &rec))?;
            out.write("jumps.csv", |p| table::write_jumps(p, &rec))?;
            let zmax = rec.z_series.iter().fold(0.0f64, |m, z| m.max(z.abs()));
            format!("{} clicks, max |z| = {zmax}", rec.jumps.len())
        }
        Command::Ensemble => {
            let initial = prepare_quench_initial(cfg)?;
            let ens = run_ensemble(&cfg.trajectory_config()?, &initial, cfg.n_traj)?;
            out.write("ensemble_mean.csv", |p| table::write_ensemble_mean(p, &ens.stats))?;
            format!("{} trajectories", ens.records.len())
        }
        Command::Master => {
            let initial = prepare_quench_initial(cfg)?;
            let run = propagate_master(
                &DensityMatrix::pure(&initial),
                &cfg.run_params()?,
                &cfg.measurement(),
                cfg.t_max(),
                cfg.sample_count,
                cfg.tol,
            )?;
            out.write("master.csv", |p| table::write_master(p, &run))?;
            format!("final purity {}", run.final_rho.purity())
        }
        Command::Compare { ensemble, master } => {
            let report = compare_ensemble_to_master(ensemble, master)?;
            let text = report.to_string();
            out.write("compare.txt", |p| fs::write(p, format!("{text}\n")).map_err(|e| Error::io(p, e)))?;
            text
        }
    };
    if !matches!(command, Command::Compare { .. }) {
        let echo = cfg.to_toml();
        out.write(CONFIG_ECHO, |p| fs::write(p, echo).map_err(|e| Error::io(p, e)))?;
    }
    Ok(summary)
}
