use std::fmt;
use std::path::Path;

use super::config::ExperimentConfig;
use super::table::{Table, ENSEMBLE_HEADER, MASTER_HEADER};
use crate::error::{Error, Result};

/// Absolute floor of the per-sample acceptance threshold.
pub const ABS_FLOOR: f64 = 0.02;
/// Number of standard errors allowed per sample.
pub const SIGMAS: f64 = 3.0;

/// Time series of `<z>` and `<z^2>` with standard errors (zero for an exact
/// reference).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub z_sem: Vec<f64>,
    pub z2: Vec<f64>,
    pub z2_sem: Vec<f64>,
}

impl MomentSeries {
    /// Read either an `ensemble_mean.csv` or a `master.csv`.
    pub fn read(path: &Path) -> Result<Self> {
        let t = Table::read(path)?;
        if t.has_header(ENSEMBLE_HEADER) {
            Ok(MomentSeries {
                times: t.column("t", path)?,
                z: t.column("z_mean", path)?,
                z_sem: t.column("z_sem", path)?,
                z2: t.column("z2_mean", path)?,
                z2_sem: t.column("z2_sem", path)?,
            })
        } else {
            t.expect_header(MASTER_HEADER, path)?;
            let z = t.column("z", path)?;
            let zeros = vec![0.0; z.len()];
            Ok(MomentSeries {
                times: t.column("t", path)?,
                z,
                z_sem: zeros.clone(),
                z2: t.column("z2", path)?,
                z2_sem: zeros,
            })
        }
    }
}

/// Worst sample of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    /// Largest `|sample - reference|`.
    pub max_abs: f64,
    pub max_abs_time: f64,
    /// Largest ratio of the difference to its threshold `max(3 SEM, 0.02)`.
    pub worst_ratio: f64,
    pub worst_time: f64,
    pub sem_at_worst: f64,
}

impl Discrepancy {
    fn new(times: &[f64], a: &[f64], a_sem: &[f64], b: &[f64], b_sem: &[f64]) -> Self {
        let mut d = Discrepancy { max_abs: 0.0, max_abs_time: 0.0, worst_ratio: 0.0, worst_time: 0.0, sem_at_worst: 0.0 };
        for i in 0..times.len() {
            let diff = (a[i] - b[i]).abs();
            let sem = a_sem[i].hypot(b_sem[i]);
            let ratio = diff / (SIGMAS * sem).max(ABS_FLOOR);
            if diff > d.max_abs {
                d.max_abs = diff;
                d.max_abs_time = times[i];
            }
            if ratio > d.worst_ratio {
                d.worst_ratio = ratio;
                d.worst_time = times[i];
                d.sem_at_worst = sem;
            }
        }
        d
    }

    pub fn pass(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub samples: usize,
    pub z: Discrepancy,
    pub z2: Discrepancy,
}

impl CompareReport {
    pub fn from_series(sample: &MomentSeries, reference: &MomentSeries) -> Result<Self> {
        if sample.times.len() != reference.times.len()
            || sample.times.iter().zip(&reference.times).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::Mismatch("the two files use different sample times".into()));
        }
        Ok(CompareReport {
            samples: sample.times.len(),
            z: Discrepancy::new(&sample.times, &sample.z, &sample.z_sem, &reference.z, &reference.z_sem),
            z2: Discrepancy::new(&sample.times, &sample.z2, &sample.z2_sem, &reference.z2, &reference.z2_sem),
        })
    }

    pub fn pass(&self) -> bool {
        self.z.pass() && self.z2.pass()
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, d) in [("<z>", &self.z), ("<z^2>", &self.z2)] {
            writeln!(
                f,
                "{name}: max |diff| = {:.3e} at t = {}; worst diff/threshold = {:.3} at t = {} (sem {:.3e}) -> {}",
                d.max_abs,
                d.max_abs_time,
                d.worst_ratio,
                d.worst_time,
                d.sem_at_worst,
                if d.pass() { "pass" } else { "FAIL" }
            )?;
        }
        write!(f, "{} samples, threshold max({SIGMAS} sem, {ABS_FLOOR}): {}", self.samples, if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Configuration echo written next to every output file.
pub const CONFIG_ECHO: &str = "run.toml";

fn echo_for(path: &Path) -> Result<ExperimentConfig> {
    let echo = path.parent().unwrap_or(Path::new(".")).join(CONFIG_ECHO);
    if !echo.exists() {
        return Err(Error::Mismatch(format!(
            "no {CONFIG_ECHO} next to {}; cannot check that the runs match",
            path.display()
        )));
    }
    ExperimentConfig::load(&echo)
}

/// Refuse unless both runs simulate the same physics on the same grid.
pub fn check_compatible(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<()> {
    let checks: [(&str, String, String); 8] = [
        ("n_atoms", a.n_atoms.to_string(), b.n_atoms.to_string()),
        ("j_tunnel", a.j_tunnel.to_string(), b.j_tunnel.to_string()),
        ("chi_over_j_prepare", a.chi_prepare().to_string(), b.chi_prepare().to_string()),
        ("chi_over_j_run", a.chi_over_j_run.to_string(), b.chi_over_j_run.to_string()),
        ("n_gamma_over_j", a.n_gamma_over_j.to_string(), b.n_gamma_over_j.to_string()),
        ("model", format!("{:?}", a.measurement()), format!("{:?}", b.measurement())),
        ("t_max_j", a.t_max_j.to_string(), b.t_max_j.to_string()),
        ("sample_count", a.sample_count.to_string(), b.sample_count.to_string()),
    ];
    for (name, x, y) in checks {
        if x != y {
            return Err(Error::Mismatch(format!("{name} differs ({x} vs {y})")));
        }
    }
    Ok(())
}

/// Compare an ensemble (or another master run) against a master run, using
/// the configuration echoes in the files' directories to refuse mismatched
/// inputs.
pub fn compare_ensemble_to_master(ensemble: &Path, master: &Path) -> Result<CompareReport> {
    check_compatible(&echo_for(ensemble)?, &echo_for(master)?)?;
    let reference = MomentSeries::read(master)?;
    if reference.z_sem.iter().any(|&s| s != 0.0) {
        return Err(Error::Mismatch(format!("{} is not a master-equation file", master.display())));
    }
    CompareReport::from_series(&MomentSeries::read(ensemble)?, &reference)
}
