use rayon::prelude::*;

use super::{run_trajectory, TrajectoryConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::stats::mean_sem;

/// Per-sample ensemble mean and standard error of the conditional `<z>`
/// and `<z^2>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub z_mean: Vec<f64>,
    pub z_sem: Vec<f64>,
    pub z2_mean: Vec<f64>,
    pub z2_sem: Vec<f64>,
}

impl EnsembleStats {
    pub fn from_records(records: &[TrajectoryRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Config("ensemble needs at least one trajectory".into()))?;
        let times = first.sample_times.clone();
        if records.iter().any(|r| r.sample_times != times) {
            return Err(Error::Mismatch("trajectories use different sample grids".into()));
        }
        let mut stats = EnsembleStats {
            z_mean: Vec::with_capacity(times.len()),
            z_sem: Vec::with_capacity(times.len()),
            z2_mean: Vec::with_capacity(times.len()),
            z2_sem: Vec::with_capacity(times.len()),
            times,
        };
        for i in 0..stats.times.len() {
            let (m, s) = mean_sem(records.iter().map(|r| r.z_series[i]));
            let (m2, s2) = mean_sem(records.iter().map(|r| r.z2_series[i]));
            stats.z_mean.push(m);
            stats.z_sem.push(s);
            stats.z2_mean.push(m2);
            stats.z2_sem.push(s2);
        }
        Ok(stats)
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    /// In trajectory-index order regardless of scheduling.
    pub records: Vec<TrajectoryRecord>,
    pub stats: EnsembleStats,
}

/// Run `n_traj` trajectories with indices `config.trajectory_index + i` in
/// parallel. Each trajectory has its own random stream, so the result is the
/// same for any thread count.
pub fn run_ensemble(config: &TrajectoryConfig, initial: &QuantumState, n_traj: usize) -> Result<Ensemble> {
    if n_traj == 0 {
        return Err(Error::Config("n_traj must be at least 1".into()));
    }
    config.validate()?;
    let base = config.trajectory_index;
    let records = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| run_trajectory(&config.clone().with_index(base + i), initial))
        .collect::<Result<Vec<_>>>()?;
    let stats = EnsembleStats::from_records(&records)?;
    Ok(Ensemble { records, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::trajectory::{Algorithm, MeasurementModel};

    fn config() -> TrajectoryConfig {
        TrajectoryConfig::new(
            ModelParams::from_ratios(6, 1.0, -1.5, 1.0).unwrap(),
            MeasurementModel::Linear,
            Algorithm::EventDriven,
            4.0,
        )
        .with_samples(41)
        .with_seed(17)
    }

    #[test]
    fn independent_of_thread_count() {
        let s0 = QuantumState::number_state(6, 5);
        let a = run_ensemble(&config(), &s0, 24).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_ensemble(&config(), &s0, 24)).unwrap();
        assert_eq!(a.stats, b.stats);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.jumps, y.jumps);
        }
    }

    #[test]
    fn records_are_indexed_trajectories() {
        let s0 = QuantumState::number_state(6, 5);
        let ens = run_ensemble(&config(), &s0, 5).unwrap();
        let third = run_trajectory(&config().with_index(2), &s0).unwrap();
        assert_eq!(ens.records[2].jumps, third.jumps);
        assert_eq!(ens.records[2].z_series, third.z_series);
    }

    #[test]
    fn single_trajectory_has_zero_sem() {
        let ens = run_ensemble(&config(), &QuantumState::binomial(6), 1).unwrap();
        assert!(ens.stats.z_sem.iter().all(|&s| s == 0.0));
        assert_eq!(ens.stats.z_mean, ens.records[0].z_series);
    }
}
