//! Averaging many measured trajectories reproduces the master equation.

use dwtraj::master::{propagate_master, DensityMatrix};
use dwtraj::runner::{prepare_quench_initial, CompareReport, ExperimentConfig, MomentSeries};
use dwtraj::trajectory::run_ensemble;

fn main() -> dwtraj::Result<()> {
    let cfg = ExperimentConfig {
        n_atoms: 6,
        chi_over_j_run: -1.5,
        n_gamma_over_j: 1.0,
        t_max_j: 20.0,
        sample_count: 201,
        seed: 1,
        ..Default::default()
    };
    let initial = prepare_quench_initial(&cfg)?;
    let ens = run_ensemble(&cfg.trajectory_config()?, &initial, 2000)?;
    let master = propagate_master(
        &DensityMatrix::pure(&initial),
        &cfg.run_params()?,
        &cfg.measurement(),
        cfg.t_max(),
        cfg.sample_count,
        1e-10,
    )?;

    let zero = vec![0.0; master.samples.len()];
    let reference = MomentSeries {
        times: master.samples.iter().map(|s| s.t).collect(),
        z: master.samples.iter().map(|s| s.z).collect(),
        z_sem: zero.clone(),
        z2: master.samples.iter().map(|s| s.z2).collect(),
        z2_sem: zero,
    };
    let traj = MomentSeries {
        times: ens.stats.times.clone(),
        z: ens.stats.z_mean.clone(),
        z_sem: ens.stats.z_sem.clone(),
        z2: ens.stats.z2_mean.clone(),
        z2_sem: ens.stats.z2_sem.clone(),
    };
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "<z^2> traj", "sem", "master", "purity");
    for i in (0..=200).step_by(25) {
        println!(
            "{:>6} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            traj.times[i], traj.z2[i], traj.z2_sem[i], reference.z2[i], master.samples[i].purity
        );
    }
    println!("{}", CompareReport::from_series(&traj, &reference)?);
    Ok(())
}
