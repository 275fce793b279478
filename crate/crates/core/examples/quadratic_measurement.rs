//! Detection rates proportional to the square of the well population,
//! sampled exactly by tracking the norm of the no-click evolution.

use dwtraj::fock::ground_state;
use dwtraj::stats::mean_sem;
use dwtraj::trajectory::{run_ensemble, Algorithm, MeasurementModel, TrajectoryConfig};
use dwtraj::ModelParams;

fn main() -> dwtraj::Result<()> {
    let n = 40;
    let params = ModelParams::from_ratios(n, 1.0, -1.5, 10.0)?;
    let initial = ground_state(&ModelParams::from_ratios(n, 1.0, 1.5, 0.0)?).0;

    for model in [MeasurementModel::Linear, MeasurementModel::quadratic_from_total(20.0, n)] {
        let cfg = TrajectoryConfig::new(params, model, Algorithm::EventDriven, 10.0)
            .with_samples(101)
            .with_seed(5);
        let ens = run_ensemble(&cfg, &initial, 200)?;
        let (clicks, sem) = mean_sem(ens.records.iter().map(|r| r.jumps.len() as f64));
        let (trapped, _) = mean_sem(ens.records.iter().map(|r| r.z_series[100].abs()));
        println!(
            "{model:?}: clicks {clicks:.1} +- {sem:.1}, <|z(10/J)|> = {trapped:.3}, <z^2> = {:.3}",
            ens.stats.z2_mean[100]
        );
    }
    Ok(())
}
