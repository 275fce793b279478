//! The total click rate of the linear model is `N Gamma` for every state, so
//! waiting times are exponential. The first-order stepper approximates the
//! same process with one uniform draw per step.

use dwtraj::stats::{ks_exponential, mean_sem};
use dwtraj::trajectory::{run_ensemble, run_trajectory, Algorithm, MeasurementModel, TrajectoryConfig};
use dwtraj::{ModelParams, QuantumState};

fn main() -> dwtraj::Result<()> {
    let params = ModelParams::from_ratios(20, 1.0, -1.5, 2.0)?;
    let initial = QuantumState::number_state(20, 17);
    let t_max = 10.0;

    for alg in [Algorithm::EventDriven, Algorithm::FirstOrder { dt: 1e-3 }] {
        let cfg = TrajectoryConfig::new(params, MeasurementModel::Linear, alg, t_max).with_samples(11);
        let ens = run_ensemble(&cfg, &initial, 500)?;
        let (m, s) = mean_sem(ens.records.iter().map(|r| r.jumps.len() as f64));
        println!("{alg:?}: {m:.2} +- {s:.2} clicks (expected {})", params.g_total() * t_max);
    }

    let cfg = TrajectoryConfig::new(params, MeasurementModel::Linear, Algorithm::EventDriven, 500.0).with_samples(2);
    let rec = run_trajectory(&cfg, &initial)?;
    let gaps: Vec<f64> = std::iter::once(rec.jumps[0].time)
        .chain(rec.jumps.windows(2).map(|w| w[1].time - w[0].time))
        .collect();
    let ks = ks_exponential(&gaps, params.g_total());
    println!("{} waiting times: KS D = {:.4}, p = {:.3}", gaps.len(), ks.statistic, ks.p_value);
    Ok(())
}
