//! One measured trajectory after the interaction quench: the record shows
//! self-trapping in either well and symmetric oscillations, and clicks
//! arrive at the constant total rate `N Gamma`.
//!
//! `cargo run --release --example quench_trajectory -- [N] [N Gamma/J] [out_dir]`

use std::path::PathBuf;

use dwtraj::runner::{run_experiment, Command, ExperimentConfig};
use dwtraj::runner::table::Table;

fn main() -> dwtraj::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_atoms = args.next().map_or(1000, |s| s.parse().expect("N must be an integer"));
    let g = args.next().map_or(100.0, |s| s.parse().expect("N Gamma/J must be a number"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/trajectory".into()));
    let cfg = ExperimentConfig {
        n_atoms,
        chi_over_j_run: -1.5,
        n_gamma_over_j: g,
        t_max_j: 50.0,
        sample_count: 2500,
        seed: 7,
        out_dir: out.clone(),
        ..Default::default()
    };
    let result = run_experiment(&cfg, &Command::Trajectory)?;
    println!("{}", result.summary);

    let path = out.join("trajectory.csv");
    let table = Table::read(&path)?;
    let z = table.column("z", &path)?;
    let right = z.iter().filter(|&&z| z > 0.5).count();
    let left = z.iter().filter(|&&z| z < -0.5).count();
    println!("samples with z > 0.5: {right}, z < -0.5: {left}, of {}", z.len());
    Ok(())
}
