use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dwtraj::runner::{run_experiment, AlgorithmKind, Command, ExperimentConfig, ModelKind};
use dwtraj::Error;

#[derive(Parser)]
#[command(name = "dwtraj", version, about = "Double-well condensate: mean-field flow, quantum trajectories, master equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Energy surface and separatrix (portrait.csv, separatrix.csv).
    Portrait(Overrides),
    /// Mean-field trajectory from a noisy initial point (classical.csv).
    Classical(Overrides),
    /// One measured quantum trajectory after the quench (trajectory.csv, jumps.csv).
    Trajectory(Overrides),
    /// Ensemble averages over trajectories (ensemble_mean.csv).
    Ensemble(Overrides),
    /// Dense master equation at small N (master.csv).
    Master(Overrides),
    /// Compare ensemble_mean.csv (or master.csv) against master.csv.
    Compare {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        master: PathBuf,
    },
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML file with ExperimentConfig keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_atoms: Option<usize>,
    #[arg(long)]
    j_tunnel: Option<f64>,
    /// Interaction after the quench, chi/J.
    #[arg(long, alias = "chi-over-j-run", allow_hyphen_values = true)]
    chi_over_j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    chi_over_j_prepare: Option<f64>,
    #[arg(long)]
    n_gamma_over_j: Option<f64>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    #[arg(long)]
    g2_total_over_j: Option<f64>,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<AlgorithmKind>,
    #[arg(long)]
    dt_j: Option<f64>,
    #[arg(long)]
    t_max_j: Option<f64>,
    #[arg(long)]
    sample_count: Option<usize>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "linear" => Ok(ModelKind::Linear),
        "quadratic" => Ok(ModelKind::Quadratic),
        _ => Err(format!("unknown model {s:?} (linear or quadratic)")),
    }
}

fn parse_algorithm(s: &str) -> Result<AlgorithmKind, String> {
    match s {
        "event_driven" | "event-driven" => Ok(AlgorithmKind::EventDriven),
        "first_order" | "first-order" => Ok(AlgorithmKind::FirstOrder),
        _ => Err(format!("unknown algorithm {s:?} (event_driven or first_order)")),
    }
}

macro_rules! apply {
    ($cfg:ident, $o:ident, $($field:ident => $target:ident),* $(,)?) => {
        $(if let Some(v) = $o.$field { $cfg.$target = v; })*
    };
}

fn build_config(o: Overrides, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply!(cfg, o,
        n_atoms => n_atoms,
        j_tunnel => j_tunnel,
        chi_over_j => chi_over_j_run,
        n_gamma_over_j => n_gamma_over_j,
        model => model,
        algorithm => algorithm,
        t_max_j => t_max_j,
        sample_count => sample_count,
        n_traj => n_traj,
        tol => tol,
        z0 => z0,
        phi0 => phi0,
        noise => noise,
    );
    if o.chi_over_j_prepare.is_some() {
        cfg.chi_over_j_prepare = o.chi_over_j_prepare;
    }
    if o.g2_total_over_j.is_some() {
        cfg.g2_total_over_j = o.g2_total_over_j;
    }
    if o.dt_j.is_some() {
        cfg.dt_j = o.dt_j;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, Error> {
    let (overrides, command) = match cli.command {
        Cmd::Portrait(o) => (o, Command::Portrait),
        Cmd::Classical(o) => (o, Command::Classical),
        Cmd::Trajectory(o) => (o, Command::Trajectory),
        Cmd::Ensemble(o) => (o, Command::Ensemble),
        Cmd::Master(o) => (o, Command::Master),
        Cmd::Compare { overrides, ensemble, master } => (overrides, Command::Compare { ensemble, master }),
    };
    let cfg = build_config(overrides, cli.seed, cli.out_dir)?;
    let out = run_experiment(&cfg, &command)?;
    let files: Vec<String> = out.files.iter().map(|f| f.display().to_string()).collect();
    Ok(format!("{}: {}\nwrote {}", command.name(), out.summary, files.join(", ")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dwtraj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
