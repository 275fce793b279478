//! Quantum trajectories conditioned on photon counting in each well.
//!
//! Two detectors click at rates set by the well populations. The linear
//! model uses `L_{r,l} = sqrt(Gamma/2) sqrt(n_{r,l})`, so the click rates are
//! `Gamma <n_{r,l}>` and the total rate `Gamma N` is the same for every state
//! of the fixed-N sector. The quadratic model uses
//! `L_{r,l} = sqrt(Gamma2/2) n_{r,l}` and has a state-dependent total rate.
//!
//! Two samplers are provided:
//! * [`Algorithm::FirstOrder`]: fixed steps `dt`, one uniform draw per step,
//!   at most one click per step.
//! * [`Algorithm::EventDriven`]: exact waiting-time sampling. For the linear
//!   model clicks form a Poisson process of rate `Gamma N` with purely
//!   Hamiltonian evolution in between; for the quadratic model the norm of
//!   the non-Hermitian no-click evolution is tracked against a uniform
//!   threshold.

mod ensemble;
mod event;
mod first_order;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, Detector, QuantumState};
use crate::params::ModelParams;

pub use ensemble::{run_ensemble, Ensemble, EnsembleStats};
pub use first_order::{step_first_order, FirstOrderStepper};

/// Upper bound on the per-step click probability of the first-order sampler.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;

/// Default local tolerance of the state propagators.
pub const DEFAULT_PROPAGATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Click rates `Gamma <n>`, with `Gamma` from [`ModelParams::gamma_atom`].
    Linear,
    /// Click rates `gamma2 <n^2>`.
    Quadratic { gamma2: f64 },
}

impl MeasurementModel {
    /// Quadratic model whose largest possible total rate `N^2 gamma2` equals
    /// `g2_total`.
    pub fn quadratic_from_total(g2_total: f64, n_atoms: usize) -> Self {
        let n = n_atoms as f64;
        MeasurementModel::Quadratic { gamma2: g2_total / (n * n) }
    }

    pub fn validate(&self) -> Result<()> {
        if let MeasurementModel::Quadratic { gamma2 } = self {
            if !(*gamma2 >= 0.0) || !gamma2.is_finite() {
                return Err(Error::InvalidParams(format!("gamma2 must be >= 0, got {gamma2}")));
            }
        }
        Ok(())
    }

    /// Jump-operator diagonal `l(n)` for a well holding `n` atoms.
    #[inline]
    pub fn jump_weight(&self, params: &ModelParams, occupation: usize) -> f64 {
        let n = occupation as f64;
        match self {
            MeasurementModel::Linear => (0.5 * params.gamma_atom * n).sqrt(),
            MeasurementModel::Quadratic { gamma2 } => (0.5 * gamma2).sqrt() * n,
        }
    }

    /// Click rates `(R_r, R_l) = 2 <L^+ L>` on each detector.
    pub fn rates(&self, state: &QuantumState, params: &ModelParams) -> (f64, f64) {
        match self {
            MeasurementModel::Linear => fock::jump_rates(state, params),
            MeasurementModel::Quadratic { gamma2 } => {
                let n = state.n_atoms();
                let (mut r, mut l) = (0.0, 0.0);
                for (k, c) in state.amplitudes().iter().enumerate() {
                    let p = c.norm_sqr();
                    r += (k * k) as f64 * p;
                    l += ((n - k) * (n - k)) as f64 * p;
                }
                (gamma2 * r, gamma2 * l)
            }
        }
    }

    /// Largest total click rate over all states of the sector.
    pub fn max_total_rate(&self, params: &ModelParams) -> f64 {
        let n = params.n_atoms as f64;
        match self {
            MeasurementModel::Linear => params.gamma_atom * n,
            MeasurementModel::Quadratic { gamma2 } => gamma2 * n * n,
        }
    }

    /// Diagonal of `sum_i L_i^+ L_i` in basis state `k`.
    #[inline]
    pub fn damping(&self, params: &ModelParams, k: usize) -> f64 {
        let n = params.n_atoms;
        let wr = self.jump_weight(params, k);
        let wl = self.jump_weight(params, n - k);
        wr * wr + wl * wl
    }

    /// Apply the click back-action and renormalize.
    pub fn apply_jump(&self, state: &QuantumState, detector: Detector) -> Result<QuantumState> {
        match self {
            MeasurementModel::Linear => fock::apply_jump(state, detector),
            MeasurementModel::Quadratic { .. } => {
                fock::apply_diagonal_jump(state, detector, |occ| occ as f64)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    FirstOrder { dt: f64 },
    EventDriven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub model: MeasurementModel,
    pub algorithm: Algorithm,
    pub t_max: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub trajectory_index: u64,
    /// Local error tolerance of the between-click propagation.
    pub tol: f64,
}

impl TrajectoryConfig {
    pub fn new(params: ModelParams, model: MeasurementModel, algorithm: Algorithm, t_max: f64) -> Self {
        TrajectoryConfig {
            params,
            model,
            algorithm,
            t_max,
            sample_count: 5000,
            seed: 0,
            trajectory_index: 0,
            tol: DEFAULT_PROPAGATION_TOL,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn with_index(mut self, trajectory_index: u64) -> Self {
        self.trajectory_index = trajectory_index;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.model.validate()?;
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.sample_count < 2 {
            return Err(Error::Config("sample_count must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if let Algorithm::FirstOrder { dt } = self.algorithm {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
            let p = self.model.max_total_rate(&self.params) * dt;
            if p >= MAX_STEP_PROBABILITY {
                return Err(Error::Config(format!(
                    "dt = {dt} allows a click probability of {p} per step (must stay below {MAX_STEP_PROBABILITY})"
                )));
            }
        }
        Ok(())
    }

    /// Uniform sampling grid including both end points.
    pub fn sample_times(&self) -> Vec<f64> {
        sample_grid(self.t_max, self.sample_count)
    }

    /// Random stream for this trajectory: keyed by `(seed, trajectory_index)`
    /// so results do not depend on execution order.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trajectory_index);
        rng
    }
}

pub(crate) fn sample_grid(t_max: f64, sample_count: usize) -> Vec<f64> {
    (0..sample_count)
        .map(|i| t_max * i as f64 / (sample_count - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub detector: Detector,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    /// Conditional expectation `<z>` of each sample.
    pub z_series: Vec<f64>,
    /// Conditional second moment `<z^2>`; averages to the master-equation value.
    pub z2_series: Vec<f64>,
    /// `None` where the coherence is too small to define a phase.
    pub phi_series: Vec<Option<f64>>,
    pub jumps: Vec<JumpEvent>,
    pub final_state: QuantumState,
    pub config: TrajectoryConfig,
}

impl TrajectoryRecord {
    /// Cumulative `(right, left)` click counts at each sample time.
    pub fn cumulative_counts(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.sample_times.len());
        let (mut r, mut l, mut next) = (0, 0, 0);
        for &t in &self.sample_times {
            while next < self.jumps.len() && self.jumps[next].time <= t {
                match self.jumps[next].detector {
                    Detector::Right => r += 1,
                    Detector::Left => l += 1,
                }
                next += 1;
            }
            out.push((r, l));
        }
        out
    }

    pub fn count(&self, detector: Detector) -> usize {
        self.jumps.iter().filter(|j| j.detector == detector).count()
    }
}

/// Observables of the normalized conditional state at one sample.
pub(crate) struct Recorder {
    times: Vec<f64>,
    z: Vec<f64>,
    z2: Vec<f64>,
    phi: Vec<Option<f64>>,
}

impl Recorder {
    pub(crate) fn new(times: Vec<f64>) -> Self {
        let n = times.len();
        Recorder {
            times,
            z: Vec::with_capacity(n),
            z2: Vec::with_capacity(n),
            phi: Vec::with_capacity(n),
        }
    }

    pub(crate) fn next_time(&self) -> Option<f64> {
        self.times.get(self.z.len()).copied()
    }

    pub(crate) fn record(&mut self, state: &QuantumState) {
        self.z.push(fock::z_of_state(state));
        self.z2.push(fock::z2_of_state(state));
        self.phi.push(fock::phi_of_state(state));
    }

    pub(crate) fn finish(
        self,
        jumps: Vec<JumpEvent>,
        final_state: QuantumState,
        config: &TrajectoryConfig,
    ) -> TrajectoryRecord {
        TrajectoryRecord {
            sample_times: self.times,
            z_series: self.z,
            z2_series: self.z2,
            phi_series: self.phi,
            jumps,
            final_state,
            config: config.clone(),
        }
    }
}

/// Run one trajectory from `initial` over `[0, t_max]`.
pub fn run_trajectory(config: &TrajectoryConfig, initial: &QuantumState) -> Result<TrajectoryRecord> {
    config.validate()?;
    if initial.n_atoms() != config.params.n_atoms {
        return Err(Error::Config(format!(
            "initial state has N = {} but parameters have N = {}",
            initial.n_atoms(),
            config.params.n_atoms
        )));
    }
    if (initial.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::Config("initial state is not normalized".into()));
    }
    match config.algorithm {
        Algorithm::FirstOrder { .. } => first_order::run(config, initial),
        Algorithm::EventDriven => match config.model {
            MeasurementModel::Linear => event::run_linear(config, initial),
            MeasurementModel::Quadratic { .. } => event::run_quadratic(config, initial),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alg: Algorithm) -> TrajectoryConfig {
        TrajectoryConfig::new(
            ModelParams::from_ratios(6, 1.0, -1.5, 1.0).unwrap(),
            MeasurementModel::Linear,
            alg,
            5.0,
        )
        .with_samples(51)
    }

    #[test]
    fn validation() {
        assert!(cfg(Algorithm::EventDriven).validate().is_ok());
        assert!(cfg(Algorithm::FirstOrder { dt: 0.01 }).validate().is_ok());
        // N Gamma dt = 0.1 hits the bound.
        assert!(matches!(
            cfg(Algorithm::FirstOrder { dt: 0.1 }).validate(),
            Err(Error::Config(_))
        ));
        let mut c = cfg(Algorithm::EventDriven);
        c.sample_count = 1;
        assert!(c.validate().is_err());
        c = cfg(Algorithm::EventDriven);
        c.t_max = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let c = cfg(Algorithm::EventDriven);
        assert!(run_trajectory(&c, &QuantumState::binomial(5)).is_err());
    }

    #[test]
    fn quadratic_model_weights() {
        let p = ModelParams::new(4, 1.0, 0.0, 0.0).unwrap();
        let m = MeasurementModel::quadratic_from_total(8.0, 4);
        assert_eq!(m, MeasurementModel::Quadratic { gamma2: 0.5 });
        let (r, l) = m.rates(&QuantumState::number_state(4, 3), &p);
        assert_eq!((r, l), (4.5, 0.5));
        assert_eq!(m.max_total_rate(&p), 8.0);
        // sum L^+ L = gamma2/2 (k^2 + (N-k)^2)
        assert!((m.damping(&p, 3) - 0.25 * 10.0).abs() < 1e-15);
        let s = m.apply_jump(&QuantumState::binomial(4), Detector::Right).unwrap();
        let lin = MeasurementModel::Linear.apply_jump(&QuantumState::binomial(4), Detector::Right).unwrap();
        assert!(s.mean_right() > lin.mean_right());
    }

    #[test]
    fn linear_damping_is_scalar() {
        let p = ModelParams::new(9, 1.0, 0.0, 0.4).unwrap();
        for k in 0..=9 {
            assert!((MeasurementModel::Linear.damping(&p, k) - 0.5 * 0.4 * 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cumulative_counts() {
        let c = cfg(Algorithm::EventDriven);
        let rec = TrajectoryRecord {
            sample_times: vec![0.0, 1.0, 2.0],
            z_series: vec![0.0; 3],
            z2_series: vec![0.0; 3],
            phi_series: vec![None; 3],
            jumps: vec![
                JumpEvent { time: 0.5, detector: Detector::Right },
                JumpEvent { time: 1.0, detector: Detector::Left },
                JumpEvent { time: 1.5, detector: Detector::Right },
            ],
            final_state: QuantumState::binomial(6),
            config: c,
        };
        assert_eq!(rec.cumulative_counts(), vec![(0, 0), (1, 1), (2, 1)]);
    }
}
