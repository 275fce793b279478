use num_complex::Complex64;
use rand::Rng;

use super::{
    JumpEvent, MeasurementModel, Recorder, TrajectoryConfig, TrajectoryRecord, MAX_STEP_PROBABILITY,
};
use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, Detector, QuantumState};
use crate::ode::{Dopri5, Tolerances};
use crate::propagate::ChebyshevPropagator;

use super::event::NoClickGenerator;

/// Fixed-step sampler: evolve under the no-click generator for `dt`, then
/// decide with one uniform draw whether the right or left detector clicked.
pub struct FirstOrderStepper {
    config: TrajectoryConfig,
    dt: f64,
    unitary: ChebyshevPropagator,
    no_click: NoClickGenerator,
}

impl FirstOrderStepper {
    pub fn new(config: &TrajectoryConfig) -> Result<Self> {
        config.validate()?;
        let dt = match config.algorithm {
            super::Algorithm::FirstOrder { dt } => dt,
            super::Algorithm::EventDriven => {
                return Err(Error::Config("first-order stepper needs a dt".into()))
            }
        };
        let h = build_hamiltonian(&config.params);
        let no_click = NoClickGenerator::new(&config.params, &config.model, h.clone());
        Ok(FirstOrderStepper {
            config: config.clone(),
            dt,
            unitary: ChebyshevPropagator::new(h, config.tol)?,
            no_click,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `state` from `t` to `t + h` (`h <= dt`).
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &QuantumState,
        t: f64,
        h: f64,
        rng: &mut R,
    ) -> Result<(QuantumState, Option<JumpEvent>)> {
        let params = &self.config.params;
        let (rate_r, rate_l) = self.config.model.rates(state, params);
        let (p_r, p_l) = (rate_r * h, rate_l * h);
        if p_r + p_l >= MAX_STEP_PROBABILITY {
            return Err(Error::Config(format!(
                "click probability {} per step at t = {t}; reduce dt",
                p_r + p_l
            )));
        }
        let u: f64 = rng.random();
        let detector = if u < p_r {
            Some(Detector::Right)
        } else if u < p_r + p_l {
            Some(Detector::Left)
        } else {
            None
        };
        if let Some(detector) = detector {
            let next = self.config.model.apply_jump(state, detector)?;
            return Ok((next, Some(JumpEvent { time: t + h, detector })));
        }
        let mut next = state.clone();
        match self.config.model {
            MeasurementModel::Linear => {
                // sum L^+ L = Gamma N / 2 is a c-number: the no-click decay is
                // the factor exp(-N Gamma h / 2) on top of the unitary part.
                self.unitary.propagate(&mut next, h).map_err(|e| at_time(e, t))?;
                next.scale((-0.5 * params.g_total() * h).exp());
            }
            MeasurementModel::Quadratic { .. } => {
                let mut y = next.into_amplitudes();
                let mut solver = Dopri5::new(Tolerances::both(self.config.tol), h);
                let mut f = |_t: f64, psi: &Vec<Complex64>, out: &mut Vec<Complex64>| {
                    self.no_click.apply(psi, out)
                };
                solver.integrate(&mut f, t, &mut y, t + h)?;
                next = QuantumState::from_raw(y);
            }
        }
        next.renormalize().map_err(|e| at_time(e, t + h))?;
        Ok((next, None))
    }
}

pub(crate) fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::Tolerance { reason, .. } => Error::Tolerance { time: t, reason },
        other => other,
    }
}

/// One first-order step of length `dt` from time 0.
pub fn step_first_order<R: Rng + ?Sized>(
    state: &QuantumState,
    config: &TrajectoryConfig,
    rng: &mut R,
) -> Result<(QuantumState, Option<JumpEvent>)> {
    let stepper = FirstOrderStepper::new(config)?;
    stepper.step(state, 0.0, stepper.dt(), rng)
}

pub(super) fn run(config: &TrajectoryConfig, initial: &QuantumState) -> Result<TrajectoryRecord> {
    let stepper = FirstOrderStepper::new(config)?;
    let mut rng = config.rng();
    let mut recorder = Recorder::new(config.sample_times());
    let mut state = initial.clone();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    while let Some(target) = recorder.next_time() {
        let span = target - t;
        if span > 0.0 {
            // Uniform sub-steps no longer than dt that land on the sample time.
            let n = (span / stepper.dt() - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 0..n {
                let t_i = t + h * i as f64;
                let (next, jump) = stepper.step(&state, t_i, h, &mut rng)?;
                state = next;
                if let Some(mut jump) = jump {
                    if i + 1 == n {
                        jump.time = target;
                    }
                    jumps.push(jump);
                }
            }
            t = target;
        }
        recorder.record(&state);
    }
    Ok(recorder.finish(jumps, state, config))
}
