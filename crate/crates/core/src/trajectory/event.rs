use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::first_order::at_time;
use super::{JumpEvent, MeasurementModel, Recorder, TrajectoryConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, Detector, QuantumState, TridiagonalHamiltonian};
use crate::ode::{Dopri5, Tolerances};
use crate::params::ModelParams;
use crate::propagate::ChebyshevPropagator;

/// `psi -> -i H psi - D psi` with `D = sum_i L_i^+ L_i` (diagonal).
pub(crate) struct NoClickGenerator {
    h: TridiagonalHamiltonian,
    damping: Vec<f64>,
}

impl NoClickGenerator {
    pub(crate) fn new(params: &ModelParams, model: &MeasurementModel, h: TridiagonalHamiltonian) -> Self {
        let damping = (0..=params.n_atoms).map(|k| model.damping(params, k)).collect();
        NoClickGenerator { h, damping }
    }

    pub(crate) fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        self.h.apply(psi, out);
        for ((o, p), d) in out.iter_mut().zip(psi).zip(&self.damping) {
            *o = Complex64::new(o.im, -o.re) - p * d;
        }
    }
}

fn choose_detector<R: Rng + ?Sized>(rate_r: f64, rate_l: f64, rng: &mut R) -> Detector {
    let u: f64 = rng.random();
    if u * (rate_r + rate_l) < rate_r {
        Detector::Right
    } else {
        Detector::Left
    }
}

/// Linear model: the total click rate is the constant `Gamma N`, so waiting
/// times are exponential and the state evolves unitarily between clicks.
pub(super) fn run_linear(config: &TrajectoryConfig, initial: &QuantumState) -> Result<TrajectoryRecord> {
    let params = &config.params;
    let prop = ChebyshevPropagator::new(build_hamiltonian(params), config.tol)?;
    let total = params.g_total();
    let waiting = if total > 0.0 {
        Some(Exp::new(total).map_err(|e| Error::InvalidParams(e.to_string()))?)
    } else {
        None
    };
    let mut rng = config.rng();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| waiting.map_or(f64::INFINITY, |w| w.sample(rng));

    let mut recorder = Recorder::new(config.sample_times());
    let mut state = initial.clone();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    let mut next_click = draw(&mut rng);
    while let Some(sample) = recorder.next_time() {
        if next_click <= sample {
            prop.propagate(&mut state, next_click - t).map_err(|e| at_time(e, t))?;
            t = next_click;
            let (rate_r, rate_l) = config.model.rates(&state, params);
            let detector = choose_detector(rate_r, rate_l, &mut rng);
            state = config.model.apply_jump(&state, detector).map_err(|e| at_time(e, t))?;
            jumps.push(JumpEvent { time: t, detector });
            next_click = t + draw(&mut rng);
        } else {
            prop.propagate(&mut state, sample - t).map_err(|e| at_time(e, t))?;
            t = sample;
            recorder.record(&state);
        }
    }
    Ok(recorder.finish(jumps, state, config))
}

/// Quadratic model: the no-click evolution is non-Hermitian with a
/// state-dependent decay. The survival probability is accumulated step by
/// step and a click fires when it falls to a uniform threshold; the crossing
/// time is located by bisection on the step length.
pub(super) fn run_quadratic(config: &TrajectoryConfig, initial: &QuantumState) -> Result<TrajectoryRecord> {
    let params = &config.params;
    let gen = NoClickGenerator::new(params, &config.model, build_hamiltonian(params));
    let mut f = |_t: f64, psi: &Vec<Complex64>, out: &mut Vec<Complex64>| gen.apply(psi, out);
    let time_tol = 1e-10 * config.t_max;
    let h0 = (0.1 / (gen.h.norm_bound() + config.model.max_total_rate(params)).max(1e-3)).min(config.t_max);
    let mut solver = Dopri5::new(Tolerances::both(config.tol), h0);

    let mut rng = config.rng();
    let mut recorder = Recorder::new(config.sample_times());
    let mut psi = initial.amplitudes().to_vec();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    let mut survival = 1.0;
    let mut threshold: f64 = rng.random();
    while let Some(sample) = recorder.next_time() {
        let before = psi.clone();
        let h = solver.step(&mut f, t, &mut psi, sample).map_err(|e| at_time(e, t))?;
        let norm = norm_sqr(&psi);
        if survival * norm > threshold {
            survival *= norm;
            normalize(&mut psi, norm);
            t = if sample - (t + h) <= time_tol { sample } else { t + h };
            if t == sample {
                recorder.record(&QuantumState::from_raw(psi.clone()));
            }
            continue;
        }
        // Crossing inside (t, t + h]: bisect on the step length.
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > time_tol {
            let mid = 0.5 * (lo + hi);
            let trial = solver.trial(&mut f, t, &before, mid);
            if survival * norm_sqr(&trial.y) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut at_click = solver.trial(&mut f, t, &before, hi).y;
        let n = norm_sqr(&at_click);
        normalize(&mut at_click, n);
        t += hi;
        let state = QuantumState::from_raw(at_click);
        let (rate_r, rate_l) = config.model.rates(&state, params);
        let detector = choose_detector(rate_r, rate_l, &mut rng);
        let next = config.model.apply_jump(&state, detector).map_err(|e| at_time(e, t))?;
        jumps.push(JumpEvent { time: t, detector });
        psi = next.into_amplitudes();
        survival = 1.0;
        threshold = rng.random();
        if sample - t <= time_tol {
            t = sample;
            recorder.record(&QuantumState::from_raw(psi.clone()));
        }
    }
    Ok(recorder.finish(jumps, QuantumState::from_raw(psi), config))
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum()
}

fn normalize(psi: &mut [Complex64], norm_sqr: f64) {
    let s = norm_sqr.sqrt().recip();
    psi.iter_mut().for_each(|c| *c *= s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{evolve_unitary, z_of_state};
    use crate::stats::ks_exponential;
    use crate::trajectory::{run_trajectory, Algorithm};

    #[test]
    fn generator_matches_definition() {
        let p = ModelParams::from_ratios(3, 1.0, 2.0, 0.0).unwrap();
        let m = MeasurementModel::Quadratic { gamma2: 0.3 };
        let h = build_hamiltonian(&p);
        let g = NoClickGenerator::new(&p, &m, h.clone());
        let psi: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let mut out = vec![Complex64::default(); 4];
        g.apply(&psi, &mut out);
        let mut hpsi = vec![Complex64::default(); 4];
        h.apply(&psi, &mut hpsi);
        for k in 0..4 {
            let d = 0.15 * ((k * k + (3 - k) * (3 - k)) as f64);
            let expect = Complex64::new(0.0, -1.0) * hpsi[k] - psi[k] * d;
            assert!((out[k] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_without_gamma_is_unitary() {
        let p = ModelParams::from_ratios(10, 1.0, -1.5, 0.0).unwrap();
        let c = TrajectoryConfig::new(p, MeasurementModel::Linear, Algorithm::EventDriven, 3.0).with_samples(4);
        let s0 = QuantumState::number_state(10, 8);
        let rec = run_trajectory(&c, &s0).unwrap();
        assert!(rec.jumps.is_empty());
        let exact = evolve_unitary(&s0, &p, 3.0, 1e-13).unwrap();
        assert!((rec.final_state.fidelity(&exact) - 1.0).abs() < 1e-11);
        assert!((rec.z_series[3] - z_of_state(&exact)).abs() < 1e-11);
    }

    #[test]
    fn linear_waiting_times_are_exponential() {
        let p = ModelParams::from_ratios(8, 1.0, -1.5, 2.0).unwrap();
        let c = TrajectoryConfig::new(p, MeasurementModel::Linear, Algorithm::EventDriven, 200.0)
            .with_samples(11)
            .with_seed(9);
        let rec = run_trajectory(&c, &QuantumState::binomial(8)).unwrap();
        let gaps: Vec<f64> = std::iter::once(rec.jumps[0].time)
            .chain(rec.jumps.windows(2).map(|w| w[1].time - w[0].time))
            .collect();
        assert!(ks_exponential(&gaps, 2.0).p_value > 0.01);
    }

    #[test]
    fn quadratic_survival_of_number_state() {
        // Without tunnelling a number state stays put and its survival is
        // exp(-gamma2 (k^2 + (N-k)^2) t): the first click time is exponential.
        let p = ModelParams::new(4, 1e-12, 0.0, 0.0).unwrap();
        let m = MeasurementModel::Quadratic { gamma2: 0.1 };
        let s0 = QuantumState::number_state(4, 3);
        let rate = 0.1 * 10.0;
        let firsts: Vec<f64> = (0..400)
            .map(|i| {
                let c = TrajectoryConfig::new(p, m, Algorithm::EventDriven, 30.0).with_samples(2).with_index(i);
                run_trajectory(&c, &s0).unwrap().jumps[0].time
            })
            .collect();
        assert!(ks_exponential(&firsts, rate).p_value > 0.01);
    }

    #[test]
    fn quadratic_state_stays_normalized() {
        let p = ModelParams::from_ratios(12, 1.0, -1.5, 0.0).unwrap();
        let m = MeasurementModel::quadratic_from_total(20.0, 12);
        let c = TrajectoryConfig::new(p, m, Algorithm::EventDriven, 5.0).with_samples(26);
        let rec = run_trajectory(&c, &QuantumState::binomial(12)).unwrap();
        assert_eq!(rec.z_series.len(), 26);
        assert!(!rec.jumps.is_empty());
        assert!((rec.final_state.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
