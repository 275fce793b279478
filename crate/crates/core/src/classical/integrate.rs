use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{energy_zphi, rhs_zphi, AmplitudeState, ClassicalState, MeanFieldParams};
use crate::error::{Error, Result};
use crate::fock::wrap_angle;
use crate::ode::{Dopri5, Tolerances};

/// Switch to the amplitude chart above this `|z|`.
const ENTER_AMPLITUDE: f64 = 0.99;
/// Switch back to the `(z, phi)` chart below this `|z|`.
const LEAVE_AMPLITUDE: f64 = 0.9;

/// Uniformly sampled classical trajectory.
#[derive(Debug, Clone)]
pub struct ClassicalRun {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub energies: Vec<f64>,
    /// Largest `|H(t) - H(0)|` over all accepted steps.
    pub max_energy_drift: f64,
}

/// Integrator state in whichever chart is active. Amplitudes are normalized
/// to unit total population, so `U = chi`.
enum Chart {
    Angle(Vec<f64>),
    Amplitude(Vec<f64>),
}

impl Chart {
    fn state(&self) -> ClassicalState {
        match self {
            Chart::Angle(y) => ClassicalState { z: y[0].clamp(-1.0, 1.0), phi: wrap_angle(y[1]) },
            Chart::Amplitude(y) => amplitudes(y).to_classical(),
        }
    }

    fn energy(&self, p: &MeanFieldParams) -> f64 {
        match self {
            Chart::Angle(y) => energy_zphi(y[0], y[1], p),
            Chart::Amplitude(y) => {
                // sqrt(1 - z^2) cos(phi) = 2 Re(b_r conj(b_l)) / n, regular at the poles.
                let a = amplitudes(y);
                let n = a.population();
                let z = (a.b_r.norm_sqr() - a.b_l.norm_sqr()) / n;
                -4.0 * p.j_tunnel * (a.b_r * a.b_l.conj()).re / n + p.chi * (1.0 + z * z)
            }
        }
    }
}

fn amplitudes(y: &[f64]) -> AmplitudeState {
    AmplitudeState {
        b_r: Complex64::new(y[0], y[1]),
        b_l: Complex64::new(y[2], y[3]),
    }
}

fn to_amplitude_chart(s: ClassicalState) -> Vec<f64> {
    let a = AmplitudeState::from_classical(s, 1.0);
    vec![a.b_r.re, a.b_r.im, a.b_l.re, a.b_l.im]
}

/// Integrate the mean-field flow from `s0` over `[0, t_max]`, sampling
/// `sample_count` uniformly spaced times (both ends included).
///
/// The run fails if the energy drifts by more than `tol * (1 + |H(0)|)`.
pub fn integrate_classical(
    s0: ClassicalState,
    p: &MeanFieldParams,
    t_max: f64,
    sample_count: usize,
    tol: f64,
) -> Result<ClassicalRun> {
    if !(t_max > 0.0) || !(tol > 0.0) || sample_count < 2 {
        return Err(Error::InvalidParams(format!(
            "need t_max > 0, tol > 0 and at least 2 samples (t_max = {t_max}, tol = {tol}, samples = {sample_count})"
        )));
    }
    let step_tol = tol * 1e-3;
    let mut solver = Dopri5::new(Tolerances::both(step_tol), 1e-3);
    solver.max_rejections = 200;

    let mut chart = if s0.z.abs() > ENTER_AMPLITUDE {
        Chart::Amplitude(to_amplitude_chart(s0))
    } else {
        Chart::Angle(vec![s0.z, s0.phi])
    };
    let e0 = chart.energy(p);
    let bound = tol * (1.0 + e0.abs());
    let mut max_drift: f64 = 0.0;

    let breakdown = Cell::new(false);
    let mut angle_rhs = |_t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| match rhs_zphi(y[0], y[1], p) {
        Some((dz, dphi)) => {
            dy[0] = dz;
            dy[1] = dphi;
        }
        None => {
            breakdown.set(true);
            dy[0] = f64::NAN;
            dy[1] = f64::NAN;
        }
    };
    let mut amp_rhs = |_t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| {
        let (dr, dl) = super::amplitude_rhs(&amplitudes(y), p.j_tunnel, p.chi);
        dy[0] = dr.re;
        dy[1] = dr.im;
        dy[2] = dl.re;
        dy[3] = dl.im;
    };

    let mut times = Vec::with_capacity(sample_count);
    let mut states = Vec::with_capacity(sample_count);
    let mut energies = Vec::with_capacity(sample_count);
    let mut t = 0.0;
    for i in 0..sample_count {
        let target = t_max * i as f64 / (sample_count - 1) as f64;
        while t < target {
            let s = chart.state();
            match &chart {
                Chart::Angle(_) if s.z.abs() > ENTER_AMPLITUDE => {
                    chart = Chart::Amplitude(to_amplitude_chart(s));
                }
                Chart::Amplitude(_) if s.z.abs() < LEAVE_AMPLITUDE => {
                    chart = Chart::Angle(vec![s.z, s.phi]);
                }
                _ => {}
            }
            let outcome = match &mut chart {
                Chart::Angle(y) => {
                    breakdown.set(false);
                    let r = solver.step(&mut angle_rhs, t, y, target);
                    if breakdown.get() {
                        None
                    } else {
                        // Keep phi bounded so relative tolerances stay meaningful.
                        if y[1].abs() > PI {
                            y[1] = (y[1] + PI).rem_euclid(2.0 * PI) - PI;
                        }
                        Some(r?)
                    }
                }
                Chart::Amplitude(y) => Some(solver.step(&mut amp_rhs, t, y, target)?),
            };
            let Some(h) = outcome else {
                // A stage hit the pole: redo the step from `s` in the regular chart.
                chart = Chart::Amplitude(to_amplitude_chart(s));
                continue;
            };
            t = if target - (t + h) <= 1e-13 * target.max(1.0) { target } else { t + h };
            let drift = (chart.energy(p) - e0).abs();
            max_drift = max_drift.max(drift);
            if drift > bound {
                return Err(Error::tolerance(
                    t,
                    format!("energy drift {drift:e} exceeds {bound:e}"),
                ));
            }
        }
        times.push(target);
        states.push(chart.state());
        energies.push(chart.energy(p));
    }
    Ok(ClassicalRun {
        times,
        states,
        energies,
        max_energy_drift: max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classical_energy, separatrix_energy};

    fn p() -> MeanFieldParams {
        MeanFieldParams::new(1.0, -1.5).unwrap()
    }

    #[test]
    fn fixed_point_stays_put() {
        let run = integrate_classical(ClassicalState::new(0.0, 0.0).unwrap(), &p(), 50.0, 101, 1e-10)
            .unwrap();
        assert!(run.states.iter().all(|s| s.z == 0.0 && s.phi == 0.0));
    }

    #[test]
    fn inside_lobe_keeps_sign() {
        let s0 = ClassicalState::new(0.5, 0.0).unwrap();
        assert!(classical_energy(s0, &p()) < separatrix_energy(&p()).unwrap());
        let run = integrate_classical(s0, &p(), 60.0, 3001, 1e-10).unwrap();
        assert!(run.states.iter().all(|s| s.z > 0.0));
    }

    #[test]
    fn outside_lobes_oscillates_symmetrically() {
        // Just outside the separatrix on the phi = pi side.
        let s0 = ClassicalState::new(0.0, 0.3).unwrap();
        assert!(classical_energy(s0, &p()) > separatrix_energy(&p()).unwrap());
        let run = integrate_classical(s0, &p(), 60.0, 3001, 1e-10).unwrap();
        let crossings = run.states.windows(2).filter(|w| w[0].z.signum() != w[1].z.signum()).count();
        assert!(crossings >= 4, "only {crossings} sign changes");
    }

    #[test]
    fn passes_through_pole_via_amplitude_chart() {
        // Strong self-trapping with a running phase gets to |z| close to 1.
        let p = MeanFieldParams::new(1.0, 20.0).unwrap();
        let s0 = ClassicalState::new(0.995, 0.0).unwrap();
        let run = integrate_classical(s0, &p, 20.0, 2001, 1e-10).unwrap();
        assert!(run.max_energy_drift <= 1e-10 * (1.0 + run.energies[0].abs()));
        let start_at_pole = ClassicalState::new(1.0, 0.0).unwrap();
        let run = integrate_classical(start_at_pole, &p, 5.0, 101, 1e-10).unwrap();
        assert!(run.states.iter().all(|s| s.z > 0.9));
    }

    #[test]
    fn time_reversal() {
        // (z, phi) -> (z, -phi) reverses time: evolve forward, reflect, evolve
        // forward again and reflect back to recover the start.
        let s0 = ClassicalState::new(0.3, 0.7).unwrap();
        let t = 7.3;
        let fwd = integrate_classical(s0, &p(), t, 2, 1e-11).unwrap();
        let end = fwd.states[1];
        let mirrored = ClassicalState::new(end.z, -end.phi).unwrap();
        let back = integrate_classical(mirrored, &p(), t, 2, 1e-11).unwrap().states[1];
        let recovered = ClassicalState::new(back.z, -back.phi).unwrap();
        assert!((recovered.z - s0.z).abs() < 1e-8);
        let d = (recovered.phi - s0.phi).abs();
        assert!(d.min(2.0 * PI - d) < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s0 = ClassicalState::new(0.1, 0.0).unwrap();
        assert!(integrate_classical(s0, &p(), 0.0, 10, 1e-9).is_err());
        assert!(integrate_classical(s0, &p(), 1.0, 1, 1e-9).is_err());
        assert!(integrate_classical(s0, &p(), 1.0, 10, 0.0).is_err());
    }
}
