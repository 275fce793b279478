//! Adaptive Dormand-Prince 5(4) stepping for real or complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimal vector-space operations needed by the stepper.
pub trait OdeVector: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// RMS of `err_i / (atol + rtol * max(|y0_i|, |y1_i|))`.
    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeVector for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let sum: f64 = err
            .iter()
            .zip(y0.iter().zip(y1))
            .map(|(e, (a, b))| {
                let sc = atol + rtol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (sum / err.len().max(1) as f64).sqrt()
    }
}

impl OdeVector for Vec<Complex64> {
    fn zeros_like(&self) -> Self {
        vec![Complex64::default(); self.len()]
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += v * a;
        }
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let sum: f64 = err
            .iter()
            .zip(y0.iter().zip(y1))
            .map(|(e, (a, b))| {
                let sc = atol + rtol * a.norm().max(b.norm());
                e.norm_sqr() / (sc * sc)
            })
            .sum();
        (sum / err.len().max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerances {
    pub fn both(tol: f64) -> Self {
        Tolerances { atol: tol, rtol: tol }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Outcome of a single trial step of size `h` from `(t, y)`.
pub struct TrialStep<V> {
    pub y: V,
    /// Scaled error estimate; `<= 1` means acceptable.
    pub error: f64,
}

/// Dormand-Prince 5(4) with the usual elementary step-size controller.
pub struct Dopri5 {
    pub tol: Tolerances,
    /// Current step-size proposal, carried between calls.
    pub h: f64,
    pub h_min: f64,
    pub max_rejections: usize,
}

impl Dopri5 {
    pub fn new(tol: Tolerances, h_initial: f64) -> Self {
        Dopri5 {
            tol,
            h: h_initial,
            h_min: 1e-14,
            max_rejections: 60,
        }
    }

    /// One trial step; no step-size bookkeeping.
    pub fn trial<V, F>(&self, f: &mut F, t: f64, y: &V, h: f64) -> TrialStep<V>
    where
        V: OdeVector,
        F: FnMut(f64, &V, &mut V),
    {
        let mut k1 = y.zeros_like();
        f(t, y, &mut k1);
        let stage = |parts: &[(f64, &V)]| {
            let mut s = y.clone();
            for (a, k) in parts {
                s.axpy(h * a, k);
            }
            s
        };
        let mut k2 = y.zeros_like();
        f(t + C2 * h, &stage(&[(A21, &k1)]), &mut k2);
        let mut k3 = y.zeros_like();
        f(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]), &mut k3);
        let mut k4 = y.zeros_like();
        f(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]), &mut k4);
        let mut k5 = y.zeros_like();
        f(
            t + C5 * h,
            &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            &mut k5,
        );
        let mut k6 = y.zeros_like();
        f(
            t + h,
            &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            &mut k6,
        );
        let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let mut k7 = y.zeros_like();
        f(t + h, &y_new, &mut k7);
        let mut err = y.zeros_like();
        for (e, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
            err.axpy(h * e, k);
        }
        let error = V::scaled_error(&err, y, &y_new, self.tol.atol, self.tol.rtol);
        TrialStep { y: y_new, error }
    }

    /// Take one accepted step from `t` not exceeding `t_end`. Returns the
    /// step size used; `y` is updated in place.
    pub fn step<V, F>(&mut self, f: &mut F, t: f64, y: &mut V, t_end: f64) -> Result<f64>
    where
        V: OdeVector,
        F: FnMut(f64, &V, &mut V),
    {
        let remaining = t_end - t;
        if remaining <= 0.0 {
            return Ok(0.0);
        }
        let mut rejections = 0;
        loop {
            let h = self.h.min(remaining);
            let trial = self.trial(f, t, y, h);
            let err = trial.error;
            if err.is_finite() && err <= 1.0 {
                *y = trial.y;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Do not let a short final step collapse the proposal.
                if h == self.h || factor > 1.0 {
                    self.h = h * factor;
                }
                return Ok(h);
            }
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            self.h = h * factor;
            rejections += 1;
            if self.h < self.h_min * t.abs().max(1.0) || rejections > self.max_rejections {
                return Err(Error::tolerance(t, format!("step size underflow (h = {:e})", self.h)));
            }
        }
    }

    /// Integrate from `t` to `t_end` exactly.
    pub fn integrate<V, F>(&mut self, f: &mut F, mut t: f64, y: &mut V, t_end: f64) -> Result<()>
    where
        V: OdeVector,
        F: FnMut(f64, &V, &mut V),
    {
        while t < t_end {
            let h = self.step(f, t, y, t_end)?;
            t = if t_end - (t + h) <= 1e-14 * t_end.abs().max(1.0) { t_end } else { t + h };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_energy() {
        let mut f = |_t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut y = vec![1.0, 0.0];
        let mut solver = Dopri5::new(Tolerances::both(1e-12), 0.01);
        solver.integrate(&mut f, 0.0, &mut y, 20.0).unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-9);
        assert!((y[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn complex_rotation() {
        let mut f = |_t: f64, y: &Vec<Complex64>, dy: &mut Vec<Complex64>| {
            dy[0] = y[0] * Complex64::new(-0.1, -2.0);
        };
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut solver = Dopri5::new(Tolerances::both(1e-12), 0.01);
        solver.integrate(&mut f, 0.0, &mut y, 3.0).unwrap();
        let exact = Complex64::new(-0.3, -6.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn blowup_reports_underflow() {
        let mut f = |_t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = y[0] * y[0];
        let mut y = vec![1.0];
        let mut solver = Dopri5::new(Tolerances::both(1e-10), 0.1);
        let r = solver.integrate(&mut f, 0.0, &mut y, 2.0);
        assert!(matches!(r, Err(Error::Tolerance { .. })));
    }
}
