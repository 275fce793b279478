//! Mean-field (c-number) two-mode model.
//!
//! Replacing the mode operators by complex amplitudes gives
//! `i d b_r/dt = -J b_l + 2 U |b_r|^2 b_r` (and `r <-> l`). In the canonical
//! chart `z = (|b_r|^2 - |b_l|^2) / N`, `phi = arg(b_r conj(b_l))` the flow is
//! generated by
//!
//! `H(z, phi) = -2 J sqrt(1 - z^2) cos(phi) + chi (1 + z^2)`, `chi = N U`,
//!
//! with `dz/dt = +dH/dphi` and `dphi/dt = -dH/dz`, which is the orientation
//! the amplitude equations induce.

mod integrate;
mod stability;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::wrap_angle;

pub use integrate::{integrate_classical, ClassicalRun};
pub use stability::{
    fixed_points, phase_portrait, separatrix, separatrix_energy, FixedPointReport, PhasePortrait,
    Separatrix, SeparatrixPoint, Stability,
};

/// Distance from `|z| = 1` at which the `(z, phi)` chart is declared broken.
pub const POLE_EPSILON: f64 = 1e-9;

/// Default standard deviation of the noise used to launch the instability.
pub const DEFAULT_NOISE_AMPLITUDE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub j_tunnel: f64,
    pub chi: f64,
}

impl MeanFieldParams {
    pub fn new(j_tunnel: f64, chi: f64) -> Result<Self> {
        if !(j_tunnel > 0.0) || !j_tunnel.is_finite() || !chi.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mean-field parameters need J > 0 and finite chi (J = {j_tunnel}, chi = {chi})"
            )));
        }
        Ok(MeanFieldParams { j_tunnel, chi })
    }

    pub fn chi_over_j(&self) -> f64 {
        self.chi / self.j_tunnel
    }
}

/// Point of the `(z, phi)` phase space, `phi` wrapped into `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub z: f64,
    pub phi: f64,
}

impl ClassicalState {
    pub fn new(z: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&z) || !phi.is_finite() {
            return Err(Error::InvalidParams(format!("z must lie in [-1, 1], got {z}")));
        }
        Ok(ClassicalState { z, phi: wrap_angle(phi) })
    }
}

/// Complex-amplitude chart, regular at `z = +-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub b_r: Complex64,
    pub b_l: Complex64,
}

impl AmplitudeState {
    /// Amplitudes with `|b_r|^2 + |b_l|^2 = n_atoms` representing `s`.
    pub fn from_classical(s: ClassicalState, n_atoms: f64) -> Self {
        let half = 0.5 * s.phi;
        AmplitudeState {
            b_r: Complex64::from_polar((0.5 * n_atoms * (1.0 + s.z)).max(0.0).sqrt(), half),
            b_l: Complex64::from_polar((0.5 * n_atoms * (1.0 - s.z)).max(0.0).sqrt(), -half),
        }
    }

    pub fn population(&self) -> f64 {
        self.b_r.norm_sqr() + self.b_l.norm_sqr()
    }

    pub fn to_classical(&self) -> ClassicalState {
        let n = self.population();
        let z = ((self.b_r.norm_sqr() - self.b_l.norm_sqr()) / n).clamp(-1.0, 1.0);
        ClassicalState { z, phi: wrap_angle((self.b_r * self.b_l.conj()).arg()) }
    }
}

pub fn classical_energy(s: ClassicalState, p: &MeanFieldParams) -> f64 {
    energy_zphi(s.z, s.phi, p)
}

pub(crate) fn energy_zphi(z: f64, phi: f64, p: &MeanFieldParams) -> f64 {
    -2.0 * p.j_tunnel * (1.0 - z * z).max(0.0).sqrt() * phi.cos() + p.chi * (1.0 + z * z)
}

/// `(dz/dt, dphi/dt)`; fails when `|z|` is within [`POLE_EPSILON`] of 1.
pub fn mean_field_rhs(s: ClassicalState, p: &MeanFieldParams) -> Result<(f64, f64)> {
    rhs_zphi(s.z, s.phi, p).ok_or(Error::ChartBreakdown { z: s.z })
}

#[inline]
pub(crate) fn rhs_zphi(z: f64, phi: f64, p: &MeanFieldParams) -> Option<(f64, f64)> {
    if !(z.abs() < 1.0 - POLE_EPSILON) {
        return None;
    }
    let root = (1.0 - z * z).sqrt();
    let j = p.j_tunnel;
    let dz = 2.0 * j * root * phi.sin();
    let dphi = -2.0 * j * z * phi.cos() / root - 2.0 * p.chi * z;
    Some((dz, dphi))
}

/// Time derivatives `(d b_r/dt, d b_l/dt)` from
/// `i d b_r/dt = -J b_l + 2 U |b_r|^2 b_r`.
pub fn amplitude_rhs(s: &AmplitudeState, j_tunnel: f64, u_int: f64) -> (Complex64, Complex64) {
    let minus_i = Complex64::new(0.0, -1.0);
    let dr = minus_i * (-s.b_l * j_tunnel + s.b_r * (2.0 * u_int * s.b_r.norm_sqr()));
    let dl = minus_i * (-s.b_r * j_tunnel + s.b_l * (2.0 * u_int * s.b_l.norm_sqr()));
    (dr, dl)
}

/// Add independent Gaussian offsets of standard deviation `amplitude` to
/// `z` and `phi`; `z` is clamped to `[-1, 1]` and `phi` wrapped.
pub fn perturb<R: Rng + ?Sized>(s: ClassicalState, amplitude: f64, rng: &mut R) -> ClassicalState {
    if amplitude == 0.0 {
        return s;
    }
    let normal = Normal::new(0.0, amplitude).expect("finite nonnegative amplitude");
    let dz = normal.sample(rng);
    let dphi = normal.sample(rng);
    ClassicalState {
        z: (s.z + dz).clamp(-1.0, 1.0),
        phi: wrap_angle(s.phi + dphi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p() -> MeanFieldParams {
        MeanFieldParams::new(1.0, -1.5).unwrap()
    }

    #[test]
    fn energy_examples() {
        let s = |z, phi| ClassicalState::new(z, phi).unwrap();
        assert_abs_diff_eq!(classical_energy(s(0.0, 0.0), &p()), -3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_energy(s(0.0, PI), &p()), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_energy(s(1.0, 1.234), &p()), -3.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_examples() {
        let s = |z, phi| ClassicalState::new(z, phi).unwrap();
        let (dz, dphi) = mean_field_rhs(s(0.0, 0.0), &p()).unwrap();
        assert_eq!((dz, dphi), (0.0, 0.0));
        let (dz, dphi) = mean_field_rhs(s(0.0, FRAC_PI_2), &p()).unwrap();
        assert_abs_diff_eq!(dz, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dphi, 0.0, epsilon = 1e-15);
        let (dz, dphi) = mean_field_rhs(s(0.5, 0.0), &p()).unwrap();
        assert_abs_diff_eq!(dz, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dphi, -(2.0 * 0.5 / 0.75f64.sqrt() - 1.5), epsilon = 1e-14);
        assert!(matches!(
            mean_field_rhs(s(1.0, 0.0), &p()),
            Err(Error::ChartBreakdown { .. })
        ));
    }

    #[test]
    fn rhs_is_hamiltonian_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..100 {
            let z = rng.random_range(-0.95..0.95);
            let phi = rng.random_range(0.0..2.0 * PI);
            let chi = rng.random_range(-3.0..3.0);
            let p = MeanFieldParams::new(rng.random_range(0.2..2.0), chi).unwrap();
            let dh_dphi = (energy_zphi(z, phi + h, &p) - energy_zphi(z, phi - h, &p)) / (2.0 * h);
            let dh_dz = (energy_zphi(z + h, phi, &p) - energy_zphi(z - h, phi, &p)) / (2.0 * h);
            let (dz, dphi) = rhs_zphi(z, phi, &p).unwrap();
            assert_abs_diff_eq!(dz, dh_dphi, epsilon = 1e-8);
            assert_abs_diff_eq!(dphi, -dh_dz, epsilon = 1e-8);
        }
    }

    #[test]
    fn symmetric_noninteracting_amplitudes_rotate() {
        let n = 8.0;
        let b = (n / 2.0f64).sqrt();
        let s = AmplitudeState { b_r: Complex64::new(b, 0.0), b_l: Complex64::new(b, 0.0) };
        let (dr, dl) = amplitude_rhs(&s, 1.0, 0.0);
        // i d b_r/dt = -J b_l: pure rotation, no population transfer.
        assert_abs_diff_eq!(dr.re, 0.0);
        assert_abs_diff_eq!(dr.im, b, epsilon = 1e-15);
        assert_eq!(dr, dl);
        let zdot = 2.0 * (s.b_r.conj() * dr).re - 2.0 * (s.b_l.conj() * dl).re;
        assert_abs_diff_eq!(zdot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_left_well_has_no_instantaneous_transfer() {
        let s = AmplitudeState { b_r: Complex64::new(2.0, 0.0), b_l: Complex64::default() };
        let (dr, _) = amplitude_rhs(&s, 1.0, 0.3);
        let dnr = 2.0 * (s.b_r.conj() * dr).re;
        assert_abs_diff_eq!(dnr, 0.0, epsilon = 1e-15);
    }

    /// Map the amplitude flow through `z = (|b_r|^2 - |b_l|^2)/N`,
    /// `phi = arg(b_r conj(b_l))` analytically.
    fn induced_flow(s: &AmplitudeState, j: f64, u: f64) -> (f64, f64) {
        let (dr, dl) = amplitude_rhs(s, j, u);
        let n = s.population();
        let dz = 2.0 * ((s.b_r.conj() * dr).re - (s.b_l.conj() * dl).re) / n;
        let w = s.b_r * s.b_l.conj();
        let dw = dr * s.b_l.conj() + s.b_r * dl.conj();
        let dphi = (dw / w).im;
        (dz, dphi)
    }

    proptest! {
        #[test]
        fn chart_equivalence(
            z in -0.999f64..0.999, phi in 0.0f64..6.28, chi in -3.0f64..3.0,
            j in 0.2f64..2.0, n in 1.0f64..1e4,
        ) {
            let p = MeanFieldParams::new(j, chi).unwrap();
            let amp = AmplitudeState::from_classical(ClassicalState::new(z, phi).unwrap(), n);
            let (dz_a, dphi_a) = induced_flow(&amp, j, chi / n);
            let (dz, dphi) = rhs_zphi(z, wrap_angle(phi), &p).unwrap();
            prop_assert!((dz - dz_a).abs() < 1e-9);
            prop_assert!((dphi - dphi_a).abs() < 1e-9 * (1.0 + dphi.abs()));
        }

        #[test]
        fn chart_round_trip(z in -1.0f64..=1.0, phi in 0.0f64..6.28, n in 1.0f64..100.0) {
            let s = ClassicalState::new(z, phi).unwrap();
            let back = AmplitudeState::from_classical(s, n).to_classical();
            prop_assert!((back.z - z).abs() < 1e-12);
            if z.abs() < 0.999_999 {
                let d = (back.phi - s.phi).abs();
                prop_assert!(d.min(2.0 * PI - d) < 1e-9);
            }
        }
    }

    #[test]
    fn perturb_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = ClassicalState::new(0.3, 1.0).unwrap();
        assert_eq!(perturb(s, 0.0, &mut rng), s);
    }

    #[test]
    fn perturb_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = ClassicalState::new(0.2, 3.0).unwrap();
        let sigma = 0.01;
        let n = 100_000;
        let (mut sz, mut sp) = (0.0, 0.0);
        for _ in 0..n {
            let q = perturb(s, sigma, &mut rng);
            sz += q.z;
            sp += q.phi;
        }
        let se = sigma / (n as f64).sqrt();
        assert!((sz / n as f64 - s.z).abs() < 5.0 * se);
        assert!((sp / n as f64 - s.phi).abs() < 5.0 * se);
    }

    #[test]
    fn perturb_respects_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ClassicalState::new(0.999, 0.0).unwrap();
        for _ in 0..1000 {
            let q = perturb(s, 0.1, &mut rng);
            assert!((-1.0..=1.0).contains(&q.z));
            assert!((0.0..2.0 * PI).contains(&q.phi));
        }
    }
}
