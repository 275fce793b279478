//! Exact two-mode model on the fixed-N Fock basis.
//!
//! Basis index `k` is the right-well occupation: amplitude `k` multiplies
//! `|n_r = k, n_l = N - k>`. Total atom number is conserved by construction.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::propagate::ChebyshevPropagator;
use crate::tridiag;

/// Coherence magnitudes below this leave the relative phase undefined.
pub const PHASE_COHERENCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    Left,
    Right,
}

impl Detector {
    pub fn label(self) -> char {
        match self {
            Detector::Left => 'L',
            Detector::Right => 'R',
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Detector::Left => Detector::Right,
            Detector::Right => Detector::Left,
        }
    }

    /// Occupation of this detector's well in basis state `k`.
    #[inline]
    pub fn occupation(self, n_atoms: usize, k: usize) -> usize {
        match self {
            Detector::Right => k,
            Detector::Left => n_atoms - k,
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detector::Left => f.write_str("left"),
            Detector::Right => f.write_str("right"),
        }
    }
}

/// Normalized state vector in the fixed-N sector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// Wrap and normalize a vector of `N + 1` amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParams("state needs at least one amplitude".into()));
        }
        let mut state = QuantumState { amps };
        let norm = state.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParams(format!("cannot normalize state of norm {norm}")));
        }
        state.scale(1.0 / norm);
        Ok(state)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// `|n_r = k, n_l = N - k>`.
    pub fn number_state(n_atoms: usize, k: usize) -> Self {
        assert!(k <= n_atoms, "occupation {k} exceeds N = {n_atoms}");
        let mut amps = vec![Complex64::new(0.0, 0.0); n_atoms + 1];
        amps[k] = Complex64::new(1.0, 0.0);
        QuantumState { amps }
    }

    /// `(b_r^+ + b_l^+)^N |0>`, normalized: amplitudes `sqrt(C(N, k) / 2^N)`.
    pub fn binomial(n_atoms: usize) -> Self {
        // log C(N, k) accumulated incrementally to stay finite at large N.
        let n = n_atoms as f64;
        let mut log_c = 0.0;
        let mut amps = Vec::with_capacity(n_atoms + 1);
        for k in 0..=n_atoms {
            if k > 0 {
                log_c += ((n - k as f64 + 1.0) / k as f64).ln();
            }
            amps.push(Complex64::new((0.5 * (log_c - n * std::f64::consts::LN_2)).exp(), 0.0));
        }
        let mut state = QuantumState { amps };
        let norm = state.norm_sqr().sqrt();
        state.scale(1.0 / norm);
        state
    }

    pub fn n_atoms(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        QuantumState { amps }
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub(crate) fn scale(&mut self, s: f64) {
        self.amps.iter_mut().for_each(|c| *c *= s);
    }

    /// Rescale to unit norm. Phases are untouched, so the phase of the
    /// largest amplitude is preserved.
    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::tolerance(f64::NAN, format!("state norm {norm} cannot be restored")));
        }
        self.scale(1.0 / norm);
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm()
    }

    /// Left/right exchange: `k -> N - k`.
    pub fn reflected(&self) -> Self {
        let mut amps = self.amps.clone();
        amps.reverse();
        QuantumState { amps }
    }

    /// `<n_r>`.
    pub fn mean_right(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c.norm_sqr())
            .sum::<f64>()
    }

    /// `<n_r^2>`.
    pub fn mean_right_sq(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, c)| (k * k) as f64 * c.norm_sqr())
            .sum::<f64>()
    }
}

/// `H = -J (b_r^+ b_l + b_l^+ b_r) + U (n_r(n_r-1) + n_l(n_l-1))` in the
/// fixed-N basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub diag: Vec<f64>,
    /// `offdiag[k]` couples `k` and `k + 1`.
    pub offdiag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_range(x, y, 0, self.dim());
    }

    /// `y[lo..hi] = (H x)[lo..hi]`, assuming `x` vanishes outside `lo..hi`.
    #[inline]
    pub(crate) fn apply_range(&self, x: &[Complex64], y: &mut [Complex64], lo: usize, hi: usize) {
        let n = self.dim();
        for k in lo..hi {
            let mut acc = x[k] * self.diag[k];
            if k > 0 {
                acc += x[k - 1] * self.offdiag[k - 1];
            }
            if k + 1 < n {
                acc += x[k + 1] * self.offdiag[k];
            }
            y[k] = acc;
        }
    }

    /// `<psi|H|psi>` for a normalized state.
    pub fn expectation(&self, state: &QuantumState) -> f64 {
        let c = state.amplitudes();
        let mut e = 0.0;
        for k in 0..self.dim() {
            e += self.diag[k] * c[k].norm_sqr();
            if k + 1 < self.dim() {
                e += 2.0 * self.offdiag[k] * (c[k].conj() * c[k + 1]).re;
            }
        }
        e
    }

    /// Interval containing the whole spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        tridiag::gershgorin(&self.diag, &self.offdiag)
    }

    /// Maximum absolute row sum; bounds the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }
}

pub fn build_hamiltonian(params: &ModelParams) -> TridiagonalHamiltonian {
    let n = params.n_atoms;
    let diag = (0..=n)
        .map(|k| {
            // Integer arithmetic keeps the k <-> N - k symmetry exact.
            let pairs = (k * k.saturating_sub(1) + (n - k) * (n - k).saturating_sub(1)) as f64;
            params.u_int * pairs
        })
        .collect();
    let offdiag = (0..n)
        .map(|k| -params.j_tunnel * (((k + 1) * (n - k)) as f64).sqrt())
        .collect();
    TridiagonalHamiltonian { diag, offdiag }
}

/// Lowest-energy eigenstate and its energy. The largest-magnitude amplitude
/// is made real and positive.
pub fn ground_state(params: &ModelParams) -> (QuantumState, f64) {
    let h = build_hamiltonian(params);
    let (energy, vec) = tridiag::lowest_eigenpair(&h.diag, &h.offdiag);
    let state = QuantumState::from_real(&vec).expect("eigenvector has unit norm");
    (state, energy)
}

/// `exp(-i H t) |psi>` with local error at most `tol`, renormalized.
pub fn evolve_unitary(
    state: &QuantumState,
    params: &ModelParams,
    duration: f64,
    tol: f64,
) -> Result<QuantumState> {
    if !(duration >= 0.0) {
        return Err(Error::InvalidParams(format!("duration must be >= 0, got {duration}")));
    }
    let h = build_hamiltonian(params);
    let prop = ChebyshevPropagator::new(h, tol)?;
    let mut out = state.clone();
    prop.propagate(&mut out, duration)?;
    Ok(out)
}

/// Population imbalance `(<n_r> - <n_l>) / N`.
pub fn z_of_state(state: &QuantumState) -> f64 {
    let n = state.n_atoms() as f64;
    let z = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| (2.0 * k as f64 - n) * c.norm_sqr())
        .sum::<f64>()
        / n;
    z.clamp(-1.0, 1.0)
}

/// Second moment `<(n_r - n_l)^2> / N^2` of the imbalance operator.
pub fn z2_of_state(state: &QuantumState) -> f64 {
    let n = state.n_atoms() as f64;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| (2.0 * k as f64 - n).powi(2) * c.norm_sqr())
        .sum::<f64>()
        / (n * n)
}

/// `<b_r b_l^+> = sum_k sqrt(k (N - k + 1)) conj(c_{k-1}) c_k`.
pub fn coherence(state: &QuantumState) -> Complex64 {
    let n = state.n_atoms();
    let c = state.amplitudes();
    (1..=n)
        .map(|k| c[k - 1].conj() * c[k] * ((k * (n - k + 1)) as f64).sqrt())
        .sum()
}

/// Relative phase `arg <b_r b_l^+>` in `[0, 2 pi)`, or `None` when the
/// coherence is too small for the phase to mean anything.
pub fn phi_of_state(state: &QuantumState) -> Option<f64> {
    let coh = coherence(state);
    if coh.norm() < PHASE_COHERENCE_FLOOR {
        return None;
    }
    Some(wrap_angle(coh.arg()))
}

/// Wrap into `[0, 2 pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = phi.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Detection rates `(Gamma <n_r>, Gamma <n_l>)` of the linear measurement model.
pub fn jump_rates(state: &QuantumState, params: &ModelParams) -> (f64, f64) {
    let n = state.n_atoms() as f64;
    let right = state.mean_right();
    (params.gamma_atom * right, params.gamma_atom * (n - right))
}

/// Back-action of a click: `c_k <- sqrt(n_side(k)) c_k`, renormalized.
pub fn apply_jump(state: &QuantumState, detector: Detector) -> Result<QuantumState> {
    apply_diagonal_jump(state, detector, |occ| (occ as f64).sqrt())
}

pub(crate) fn apply_diagonal_jump(
    state: &QuantumState,
    detector: Detector,
    weight: impl Fn(usize) -> f64,
) -> Result<QuantumState> {
    let n = state.n_atoms();
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| c * weight(detector.occupation(n, k)))
        .collect();
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroNormJump { detector });
    }
    Ok(QuantumState::from_raw(amps.into_iter().map(|c| c / norm).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Dense ladder-operator oracle on the two-mode space truncated to at
    /// most `n` quanta per mode, projected onto the `n_r + n_l = n` sector.
    fn brute_force_hamiltonian(n: usize, j: f64, u: f64) -> Vec<Vec<f64>> {
        let m = n + 1;
        let idx = |nr: usize, nl: usize| nr * m + nl;
        let dim = m * m;
        let mut a_r = vec![vec![0.0; dim]; dim];
        let mut a_l = vec![vec![0.0; dim]; dim];
        for nr in 0..m {
            for nl in 0..m {
                if nr > 0 {
                    a_r[idx(nr - 1, nl)][idx(nr, nl)] = (nr as f64).sqrt();
                }
                if nl > 0 {
                    a_l[idx(nr, nl - 1)][idx(nr, nl)] = (nl as f64).sqrt();
                }
            }
        }
        let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
            let mut out = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for k in 0..dim {
                    if a[i][k] != 0.0 {
                        for jj in 0..dim {
                            out[i][jj] += a[i][k] * b[k][jj];
                        }
                    }
                }
            }
            out
        };
        let t = |a: &Vec<Vec<f64>>| {
            let mut out = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for jj in 0..dim {
                    out[jj][i] = a[i][jj];
                }
            }
            out
        };
        let ard = t(&a_r);
        let ald = t(&a_l);
        let hop = mul(&ard, &a_l);
        let hop2 = mul(&ald, &a_r);
        let int_r = mul(&mul(&ard, &ard), &mul(&a_r, &a_r));
        let int_l = mul(&mul(&ald, &ald), &mul(&a_l, &a_l));
        let mut sector = vec![vec![0.0; n + 1]; n + 1];
        for k in 0..=n {
            for kp in 0..=n {
                let (a, b) = (idx(k, n - k), idx(kp, n - kp));
                sector[k][kp] =
                    -j * (hop[a][b] + hop2[a][b]) + u * (int_r[a][b] + int_l[a][b]);
            }
        }
        sector
    }

    #[test]
    fn hamiltonian_matches_ladder_algebra() {
        for &(n, j, u) in &[(2, 1.0, 0.5), (4, 0.0, 1.0), (5, 0.7, -0.3)] {
            let dense = brute_force_hamiltonian(n, j, u);
            let h = build_hamiltonian(&ModelParams { n_atoms: n, j_tunnel: j, u_int: u, gamma_atom: 0.0 });
            for k in 0..=n {
                assert_abs_diff_eq!(h.diag[k], dense[k][k], epsilon = 1e-12);
                if k < n {
                    assert_abs_diff_eq!(h.offdiag[k], dense[k][k + 1], epsilon = 1e-12);
                    assert_abs_diff_eq!(h.offdiag[k], dense[k + 1][k], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let p = |n, j, u| ModelParams { n_atoms: n, j_tunnel: j, u_int: u, gamma_atom: 0.0 };
        let h = build_hamiltonian(&p(2, 1.0, 0.5));
        assert_eq!(h.diag, vec![1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(h.offdiag[0], -2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h.offdiag[1], -2f64.sqrt(), epsilon = 1e-15);

        let h = build_hamiltonian(&p(1, 1.0, 3.7));
        assert_eq!(h.diag, vec![0.0, 0.0]);
        assert_eq!(h.offdiag, vec![-1.0]);

        let h = build_hamiltonian(&p(4, 0.0, 1.0));
        assert_eq!(h.diag, vec![12.0, 6.0, 4.0, 6.0, 12.0]);
        assert!(h.offdiag.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ground_state_noninteracting_is_binomial() {
        let (s, e) = ground_state(&ModelParams::new(2, 1.0, 0.0, 0.0).unwrap());
        assert_abs_diff_eq!(e, -2.0, epsilon = 1e-12);
        let expect = [0.5, 0.5f64.sqrt(), 0.5];
        for (a, b) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, b, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0);
        }

        let (s, e) = ground_state(&ModelParams::new(4, 1.0, 0.0, 0.0).unwrap());
        assert_abs_diff_eq!(e, -4.0, epsilon = 1e-12);
        let expect = [0.25, 0.5, 6f64.sqrt() / 4.0, 0.5, 0.25];
        for (a, b) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn ground_state_matches_dense_eigensolver() {
        let n = 20;
        for chi in [1.0, 100.0, 1000.0] {
            let p = ModelParams::from_ratios(n, 1.0, chi, 0.0).unwrap();
            let dense = brute_force_hamiltonian(n, p.j_tunnel, p.u_int);
            let m = nalgebra::DMatrix::from_fn(n + 1, n + 1, |a, b| dense[a][b]);
            let eig = nalgebra::SymmetricEigen::new(m);
            let i0 = eig.eigenvalues.imin();
            let (s, e) = ground_state(&p);
            assert_abs_diff_eq!(e, eig.eigenvalues[i0], epsilon = 1e-9 * e.abs().max(1.0));
            let v = eig.eigenvectors.column(i0);
            assert_abs_diff_eq!(s.amplitudes()[n / 2].norm_sqr(), v[n / 2] * v[n / 2], epsilon = 1e-10);
        }
    }

    #[test]
    fn ground_state_strong_repulsion_is_half_half() {
        let n = 10;
        let p = ModelParams::from_ratios(n, 1.0, 1e6, 0.0).unwrap();
        let (s, _) = ground_state(&p);
        assert!(s.amplitudes()[n / 2].norm_sqr() > 0.999);
    }

    #[test]
    fn ground_state_residual_small() {
        for &(n, chi) in &[(50, 1.5), (200, -1.5), (1000, 3.0)] {
            let p = ModelParams::from_ratios(n, 1.0, chi, 0.0).unwrap();
            let h = build_hamiltonian(&p);
            let (s, e) = ground_state(&p);
            let mut hs = vec![Complex64::default(); n + 1];
            h.apply(s.amplitudes(), &mut hs);
            let res: f64 = hs
                .iter()
                .zip(s.amplitudes())
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-10 * h.norm_bound(), "N={n}: residual {res}");
            let max = s.amplitudes().iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(max.re > 0.0 && max.im == 0.0);
        }
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_of_state(&QuantumState::number_state(7, 7)), 1.0);
        assert_abs_diff_eq!(z_of_state(&QuantumState::binomial(9)), 0.0, epsilon = 1e-14);
        let s = QuantumState::from_amplitudes(vec![c(0.0), c(0.5f64.sqrt()), c(0.5f64.sqrt())]).unwrap();
        assert_abs_diff_eq!(z_of_state(&s), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn phi_examples() {
        let b = QuantumState::binomial(8);
        assert_abs_diff_eq!(phi_of_state(&b).unwrap(), 0.0, epsilon = 1e-15);

        let alternating: Vec<Complex64> = b
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, k as f64 * std::f64::consts::PI))
            .collect();
        let s = QuantumState::from_amplitudes(alternating).unwrap();
        assert_abs_diff_eq!(phi_of_state(&s).unwrap(), std::f64::consts::PI, epsilon = 1e-12);

        assert_eq!(phi_of_state(&QuantumState::number_state(8, 3)), None);
    }

    #[test]
    fn rates_and_jumps() {
        let p = ModelParams::new(6, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(jump_rates(&QuantumState::number_state(6, 6), &p), (3.0, 0.0));
        let (r, l) = jump_rates(&QuantumState::binomial(6), &p);
        assert_abs_diff_eq!(r, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(l, 1.5, epsilon = 1e-14);

        let b = QuantumState::binomial(2);
        let after = apply_jump(&b, Detector::Right).unwrap();
        let half = 0.5f64.sqrt();
        for (a, e) in after.amplitudes().iter().zip([0.0, half, half]) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(z_of_state(&after), 0.5, epsilon = 1e-15);

        let right = QuantumState::number_state(4, 4);
        assert_eq!(apply_jump(&right, Detector::Right).unwrap(), right);
        assert!(matches!(
            apply_jump(&right, Detector::Left),
            Err(Error::ZeroNormJump { detector: Detector::Left })
        ));
    }

    #[test]
    fn evolve_zero_duration_is_identity() {
        let p = ModelParams::from_ratios(12, 1.0, -1.5, 0.0).unwrap();
        let s = QuantumState::binomial(12);
        assert_eq!(evolve_unitary(&s, &p, 0.0, 1e-12).unwrap(), s);
        assert!(evolve_unitary(&s, &p, -1.0, 1e-12).is_err());
    }

    #[test]
    fn eigenstate_is_stationary() {
        let p = ModelParams::from_ratios(40, 1.0, 1.5, 0.0).unwrap();
        let (g, _) = ground_state(&p);
        let out = evolve_unitary(&g, &p, 3.7, 1e-12).unwrap();
        assert_abs_diff_eq!(g.fidelity(&out), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn symmetric_state_keeps_zero_imbalance() {
        let p = ModelParams::from_ratios(30, 1.0, -1.5, 0.0).unwrap();
        let mut s = QuantumState::binomial(30);
        for _ in 0..10 {
            s = evolve_unitary(&s, &p, 0.9, 1e-12).unwrap();
            assert!(z_of_state(&s).abs() <= 1e-11);
        }
    }

    fn arb_state(max_n: usize) -> impl Strategy<Value = QuantumState> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1).prop_filter_map(
                "nonzero",
                |v| {
                    QuantumState::from_amplitudes(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                        .ok()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn hamiltonian_commutes_with_exchange(n in 1usize..40, j in 0.1f64..3.0, u in -2.0f64..2.0) {
            let h = build_hamiltonian(&ModelParams { n_atoms: n, j_tunnel: j, u_int: u, gamma_atom: 0.0 });
            let mut d = h.diag.clone();
            d.reverse();
            prop_assert_eq!(&d, &h.diag);
            let mut o = h.offdiag.clone();
            o.reverse();
            prop_assert_eq!(&o, &h.offdiag);
        }

        #[test]
        fn rates_sum_to_total(s in arb_state(30), gamma in 0.0f64..5.0) {
            let p = ModelParams::new(s.n_atoms(), 1.0, 0.0, gamma).unwrap();
            let (r, l) = jump_rates(&s, &p);
            prop_assert!((r + l - p.g_total()).abs() <= 1e-12 * (1.0 + p.g_total()));
            prop_assert!(z_of_state(&s).abs() <= 1.0);
        }

        #[test]
        fn right_jump_never_lowers_right_population(s in arb_state(30)) {
            if s.mean_right() > 1e-9 {
                let after = apply_jump(&s, Detector::Right).unwrap();
                prop_assert!(after.mean_right() >= s.mean_right() - 1e-12);
                prop_assert!((after.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn ground_energy_nonincreasing_in_tunneling(
            n in 1usize..60, u in 0.0f64..2.0, j1 in 0.1f64..3.0, dj in 0.0f64..3.0,
        ) {
            let e1 = ground_state(&ModelParams::new(n, j1, u, 0.0).unwrap()).1;
            let e2 = ground_state(&ModelParams::new(n, j1 + dj, u, 0.0).unwrap()).1;
            prop_assert!(e2 <= e1 + 1e-10 * (1.0 + e1.abs()));
        }

        #[test]
        fn evolution_preserves_overlap(n in 2usize..25, chi in -3.0f64..3.0, t in 0.0f64..5.0) {
            let p = ModelParams::from_ratios(n, 1.0, chi, 0.0).unwrap();
            let a = QuantumState::binomial(n);
            let b = QuantumState::number_state(n, n / 3);
            let f0 = a.fidelity(&b);
            let a_t = evolve_unitary(&a, &p, t, 1e-12).unwrap();
            let b_t = evolve_unitary(&b, &p, t, 1e-12).unwrap();
            prop_assert!((a_t.fidelity(&b_t) - f0).abs() <= 1e-11);
            let h = build_hamiltonian(&p);
            prop_assert!((h.expectation(&a_t) - h.expectation(&a)).abs() <= 1e-11 * (1.0 + h.norm_bound()));
        }
    }
}
