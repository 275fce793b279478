//! Chebyshev expansion of `exp(-i H t)` for tridiagonal `H`.
//!
//! With `H = c + a X` and the spectrum of `X` in `[-1, 1]`,
//! `exp(-i H t) = exp(-i c t) sum_k (2 - delta_k0) (-i)^k J_k(a t) T_k(X)`.
//! The series is truncated once the discarded tail `2 sum |J_k|` is below the
//! requested tolerance; `|T_k(X) psi| <= 1` makes that a rigorous bound on
//! the truncation error of a unit vector.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{QuantumState, TridiagonalHamiltonian};

/// Largest `a t` handled in one expansion; longer intervals are split.
const MAX_ARGUMENT: f64 = 400.0;

/// Amplitudes below this fraction of the largest one are dropped from the
/// active window before each expansion.
const SUPPORT_CUTOFF: f64 = 1e-24;

/// Owns its Hamiltonian and scratch space; one propagator per trajectory.
pub struct ChebyshevPropagator {
    h: TridiagonalHamiltonian,
    center: f64,
    half_width: f64,
    tol: f64,
    /// Coefficients of the last `(piece length, piece tolerance)` used.
    cache: RefCell<Option<(f64, f64, Vec<f64>)>>,
    work: RefCell<Workspace>,
}

impl ChebyshevPropagator {
    pub fn new(h: TridiagonalHamiltonian, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
        }
        let (lo, hi) = h.spectral_bounds();
        let center = 0.5 * (lo + hi);
        // Pad slightly so roundoff never pushes the spectrum outside [-1, 1].
        let half_width = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE) * (1.0 + 1e-12) + 1e-300;
        let work = RefCell::new(Workspace::new(h.dim()));
        Ok(ChebyshevPropagator {
            h,
            center,
            half_width,
            tol,
            cache: RefCell::new(None),
            work,
        })
    }

    pub fn hamiltonian(&self) -> &TridiagonalHamiltonian {
        &self.h
    }

    /// Propagate `state` forward by `duration` in place and renormalize.
    pub fn propagate(&self, state: &mut QuantumState, duration: f64) -> Result<()> {
        if duration == 0.0 {
            return Ok(());
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParams(format!("duration must be >= 0, got {duration}")));
        }
        let pieces = (self.half_width * duration / MAX_ARGUMENT).ceil().max(1.0) as usize;
        if state.amplitudes().len() != self.h.dim() {
            return Err(Error::InvalidParams("state and Hamiltonian dimensions differ".into()));
        }
        let dt = duration / pieces as f64;
        let piece_tol = self.tol / pieces as f64;
        let mut cache = self.cache.borrow_mut();
        let fresh = !matches!(&*cache, Some((d, t, _)) if *d == dt && *t == piece_tol);
        if fresh {
            let coeffs = chebyshev_coefficients(self.half_width * dt, piece_tol)
                .ok_or_else(|| Error::tolerance(duration, "Chebyshev coefficients did not converge"))?;
            *cache = Some((dt, piece_tol, coeffs));
        }
        let coeffs = &cache.as_ref().expect("filled above").2;
        let mut work = self.work.borrow_mut();
        for _ in 0..pieces {
            self.expand(state.amplitudes_mut(), coeffs, dt, &mut work);
        }
        state
            .renormalize()
            .map_err(|_| Error::tolerance(duration, "state norm lost during propagation"))?;
        Ok(())
    }

    fn expand(&self, psi: &mut [Complex64], coeffs: &[f64], dt: f64, w: &mut Workspace) {
        let n = psi.len();
        let max = psi.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max).sqrt();
        let cut = max * SUPPORT_CUTOFF;
        let first = psi.iter().position(|c| c.norm() > cut).unwrap_or(0);
        let last = psi.iter().rposition(|c| c.norm() > cut).unwrap_or(n - 1);
        psi[..first].fill(Complex64::default());
        psi[last + 1..].fill(Complex64::default());
        let lo = first.saturating_sub(coeffs.len());
        let hi = (last + 1 + coeffs.len()).min(n);

        let inv_a = 1.0 / self.half_width;
        let shift = self.center;
        let h = &self.h;
        // X x = (H x - c x) / a, restricted to the active window.
        let apply_x = |x: &[Complex64], y: &mut [Complex64]| {
            h.apply_range(x, y, lo, hi);
            for k in lo..hi {
                y[k] = (y[k] - x[k] * shift) * inv_a;
            }
        };

        let Workspace { prev, cur, next, acc } = w;
        for k in lo..hi {
            prev[k] = psi[k];
            acc[k] = psi[k] * coeffs[0];
        }
        if coeffs.len() > 1 {
            apply_x(prev, cur);
            let c1 = Complex64::new(0.0, -coeffs[1]);
            for k in lo..hi {
                acc[k] += cur[k] * c1;
            }
        }
        // (-i)^m cycles through 1, -i, -1, i.
        let phases = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (m, &cm) in coeffs.iter().enumerate().skip(2) {
            apply_x(cur, next);
            let coef = phases[m % 4] * cm;
            for k in lo..hi {
                let v = next[k] * 2.0 - prev[k];
                next[k] = v;
                acc[k] += v * coef;
            }
            std::mem::swap(prev, cur);
            std::mem::swap(cur, next);
        }
        let global = Complex64::from_polar(1.0, -shift * dt);
        for k in lo..hi {
            psi[k] = acc[k] * global;
        }
        for buf in [&mut *prev, &mut *cur, &mut *next, &mut *acc] {
            buf[lo..hi].iter_mut().for_each(|c| *c = Complex64::default());
        }
    }
}

struct Workspace {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::default(); n];
        Workspace { prev: z.clone(), cur: z.clone(), next: z.clone(), acc: z }
    }
}

/// `(2 - delta_k0) J_k(x)` for `k = 0..=K`, with `K` the first order at which
/// the remaining tail is below `tol`.
pub fn chebyshev_coefficients(x: f64, tol: f64) -> Option<Vec<f64>> {
    let kmax = (x + 15.0 * x.cbrt() + 40.0).ceil() as usize;
    let j = bessel_j_sequence(x, kmax);
    // Tail sums from the top; keep terms until the tail drops under tol.
    let mut tail = 0.0;
    let mut cut = j.len();
    for k in (0..j.len()).rev() {
        let t = tail + 2.0 * j[k].abs();
        if t > 0.25 * tol {
            cut = k + 1;
            break;
        }
        tail = t;
    }
    if cut == j.len() && j.len() > 1 {
        // Tail never became small enough inside the computed range.
        return None;
    }
    let mut coeffs: Vec<f64> = j[..cut.max(1)].to_vec();
    for c in coeffs.iter_mut().skip(1) {
        *c *= 2.0;
    }
    Some(coeffs)
}

/// `J_0(x) ..= J_kmax(x)` by Miller's downward recurrence normalized with
/// `J_0 + 2 sum_{m >= 1} J_{2m} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = 2 * ((kmax + (40.0 * kmax as f64).sqrt() as usize + 20) / 2);
    let mut jp = 0.0; // J_{k+1}
    let mut jc = 1e-300; // J_k
    let mut norm_sum = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * jc - jp;
        jp = jc;
        jc = jm;
        // jc is now J_{k-1}
        if k - 1 <= kmax {
            out[k - 1] = jc;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm_sum += 2.0 * jc;
        }
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            norm_sum *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    norm_sum += jc; // J_0
    out.iter_mut().for_each(|v| *v /= norm_sum);
    out
}
