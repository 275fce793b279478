//! Dense Lindblad propagation on the fixed-N sector.
//!
//! `d rho/dt = -i [H, rho] + sum_i (2 L_i rho L_i^+ - L_i^+ L_i rho - rho L_i^+ L_i)`
//! with the same jump operators as the trajectory sampler. Both channels are
//! diagonal in the Fock basis with weights `l_i(k)`, so the dissipator acts
//! element-wise: `rho_ab -> -sum_i (l_i(a) - l_i(b))^2 rho_ab`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, wrap_angle, QuantumState, TridiagonalHamiltonian, PHASE_COHERENCE_FLOOR};
use crate::ode::{Dopri5, Tolerances};
use crate::params::ModelParams;
use crate::trajectory::{sample_grid, MeasurementModel};

/// Largest atom number the dense oracle accepts.
pub const MAX_MASTER_ATOMS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn pure(state: &QuantumState) -> Self {
        let c = state.amplitudes();
        let d = c.len();
        DensityMatrix { rho: DMatrix::from_fn(d, d, |a, b| c[a] * c[b].conj()) }
    }

    /// Wrap a matrix; checks shape, Hermiticity and unit trace.
    pub fn from_matrix(rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() < 2 {
            return Err(Error::InvalidParams("density matrix must be square with N >= 1".into()));
        }
        let m = DensityMatrix { rho };
        if m.hermiticity_error() > 1e-12 || (m.trace() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams("density matrix must be Hermitian with unit trace".into()));
        }
        Ok(m)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn n_atoms(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|c| c.re).sum()
    }

    /// Largest `|rho - rho^+|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.rho.nrows();
        let mut e: f64 = 0.0;
        for a in 0..d {
            for b in a..d {
                e = e.max((self.rho[(a, b)] - self.rho[(b, a)].conj()).norm());
            }
        }
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.clone().symmetric_eigen().eigenvalues.min()
    }

    pub fn z(&self) -> f64 {
        let n = self.n_atoms() as f64;
        self.populations().map(|(k, p)| (2.0 * k as f64 - n) / n * p).sum()
    }

    pub fn z2(&self) -> f64 {
        let n = self.n_atoms() as f64;
        self.populations()
            .map(|(k, p)| {
                let z = (2.0 * k as f64 - n) / n;
                z * z * p
            })
            .sum()
    }

    fn populations(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rho.diagonal().iter().map(|c| c.re).enumerate().collect::<Vec<_>>().into_iter()
    }

    /// `arg tr(rho b_r b_l^+)` in `[0, 2 pi)`; `None` without coherence.
    pub fn phi(&self) -> Option<f64> {
        let n = self.n_atoms();
        let coh: Complex64 = (1..=n)
            .map(|k| self.rho[(k, k - 1)] * ((k * (n - k + 1)) as f64).sqrt())
            .sum();
        (coh.norm() >= PHASE_COHERENCE_FLOOR).then(|| wrap_angle(coh.arg()))
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Conjugate by the left/right exchange `k -> N - k`.
    pub fn reflected(&self) -> Self {
        let d = self.rho.nrows();
        DensityMatrix { rho: DMatrix::from_fn(d, d, |a, b| self.rho[(d - 1 - a, d - 1 - b)]) }
    }

    fn hermitize(&mut self) {
        let adj = self.rho.adjoint();
        self.rho = (&self.rho + adj) * Complex64::new(0.5, 0.0);
    }
}

/// Precomputed pieces of the generator.
struct Generator {
    h: TridiagonalHamiltonian,
    /// `sum_i (l_i(a) - l_i(b))^2`, row-major.
    decay: Vec<f64>,
    d: usize,
}

impl Generator {
    fn new(params: &ModelParams, model: &MeasurementModel) -> Self {
        let n = params.n_atoms;
        let d = n + 1;
        let lr: Vec<f64> = (0..d).map(|k| model.jump_weight(params, k)).collect();
        let ll: Vec<f64> = (0..d).map(|k| model.jump_weight(params, n - k)).collect();
        let mut decay = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                decay[a * d + b] = (lr[a] - lr[b]).powi(2) + (ll[a] - ll[b]).powi(2);
            }
        }
        Generator { h: build_hamiltonian(params), decay, d }
    }

    /// Row-major `rho` to row-major derivative.
    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        let (diag, off) = (&self.h.diag, &self.h.offdiag);
        for a in 0..d {
            for b in 0..d {
                let i = a * d + b;
                let mut comm = rho[i] * (diag[a] - diag[b]);
                if a > 0 {
                    comm += rho[i - d] * off[a - 1];
                }
                if a + 1 < d {
                    comm += rho[i + d] * off[a];
                }
                if b > 0 {
                    comm -= rho[i - 1] * off[b - 1];
                }
                if b + 1 < d {
                    comm -= rho[i + 1] * off[b];
                }
                out[i] = Complex64::new(comm.im, -comm.re) - rho[i] * self.decay[i];
            }
        }
    }
}

fn to_row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    m.transpose().as_slice().to_vec()
}

fn from_row_major(v: &[Complex64], d: usize) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(d, d, v)
}

/// `d rho / dt` at `rho`.
pub fn lindblad_rhs(rho: &DensityMatrix, params: &ModelParams, model: &MeasurementModel) -> Result<DMatrix<Complex64>> {
    check_dims(rho, params)?;
    let g = Generator::new(params, model);
    let v = to_row_major(&rho.rho);
    let mut out = vec![Complex64::default(); v.len()];
    g.apply(&v, &mut out);
    Ok(from_row_major(&out, g.d))
}

fn check_dims(rho: &DensityMatrix, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.n_atoms > MAX_MASTER_ATOMS {
        return Err(Error::TooLarge { n_atoms: params.n_atoms, limit: MAX_MASTER_ATOMS });
    }
    if rho.n_atoms() != params.n_atoms {
        return Err(Error::InvalidParams(format!(
            "density matrix has N = {} but parameters have N = {}",
            rho.n_atoms(),
            params.n_atoms
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MasterSample {
    pub t: f64,
    pub z: f64,
    pub z2: f64,
    pub phi: Option<f64>,
    pub purity: f64,
}

#[derive(Debug, Clone)]
pub struct MasterRun {
    pub samples: Vec<MasterSample>,
    pub final_rho: DensityMatrix,
}

/// Propagate `rho0` over `[0, t_max]` and sample observables on a uniform grid.
pub fn propagate_master(
    rho0: &DensityMatrix,
    params: &ModelParams,
    model: &MeasurementModel,
    t_max: f64,
    sample_count: usize,
    tol: f64,
) -> Result<MasterRun> {
    propagate_master_with(rho0, params, model, t_max, sample_count, tol, |_, _| {})
}

/// Like [`propagate_master`], also handing every sampled `rho` to `observe`.
pub fn propagate_master_with(
    rho0: &DensityMatrix,
    params: &ModelParams,
    model: &MeasurementModel,
    t_max: f64,
    sample_count: usize,
    tol: f64,
    mut observe: impl FnMut(f64, &DensityMatrix),
) -> Result<MasterRun> {
    check_dims(rho0, params)?;
    model.validate()?;
    if !(t_max > 0.0) || !t_max.is_finite() || sample_count < 2 {
        return Err(Error::Config("need t_max > 0 and at least two samples".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {tol}")));
    }
    let g = Generator::new(params, model);
    let d = g.d;
    let mut f = |_t: f64, y: &Vec<Complex64>, out: &mut Vec<Complex64>| g.apply(y, out);
    let rate = g.h.norm_bound() + g.decay.iter().cloned().fold(0.0, f64::max);
    let mut solver = Dopri5::new(Tolerances::both(tol), (0.1 / rate.max(1e-3)).min(t_max));
    // Drift tolerated per accepted step before it is retried with a smaller h.
    let drift_tol = 1e-11;

    let mut rho = rho0.clone();
    let mut y = to_row_major(&rho.rho);
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(sample_count);
    for target in sample_grid(t_max, sample_count) {
        while t < target {
            let saved = y.clone();
            let mut retries = 0;
            let h = loop {
                let h = solver.step(&mut f, t, &mut y, target)?;
                let trial = DensityMatrix { rho: from_row_major(&y, d) };
                if (trial.trace() - 1.0).abs() <= drift_tol && trial.hermiticity_error() <= drift_tol {
                    break h;
                }
                retries += 1;
                if retries > 20 {
                    return Err(Error::tolerance(t, "trace or Hermiticity drift"));
                }
                y.clone_from(&saved);
                solver.h = 0.25 * h;
            };
            rho.rho = from_row_major(&y, d);
            rho.hermitize();
            y = to_row_major(&rho.rho);
            t = if target - (t + h) <= 1e-14 * target.max(1.0) { target } else { t + h };
        }
        observe(target, &rho);
        samples.push(MasterSample {
            t: target,
            z: rho.z(),
            z2: rho.z2(),
            phi: rho.phi(),
            purity: rho.purity(),
        });
    }
    Ok(MasterRun { samples, final_rho: rho })
}
