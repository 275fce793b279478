//! Bose-Einstein condensate in a symmetric double well, simulated three ways.
//!
//! * [`fock`]: the exact two-mode quantum model on the fixed-N Fock basis
//!   `|n_r = k, n_l = N - k>`, its ground state, unitary propagation and the
//!   population-imbalance / relative-phase observables.
//! * [`classical`]: the mean-field (c-number) flow in the `(z, phi)` chart and
//!   the complex-amplitude chart, fixed-point stability, the homoclinic
//!   separatrix and phase portraits.
//! * [`trajectory`]: quantum trajectories conditioned on continuous photon
//!   counting of the well populations, with a first-order stepper and an exact
//!   event-driven sampler.
//! * [`master`]: dense Lindblad propagation for small N, used as the oracle the
//!   trajectory averages are checked against.
//! * [`runner`]: quench protocol, experiment configuration and CSV export used
//!   by the `dwtraj` binary.
//!
//! Units: `hbar = 1`, and times are measured in units of `1/J`.

pub mod classical;
pub mod error;
pub mod fock;
pub mod master;
pub mod ode;
pub mod params;
pub mod propagate;
pub mod runner;
pub mod stats;
pub mod trajectory;
pub mod tridiag;

pub use error::{Error, Result};
pub use fock::{Detector, QuantumState, TridiagonalHamiltonian};
pub use params::ModelParams;
