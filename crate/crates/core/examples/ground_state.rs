//! The repulsive ground state interpolates between the binomial
//! (non-interacting) state and the half-half number state.

use dwtraj::fock::{ground_state, z_of_state};
use dwtraj::{ModelParams, QuantumState};

fn main() -> dwtraj::Result<()> {
    let n = 20;
    let binomial = QuantumState::binomial(n);
    println!("{:>8} {:>12} {:>14} {:>14}", "NU/J", "energy", "|<N/2|psi>|^2", "binomial fid.");
    for chi in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        let p = ModelParams::from_ratios(n, 1.0, chi, 0.0)?;
        let (psi, e) = ground_state(&p);
        assert!(z_of_state(&psi).abs() < 1e-12);
        println!(
            "{chi:>8} {e:>12.5} {:>14.6} {:>14.6}",
            psi.amplitudes()[n / 2].norm_sqr(),
            psi.fidelity(&binomial)
        );
    }
    Ok(())
}
