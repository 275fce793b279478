//! Noise launches the mean-field instability of the symmetric state after
//! the interaction is made attractive. The early growth of `|z|` follows the
//! linearized rate; later the orbit hugs one homoclinic lobe.

use dwtraj::classical::{
    fixed_points, integrate_classical, perturb, separatrix, ClassicalState, MeanFieldParams,
    DEFAULT_NOISE_AMPLITUDE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dwtraj::Result<()> {
    let p = MeanFieldParams::new(1.0, -1.5)?;
    let rate = fixed_points(&p)[0].exponent;
    let sep = separatrix(&p, 201)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = perturb(ClassicalState::new(0.0, 0.0)?, DEFAULT_NOISE_AMPLITUDE, &mut rng);
    let run = integrate_classical(start, &p, 40.0, 4001, 1e-10)?;

    // Slope of ln|z| while the motion is still linear.
    let pts: Vec<(f64, f64)> = run
        .times
        .iter()
        .zip(&run.states)
        .take_while(|(_, s)| s.z.abs() < 1e-3)
        .filter(|(_, s)| s.z.abs() > 1e-5)
        .map(|(t, s)| (*t, s.z.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let slope = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum::<f64>()
        / pts.iter().map(|(t, _)| (t - mt).powi(2)).sum::<f64>();

    let zmax = run.states.iter().fold(0.0f64, |m, s| m.max(s.z.abs()));
    let sign_changes = run.states.windows(2).filter(|w| w[0].z * w[1].z < 0.0).count();
    println!("start          z = {:.3e}, phi = {:.3e}", start.z, start.phi);
    println!("growth rate    {slope:.6} (linearized {rate:.6})");
    println!("max |z|        {zmax:.6} (separatrix {:.6})", sep.z_max);
    println!("sign changes   {sign_changes}");
    println!("energy drift   {:.2e}", run.max_energy_drift);
    Ok(())
}
