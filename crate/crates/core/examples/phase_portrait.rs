//! Fixed points, separatrix and energy surface of the mean-field model.
//!
//! `cargo run --example phase_portrait -- [chi/J] [out_dir]`

use std::f64::consts::PI;
use std::path::PathBuf;

use dwtraj::classical::{fixed_points, phase_portrait, separatrix, MeanFieldParams};
use dwtraj::runner::table::{write_portrait, write_separatrix};

fn main() -> dwtraj::Result<()> {
    let mut args = std::env::args().skip(1);
    let chi: f64 = args.next().map_or(-1.5, |s| s.parse().expect("chi/J must be a number"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/portrait".into()));
    let p = MeanFieldParams::new(1.0, chi)?;

    for fp in fixed_points(&p) {
        println!(
            "fixed point (z, phi) = ({}, {:.4}): {:?}, rate {:.6}",
            fp.location.z, fp.location.phi, fp.classification, fp.exponent
        );
    }

    let sep = match separatrix(&p, 801) {
        Ok(sep) => {
            println!("separatrix energy {:.6}, max |z| {:.9}", sep.energy, sep.z_max);
            Some(sep)
        }
        Err(e) => {
            println!("{e}");
            None
        }
    };

    let z: Vec<f64> = (0..201).map(|i| -1.0 + 0.01 * i as f64).collect();
    let phi: Vec<f64> = (0..201).map(|i| -PI + PI * i as f64 / 100.0).collect();
    let portrait = phase_portrait(&p, &z, &phi)?;
    std::fs::create_dir_all(&out).map_err(|e| dwtraj::Error::Io { path: out.clone(), source: e })?;
    write_portrait(&out.join("portrait.csv"), &portrait)?;
    write_separatrix(&out.join("separatrix.csv"), sep.as_ref())?;
    println!("wrote {}", out.display());
    Ok(())
}
