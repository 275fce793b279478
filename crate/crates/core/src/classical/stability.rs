use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{energy_zphi, ClassicalState, MeanFieldParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Center,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub location: ClassicalState,
    pub classification: Stability,
    /// Lyapunov exponent for a hyperbolic point, small-oscillation angular
    /// frequency for a center.
    pub exponent: f64,
}

/// Linearizing the flow at `(0, phi0)` with `sigma = cos(phi0)` gives
/// `z'' = -4 J sigma (J sigma + chi) z`.
fn classify(p: &MeanFieldParams, sigma: f64) -> (Stability, f64) {
    let j = p.j_tunnel;
    let curvature = 4.0 * j * sigma * (j * sigma + p.chi);
    if curvature < 0.0 {
        (Stability::Hyperbolic, (-curvature).sqrt())
    } else {
        (Stability::Center, curvature.sqrt())
    }
}

/// The two symmetric stationary states `(0, 0)` and `(0, pi)`.
pub fn fixed_points(p: &MeanFieldParams) -> Vec<FixedPointReport> {
    [(0.0, 1.0), (PI, -1.0)]
        .into_iter()
        .map(|(phi, sigma)| {
            let (classification, exponent) = classify(p, sigma);
            FixedPointReport {
                location: ClassicalState { z: 0.0, phi },
                classification,
                exponent,
            }
        })
        .collect()
}

fn hyperbolic_point(p: &MeanFieldParams) -> Option<FixedPointReport> {
    fixed_points(p)
        .into_iter()
        .find(|f| f.classification == Stability::Hyperbolic)
}

/// Energy of the homoclinic level set, if a hyperbolic point exists.
pub fn separatrix_energy(p: &MeanFieldParams) -> Option<f64> {
    hyperbolic_point(p).map(|f| energy_zphi(0.0, f.location.phi, p))
}

/// Point on the separatrix. `phi` is continuous along a lobe and measured
/// around the hyperbolic point, so it may be negative; wrap it before
/// treating it as a [`ClassicalState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixPoint {
    pub z: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separatrix {
    pub energy: f64,
    pub fixed_point: FixedPointReport,
    /// Largest `|z|` reached on the homoclinic orbits.
    pub z_max: f64,
    /// Closed curves, `z >= 0` lobe first. Each starts and ends at the
    /// hyperbolic point.
    pub lobes: Vec<Vec<SeparatrixPoint>>,
}

/// Sample both homoclinic orbits with `points_per_lobe` points each.
///
/// On the level set `H(z, phi) = H_sep` each lobe is a graph over `z`:
/// `cos(phi) = (chi (1 + z^2) - H_sep) / (2 J sqrt(1 - z^2))`, so the upper
/// and lower halves are traced on a cosine-spaced `z` grid that clusters
/// points at the fixed point and at the turning point `z_max`.
pub fn separatrix(p: &MeanFieldParams, points_per_lobe: usize) -> Result<Separatrix> {
    let fp = hyperbolic_point(p).ok_or(Error::NoSeparatrix { chi_over_j: p.chi_over_j() })?;
    if points_per_lobe < 3 {
        return Err(Error::InvalidParams("separatrix needs at least 3 points per lobe".into()));
    }
    let j = p.j_tunnel;
    let phi0 = fp.location.phi;
    let sigma = phi0.cos().round();
    let energy = energy_zphi(0.0, phi0, p);
    // Turning point in s = sqrt(1 - z^2): the nontrivial root of
    // H(z, phi0) = H_sep for a closed lobe, otherwise (|chi| > 2J) the lobe
    // wraps around the cylinder and turns at phi0 + pi.
    let mut s_turn = -1.0 - 2.0 * j * sigma / p.chi;
    if !(0.0..=1.0).contains(&s_turn) {
        s_turn = 1.0 + 2.0 * j * sigma / p.chi;
    }
    let z_max = (1.0 - s_turn * s_turn).max(0.0).sqrt();

    let half = points_per_lobe / 2;
    let grid: Vec<f64> = (0..=half)
        .map(|i| z_max * 0.5 * (1.0 - (PI * i as f64 / half as f64).cos()))
        .collect();
    let offset = |z: f64| {
        let c = (p.chi * (1.0 + z * z) - energy) / (2.0 * j * (1.0 - z * z).sqrt());
        (sigma * c).clamp(-1.0, 1.0).acos()
    };

    let lobes = [1.0, -1.0]
        .into_iter()
        .map(|side| {
            let mut lobe = Vec::with_capacity(2 * half + 1);
            for &z in &grid {
                let d = if z == 0.0 { 0.0 } else { offset(z) };
                lobe.push(SeparatrixPoint { z: side * z, phi: phi0 + d });
            }
            for &z in grid.iter().rev().skip(1) {
                let d = if z == 0.0 { 0.0 } else { offset(z) };
                lobe.push(SeparatrixPoint { z: side * z, phi: phi0 - d });
            }
            lobe
        })
        .collect();
    Ok(Separatrix {
        energy,
        fixed_point: fp,
        z_max,
        lobes,
    })
}

/// Energy surface tabulated on a grid, for contour plots.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
    /// `energy[i][j] = H(z[i], phi[j])`.
    pub energy: Vec<Vec<f64>>,
}

pub fn phase_portrait(p: &MeanFieldParams, z_grid: &[f64], phi_grid: &[f64]) -> Result<PhasePortrait> {
    if let Some(z) = z_grid.iter().find(|z| !(-1.0..=1.0).contains(*z)) {
        return Err(Error::InvalidParams(format!("portrait z value {z} outside [-1, 1]")));
    }
    let energy = z_grid
        .iter()
        .map(|&z| phi_grid.iter().map(|&phi| energy_zphi(z, phi, p)).collect())
        .collect();
    Ok(PhasePortrait {
        z: z_grid.to_vec(),
        phi: phi_grid.to_vec(),
        energy,
    })
}
