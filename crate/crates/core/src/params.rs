use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the two-mode model.
///
/// `j_tunnel` sets the unit of frequency; `u_int` is the on-site interaction
/// `U` of `U (n_r(n_r-1) + n_l(n_l-1))` and may have either sign; `gamma_atom`
/// is the per-atom photon detection rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    pub j_tunnel: f64,
    pub u_int: f64,
    pub gamma_atom: f64,
}

impl ModelParams {
    pub fn new(n_atoms: usize, j_tunnel: f64, u_int: f64, gamma_atom: f64) -> Result<Self> {
        let params = ModelParams {
            n_atoms,
            j_tunnel,
            u_int,
            gamma_atom,
        };
        params.validate()?;
        Ok(params)
    }

    /// Build parameters from the dimensionless knobs `chi/J = N U / J` and
    /// `N Gamma / J`. This is the only place where `U = chi / N` and
    /// `Gamma = G / N` are formed.
    pub fn from_ratios(
        n_atoms: usize,
        j_tunnel: f64,
        chi_over_j: f64,
        n_gamma_over_j: f64,
    ) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
        }
        let n = n_atoms as f64;
        Self::new(
            n_atoms,
            j_tunnel,
            chi_over_j * j_tunnel / n,
            n_gamma_over_j * j_tunnel / n,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
        }
        if !(self.j_tunnel > 0.0) || !self.j_tunnel.is_finite() {
            return Err(Error::InvalidParams(format!(
                "j_tunnel must be positive and finite, got {}",
                self.j_tunnel
            )));
        }
        if !self.u_int.is_finite() {
            return Err(Error::InvalidParams("u_int must be finite".into()));
        }
        if !(self.gamma_atom >= 0.0) || !self.gamma_atom.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma_atom must be nonnegative and finite, got {}",
                self.gamma_atom
            )));
        }
        Ok(())
    }

    /// `chi = N U`.
    pub fn chi(&self) -> f64 {
        self.n_atoms as f64 * self.u_int
    }

    /// `G = N Gamma`, the total photon count rate of the linear model.
    pub fn g_total(&self) -> f64 {
        self.n_atoms as f64 * self.gamma_atom
    }

    pub fn with_u(self, u_int: f64) -> Self {
        ModelParams { u_int, ..self }
    }

    pub fn with_gamma(self, gamma_atom: f64) -> Self {
        ModelParams { gamma_atom, ..self }
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_knobs() {
        let p = ModelParams::new(4, 1.0, 0.25, 0.5).unwrap();
        assert_eq!(p.chi(), 1.0);
        assert_eq!(p.g_total(), 2.0);
    }

    #[test]
    fn ratios_round_trip() {
        let p = ModelParams::from_ratios(10_000, 1.0, -1.5, 100.0).unwrap();
        assert!((p.chi() + 1.5).abs() < 1e-12);
        assert!((p.g_total() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelParams::new(0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(2, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(2, 1.0, 0.0, -1.0).is_err());
        assert!(ModelParams::new(2, 1.0, f64::NAN, 0.0).is_err());
    }
}
