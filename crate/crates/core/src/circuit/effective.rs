use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dressed::DressedModes;
use super::netlist::CircuitNetlist;
use crate::error::{Error, Result};
use crate::units::ghz_to_rad_per_us;

/// Coefficients of the rotating-frame storage/leakage Hamiltonian, all in rad/us.
///
/// The drive amplitude `F` is a reduced flux and dimensionless, so
/// `swap_scale * F` is the swap rate and `stark_scale_* * F^2` the Stark shifts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub chi_a: f64,
    pub chi_b: f64,
    pub chi_ab: f64,
    pub swap_scale: f64,
    pub stark_scale_a: f64,
    pub stark_scale_b: f64,
    pub drive_frequency: f64,
}

impl EffectiveParams {
    pub fn check_finite(&self) -> Result<()> {
        let all = [
            self.chi_a,
            self.chi_b,
            self.chi_ab,
            self.swap_scale,
            self.stark_scale_a,
            self.stark_scale_b,
            self.drive_frequency,
        ];
        if all.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite effective parameters {self:?}")))
        }
    }

    /// Multiplies all three Kerr coefficients by `s`.
    pub fn with_kerr_scaled(&self, s: f64) -> Self {
        Self {
            chi_a: self.chi_a * s,
            chi_b: self.chi_b * s,
            chi_ab: self.chi_ab * s,
            ..self.clone()
        }
    }
}

/// Effective coefficients from the dressed modes. Participations are in flux
/// quanta, so every `lambda / phi0` below is just `lambda`.
pub fn effective_params(modes: &DressedModes, n: &CircuitNetlist) -> EffectiveParams {
    let ej = ghz_to_rad_per_us(n.e_j_ghz);
    let (s, c) = ((n.phi_dc / 2.0).sin(), (n.phi_dc / 2.0).cos());
    let (la, lb, bar) = (modes.lambda_a, modes.lambda_b, modes.lambda_bar);
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let stark = (bar * pi4 - pi2) * ej * c / 4.0;
    EffectiveParams {
        chi_a: -2.0 * pi4 * ej * c * la.powi(4),
        chi_b: -2.0 * pi4 * ej * c * lb.powi(4),
        chi_ab: -8.0 * pi4 * ej * c * la * la * lb * lb,
        swap_scale: (pi2 - bar * pi4) * ej * s * la * lb,
        stark_scale_a: stark * la * la,
        stark_scale_b: stark * lb * lb,
        drive_frequency: modes.omega_b - modes.omega_a,
    }
}

/// Effective storage decay `4 g^2 / kappa` with the leakage mode eliminated.
pub fn purcell_rate(g_swap: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Purcell rate needs kappa > 0, got {kappa}"
        )));
    }
    Ok(4.0 * g_swap * g_swap / kappa)
}

/// Detuning `(n - 1)(2 chi_a - chi_ab)` of the `n`-photon swap transition.
pub fn resonance_detuning(n: usize, chi_a: f64, chi_ab: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("photon number must be at least 1".into()));
    }
    Ok((n as f64 - 1.0) * (2.0 * chi_a - chi_ab))
}
