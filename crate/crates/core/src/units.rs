//! Unit conversions.
//!
//! Everything inside the simulator runs in angular frequency, rad/us, and
//! time in us. User-facing frequencies are ordinary frequencies in MHz.
//! Circuit elements come in fF, nH and GHz (junction energy `E_J / h`).
//! All conversions between these systems live here.

use std::f64::consts::PI;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum h / 2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

pub const FEMTOFARAD: f64 = 1e-15;
pub const NANOHENRY: f64 = 1e-9;

/// `1 / (fF nH)` expressed in (rad/us)^2.
pub const INV_FF_NH_IN_RAD2_PER_US2: f64 = 1.0 / (FEMTOFARAD * NANOHENRY) * 1e-12;

/// Ordinary frequency in MHz to angular frequency in rad/us.
#[inline]
pub fn mhz_to_rad_per_us(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz
}

#[inline]
pub fn rad_per_us_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Energy given as `E / h` in GHz to angular frequency in rad/us.
#[inline]
pub fn ghz_to_rad_per_us(e_ghz: f64) -> f64 {
    2.0 * PI * 1e3 * e_ghz
}

/// Energy given as `E / h` in GHz to joules.
#[inline]
pub fn ghz_to_joule(e_ghz: f64) -> f64 {
    PLANCK * e_ghz * 1e9
}

/// Inverse inductance in 1/nH equivalent to the quadratic junction potential
/// `E (2 pi / phi0)^2 phi^2 / 2` with `E` in GHz, i.e. `4 pi^2 E / phi0^2`.
#[inline]
pub fn junction_inverse_inductance_per_nh(e_ghz: f64) -> f64 {
    4.0 * PI * PI * ghz_to_joule(e_ghz) / (FLUX_QUANTUM * FLUX_QUANTUM) * NANOHENRY
}

/// Flux participation of a normal mode in units of the flux quantum.
///
/// `omega` is the mode frequency in rad/us and `weight_inv_sqrt_ff` the
/// coupler component of `sqrt(C^-1) zeta` in units of `fF^-1/2`.
#[inline]
pub fn participation_in_flux_quanta(omega: f64, weight_inv_sqrt_ff: f64) -> f64 {
    let omega_si = omega * 1e6;
    (HBAR / omega_si).sqrt() * weight_inv_sqrt_ff / FEMTOFARAD.sqrt() / FLUX_QUANTUM
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lc_frequency_audit() {
        // 1 nH with 1 pF rings at 1/sqrt(LC) = 3.1623e10 rad/s.
        let (l, c) = (1.0, 1000.0);
        let omega = (INV_FF_NH_IN_RAD2_PER_US2 / (l * c)).sqrt();
        let si = 1.0 / (NANOHENRY * 1e-12_f64).sqrt() * 1e-6;
        assert!((omega - si).abs() / si < 1e-12);
        assert!((omega - 31_622.776_601_683_79).abs() < 1e-6);
    }

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn mhz_round_trip() {
        let f = 0.47;
        assert!((rad_per_us_to_mhz(mhz_to_rad_per_us(f)) - f).abs() < 1e-15);
        assert!((mhz_to_rad_per_us(1.0) - 2.0 * PI).abs() < 1e-15);
        assert!((ghz_to_rad_per_us(1.0) - mhz_to_rad_per_us(1000.0)).abs() < 1e-9);
    }

    #[test]
    fn transmon_plasma_frequency_audit() {
        // Junction inverse inductance with C: omega^2 = 8 E_J E_C / hbar^2 with
        // E_C = e^2 / 2C.
        let (ej, c_ff) = (10.0, 80.0);
        let inv_l = junction_inverse_inductance_per_nh(ej);
        let omega = (INV_FF_NH_IN_RAD2_PER_US2 * inv_l / c_ff).sqrt();
        let ec = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * c_ff * FEMTOFARAD);
        let reference = (8.0 * ghz_to_joule(ej) * ec).sqrt() / HBAR * 1e-6;
        assert!((omega - reference).abs() / reference < 1e-12);
    }
}
