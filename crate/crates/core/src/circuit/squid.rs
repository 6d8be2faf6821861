use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Replaces a two-junction SQUID by one effective junction.
///
/// Only the symmetric case has a closed form: it returns `(E_J1, C_j1 + C_j2 + C_t)`
/// and the potential becomes `-2 E_J cos(phi_ext / 2) cos(phi_c)`. Energies in
/// GHz, capacitances in fF.
pub fn squid_reduce(e_j1: f64, e_j2: f64, c_j1: f64, c_j2: f64, c_t: f64) -> Result<(f64, f64)> {
    for (name, v) in [("E_J1", e_j1), ("E_J2", e_j2), ("C_j1", c_j1), ("C_j2", c_j2)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !(c_t >= 0.0) {
        return Err(Error::InvalidArgument(format!("C_t must be non-negative, got {c_t}")));
    }
    let (m1, m2) = capacitive_weights(c_j1, c_j2);
    let asym_e = (e_j1 - e_j2).abs() / e_j1.max(e_j2);
    let asym_c = (c_j1 - c_j2).abs() / c_j1.max(c_j2);
    if asym_e > SYMMETRY_TOL || asym_c > SYMMETRY_TOL {
        return Err(Error::AsymmetricSquid { m1, m2 });
    }
    Ok((e_j1, c_j1 + c_j2 + c_t))
}

/// `m_i = C_ji / (C_j1 + C_j2)`.
pub fn capacitive_weights(c_j1: f64, c_j2: f64) -> (f64, f64) {
    let s = c_j1 + c_j2;
    (c_j1 / s, c_j2 / s)
}
