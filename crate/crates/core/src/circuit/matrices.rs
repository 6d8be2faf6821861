//! Linearized circuit matrices in node order (a, c, b).

use nalgebra::{Matrix3, SymmetricEigen};

use super::netlist::CircuitNetlist;
use crate::error::{Error, Result};
use crate::units::{junction_inverse_inductance_per_nh, INV_FF_NH_IN_RAD2_PER_US2};

pub const NODE_A: usize = 0;
pub const NODE_C: usize = 1;
pub const NODE_B: usize = 2;

/// Inverse capacitance matrix to first order in the coupling capacitances, 1/fF.
pub fn kinetic_matrix(n: &CircuitNetlist) -> Result<Matrix3<f64>> {
    n.validate()?;
    let (ca, cc, cb) = n.loaded_capacitances();
    let k = Matrix3::new(
        1.0 / ca,
        n.c_ac / (ca * cc),
        0.0,
        n.c_ac / (ca * cc),
        1.0 / cc,
        n.c_bc / (cb * cc),
        0.0,
        n.c_bc / (cb * cc),
        1.0 / cb,
    );
    if k.cholesky().is_none() {
        return Err(Error::InvalidArgument(
            "inverse capacitance matrix is not positive definite".into(),
        ));
    }
    Ok(k)
}

/// Diagonal inverse inductances, 1/nH. The coupler entry is the SQUID's
/// linearized junction, `8 pi^2 E_J cos(phi_dc/2) / phi0^2`.
pub fn potential_matrix(n: &CircuitNetlist) -> Result<Matrix3<f64>> {
    n.validate()?;
    let cos_half = (n.phi_dc / 2.0).cos();
    if cos_half <= 1e-12 {
        return Err(Error::UnsupportedBias { cos_half });
    }
    let coupler = 2.0 * cos_half * junction_inverse_inductance_per_nh(n.e_j_ghz);
    Ok(Matrix3::from_diagonal(&nalgebra::Vector3::new(
        1.0 / n.l_a,
        coupler,
        1.0 / n.l_b,
    )))
}

/// Square root of a symmetric positive-definite matrix.
pub fn spd_sqrt(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let eig = SymmetricEigen::new(*m);
    if eig.eigenvalues.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::EigenSolver("matrix is not positive definite".into()));
    }
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// `sqrt(K) V sqrt(K)` in (rad/us)^2; its eigenvalues are the squared mode
/// frequencies.
pub fn dynamical_matrix(n: &CircuitNetlist) -> Result<Matrix3<f64>> {
    let sk = spd_sqrt(&kinetic_matrix(n)?)?;
    let v = potential_matrix(n)?;
    let m = sk * v * sk * INV_FF_NH_IN_RAD2_PER_US2;
    Ok((m + m.transpose()) * 0.5)
}
