use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::matrices::{dynamical_matrix, kinetic_matrix, spd_sqrt, NODE_A, NODE_B, NODE_C};
use super::netlist::CircuitNetlist;
use crate::error::{Error, Result};
use crate::units::participation_in_flux_quanta;

/// Normal modes of the linearized circuit.
///
/// Participations `lambda_*` are the coupler-node flux carried by each mode,
/// in units of the flux quantum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedModes {
    pub omega_a: f64,
    pub omega_c: f64,
    pub omega_b: f64,
    pub lambda_a: f64,
    pub lambda_c: f64,
    pub lambda_b: f64,
    pub lambda_bar: f64,
    /// Largest `|M zeta - omega^2 zeta|` over the three modes, (rad/us)^2.
    pub eigen_residual: f64,
    /// Eigenvectors `zeta` in node order (a, c, b), one per labeled mode.
    pub zeta_a: [f64; 3],
    pub zeta_c: [f64; 3],
    pub zeta_b: [f64; 3],
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Assigns eigenvectors (columns, frequency ascending) to bare nodes.
/// Returns `perm` with `perm[node] = column`.
fn label_modes(vectors: &Matrix3<f64>) -> [usize; 3] {
    let mut best = PERMUTATIONS[0];
    let mut best_score = f64::NEG_INFINITY;
    // Permutations are visited so that, on a tie, lower-frequency columns go
    // to lower node slots.
    for p in PERMUTATIONS {
        let score: f64 = (0..3).map(|node| vectors[(node, p[node])].powi(2)).sum();
        if score > best_score + 1e-12 {
            best_score = score;
            best = p;
        }
    }
    best
}

pub fn dressed_modes(n: &CircuitNetlist) -> Result<DressedModes> {
    let m = dynamical_matrix(n)?;
    let sk = spd_sqrt(&kinetic_matrix(n)?)?;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenSolver("symmetric eigen-decomposition did not converge".into()))?;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = Vector3::from_fn(|k, _| eig.eigenvalues[order[k]]);
    let vectors = Matrix3::from_fn(|r, k| eig.eigenvectors[(r, order[k])]);
    if values.iter().any(|&w2| !(w2 > 0.0)) {
        return Err(Error::EigenSolver(format!(
            "non-positive squared frequency in {values:?}"
        )));
    }

    let perm = label_modes(&vectors);
    let mut residual: f64 = 0.0;
    let mut out = [(0.0, 0.0, [0.0; 3]); 3];
    for node in [NODE_A, NODE_C, NODE_B] {
        let col = perm[node];
        let mut zeta: Vector3<f64> = vectors.column(col).into();
        if zeta[node] < 0.0 {
            zeta = -zeta;
        }
        let w2 = values[col];
        residual = residual.max((m * zeta - zeta * w2).amax());
        let omega = w2.sqrt();
        let weight = (sk * zeta)[NODE_C];
        let lambda = participation_in_flux_quanta(omega, weight);
        out[node] = (omega, lambda, [zeta[0], zeta[1], zeta[2]]);
    }
    let [(omega_a, lambda_a, zeta_a), (omega_c, lambda_c, zeta_c), (omega_b, lambda_b, zeta_b)] =
        out;
    Ok(DressedModes {
        omega_a,
        omega_c,
        omega_b,
        lambda_a,
        lambda_c,
        lambda_b,
        lambda_bar: lambda_a * lambda_a + lambda_b * lambda_b + lambda_c * lambda_c,
        eigen_residual: residual,
        zeta_a,
        zeta_c,
        zeta_b,
    })
}
