use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationMatrix;
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};

/// Eigenvalues down to this (times the total) count as rounding noise.
const NEGATIVE_TOL: f64 = 1e-8;

/// Temporal modes of the output field,
/// `G(t_i, t_j) = sum_k n_k v_k(t_i) conj(v_k(t_j))`.
///
/// Modes are orthonormal under the trapezoid inner product and scaled in
/// 1/sqrt(us). Their phase is fixed so the largest sample is real positive.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeDecomposition {
    pub grid: TimeGrid,
    pub weights: Vec<f64>,
    pub modes: Vec<Vec<C64>>,
    pub occupations: Vec<f64>,
    /// Sum of all (clamped) occupations, kept or not.
    pub total: f64,
    /// Most negative raw eigenvalue seen before clamping.
    pub min_eigenvalue: f64,
}

impl ModeDecomposition {
    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Weighted inner product `sum_k w_k conj(v_i) v_j`.
    pub fn inner(&self, i: usize, j: usize) -> C64 {
        weighted_inner(&self.weights, &self.modes[i], &self.modes[j])
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.grid.len();
        let mut g = DMatrix::zeros(n, n);
        for (v, &occ) in self.modes.iter().zip(&self.occupations) {
            for j in 0..n {
                let vj = v[j].conj() * occ;
                for i in 0..n {
                    g[(i, j)] += v[i] * vj;
                }
            }
        }
        g
    }

    /// Count of modes holding more than `threshold` photons.
    pub fn modes_above(&self, threshold: f64) -> usize {
        self.occupations.iter().filter(|&&n| n > threshold).count()
    }
}

pub fn weighted_inner(w: &[f64], a: &[C64], b: &[C64]) -> C64 {
    w.iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| x.conj() * y * *w)
        .sum()
}

pub fn decompose_modes(g: &CorrelationMatrix, max_modes: usize) -> Result<ModeDecomposition> {
    let n = g.len();
    let dev = g.hermiticity_deviation();
    let scale = g.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if dev > super::correlation::HERMITIAN_TOL * scale {
        return Err(Error::DataIntegrity(format!(
            "correlation matrix is not Hermitian (deviation {dev:.3e})"
        )));
    }
    let sw: Vec<f64> = g.weights.iter().map(|w| w.sqrt()).collect();
    let mut gw = DMatrix::from_fn(n, n, |i, j| g.values[(i, j)] * (sw[i] * sw[j]));
    gw = (&gw + gw.adjoint()) * C64::new(0.5, 0.0);

    let eig = SymmetricEigen::try_new(gw, 1e-15, 0)
        .ok_or_else(|| Error::EigenSolver("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = eig.eigenvalues.iter().map(|&e| e.max(0.0)).sum();
    if min_eigenvalue < -NEGATIVE_TOL * total.max(1e-300) && total > 0.0 {
        log::warn!("correlation has a negative eigenvalue {min_eigenvalue:.3e} (total {total:.4})");
    }

    let floor = 1e-14 * total;
    let mut modes = Vec::new();
    let mut occupations = Vec::new();
    for &k in order.iter().take(max_modes) {
        let occ = eig.eigenvalues[k].max(0.0);
        if !(occ > floor) || occ == 0.0 {
            break;
        }
        let col = eig.eigenvectors.column(k);
        let mut v: Vec<C64> = (0..n).map(|i| col[i] / sw[i]).collect();
        let peak = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = peak.conj() / peak.norm();
        for x in &mut v {
            *x *= phase;
        }
        modes.push(v);
        occupations.push(occ);
    }
    Ok(ModeDecomposition {
        grid: g.grid.clone(),
        weights: g.weights.clone(),
        modes,
        occupations,
        total,
        min_eigenvalue,
    })
}

/// `n_1 / n_out`.
pub fn mode_occupation_ratio(d: &ModeDecomposition) -> Result<f64> {
    if !(d.total > 0.0) || d.occupations.is_empty() {
        return Err(Error::UndefinedRatio("no photons were emitted".into()));
    }
    Ok((d.occupations[0] / d.total).min(1.0))
}
