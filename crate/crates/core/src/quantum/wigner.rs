//! Wigner quasi-probability distribution of a single oscillator.
//!
//! Quadratures follow `a = (x + i p) / sqrt(2)`, so the vacuum is
//! `exp(-x^2 - p^2) / pi`. The value at each phase-space point is the
//! displaced-parity expectation expanded in the Fock basis; the basis
//! functions `W_mn` are generated by the Laguerre three-term recursion.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// `W(x_i, p_j)` on the outer product of the two grids; rows follow `x`.
pub fn wigner(rho: &DensityMatrix, x_grid: &[f64], p_grid: &[f64]) -> Result<DMatrix<f64>> {
    if rho.space().num_subsystems() != 1 {
        return Err(Error::MultiSubsystem(format!(
            "the Wigner function needs a single oscillator but the state lives on {:?}; \
             take a partial trace first",
            rho.space().dims()
        )));
    }
    let m = rho.matrix();
    let dim = rho.dim();
    let mut out = DMatrix::zeros(x_grid.len(), p_grid.len());
    let mut basis = vec![C64::new(0.0, 0.0); dim];
    for (i, &x) in x_grid.iter().enumerate() {
        for (j, &p) in p_grid.iter().enumerate() {
            out[(i, j)] = point(m, dim, C64::new(x, p) / 2f64.sqrt(), &mut basis);
        }
    }
    Ok(out)
}

fn point(rho: &DMatrix<C64>, dim: usize, a: C64, w: &mut [C64]) -> f64 {
    w[0] = C64::new((-2.0 * a.norm_sqr()).exp() / PI, 0.0);
    let mut total = rho[(0, 0)].re * w[0].re;
    for n in 1..dim {
        w[n] = 2.0 * a * w[n - 1] / (n as f64).sqrt();
        total += 2.0 * (rho[(0, n)] * w[n]).re;
    }
    for m in 1..dim {
        let sm = (m as f64).sqrt();
        let mut prev = w[m];
        w[m] = (2.0 * a.conj() * prev - sm * w[m - 1]) / sm;
        total += (rho[(m, m)] * w[m]).re;
        for n in m + 1..dim {
            let next = (2.0 * a * w[n - 1] - sm * prev) / (n as f64).sqrt();
            prev = w[n];
            w[n] = next;
            total += 2.0 * (rho[(m, n)] * w[n]).re;
        }
    }
    total
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Symmetric quadrature half-width `sqrt(2 dim) + 3` covering a truncated
/// oscillator's support.
pub fn covering_half_width(dim: usize) -> f64 {
    (2.0 * dim as f64).sqrt() + 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::{cat_state, fock_state};
    use crate::quantum::{operator::C64, space::HilbertSpace};

    fn trapezoid_2d(w: &DMatrix<f64>, dx: f64, dp: f64) -> f64 {
        let (nx, np) = w.shape();
        let mut acc = 0.0;
        for i in 0..nx {
            for j in 0..np {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let wp = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                acc += wx * wp * w[(i, j)];
            }
        }
        acc * dx * dp
    }

    #[test]
    fn vacuum_and_one_photon_at_origin() {
        let vac = fock_state(6, 0).unwrap().to_density();
        let w = wigner(&vac, &[0.0], &[0.0]).unwrap();
        assert!((w[(0, 0)] - 1.0 / PI).abs() < 1e-12);
        let one = fock_state(6, 1).unwrap().to_density();
        let w = wigner(&one, &[0.0], &[0.0]).unwrap();
        assert!((w[(0, 0)] + 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn vacuum_is_gaussian() {
        let vac = fock_state(3, 0).unwrap().to_density();
        let w = wigner(&vac, &[0.7], &[-1.2]).unwrap();
        assert!((w[(0, 0)] - (-(0.49 + 1.44f64)).exp() / PI).abs() < 1e-14);
    }

    #[test]
    fn four_cat_integrates_to_one() {
        let rho = cat_state(20, C64::new(2f64.sqrt(), 0.0), 4).unwrap().to_density();
        let h = covering_half_width(20);
        let grid = linspace(-h, h, 241);
        let w = wigner(&rho, &grid, &grid).unwrap();
        let step = grid[1] - grid[0];
        assert!((trapezoid_2d(&w, step, step) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coherent_peak_location() {
        // |alpha = 1.5> peaks at x = sqrt(2) * 1.5.
        let rho = crate::quantum::state::coherent_state(30, C64::new(1.5, 0.0))
            .unwrap()
            .to_density();
        let x0 = 2f64.sqrt() * 1.5;
        let w = wigner(&rho, &[x0], &[0.0]).unwrap();
        assert!((w[(0, 0)] - 1.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn rejects_composite_state() {
        let a = fock_state(2, 0).unwrap();
        let joint = a.tensor(&a).unwrap().to_density();
        let err = wigner(&joint, &[0.0], &[0.0]).unwrap_err();
        assert!(err.to_string().contains("partial trace"));
        let _ = HilbertSpace::single(2).unwrap();
    }
}
