use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{
    evolve_with, LindbladModel, Propagator, SolverOptions, TimeGrid, Tolerances, Trajectory,
};
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Operator};

/// Hermiticity tolerance for correlation matrices.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Two-time first-order correlation `G(t_i, t_j) = <O^dag(t_j) O(t_i)>` on a grid.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub grid: TimeGrid,
    pub values: DMatrix<C64>,
    pub weights: Vec<f64>,
}

impl CorrelationMatrix {
    /// Wraps a precomputed matrix, checking shape and Hermiticity.
    pub fn new(grid: TimeGrid, values: DMatrix<C64>) -> Result<Self> {
        let n = grid.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} correlation on a {n}-point grid",
                values.nrows(),
                values.ncols()
            )));
        }
        let g = Self {
            weights: grid.trapezoid_weights(),
            grid,
            values,
        };
        let dev = g.hermiticity_deviation();
        if dev > HERMITIAN_TOL * g.scale() {
            return Err(Error::DataIntegrity(format!(
                "correlation matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        crate::quantum::operator::max_abs_diff(&self.values, &self.values.adjoint())
    }

    fn scale(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(1.0, f64::max)
    }

    /// `G(t_k, t_k)`, the output photon flux.
    pub fn flux(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.values[(k, k)].re).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CorrelationOptions {
    pub solver: SolverOptions,
    /// Operator whose final expectation is the residual source occupation.
    pub residual_op: Option<Operator>,
    pub residual_threshold: f64,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            residual_op: None,
            residual_threshold: 1e-3,
        }
    }
}

/// Correlation plus the state trajectory it was built from.
#[derive(Clone, Debug)]
pub struct Emission {
    pub correlation: CorrelationMatrix,
    pub trajectory: Trajectory,
    /// `<residual_op>` at the last grid point, when requested.
    pub residual: Option<f64>,
}

pub fn first_order_correlation(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    output_op: &Operator,
) -> Result<CorrelationMatrix> {
    Ok(emission(model, rho0, grid, output_op, &CorrelationOptions::default())?.correlation)
}

/// Evolves `rho0` and builds the regression correlation of `output_op`.
pub fn emission(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    output_op: &Operator,
    options: &CorrelationOptions,
) -> Result<Emission> {
    output_op.same_space(model.space())?;
    let trajectory = evolve_with(model, rho0, grid, &options.solver)?;
    let correlation = correlation_from_trajectory(model, &trajectory, output_op, options.solver.tolerances)?;
    let residual = match &options.residual_op {
        Some(op) => {
            let r = trajectory.final_state().expectation(op)?.re;
            if r > options.residual_threshold {
                log::warn!(
                    "grid ends at t = {:.3} us with {r:.3e} photons left in the source \
                     (threshold {:.1e}); extend the grid",
                    grid.end(),
                    options.residual_threshold
                );
            }
            Some(r)
        }
        None => None,
    };
    Ok(Emission {
        correlation,
        trajectory,
        residual,
    })
}

/// One forward propagation of `O rho(t_i)` per row; rows run in parallel.
pub fn correlation_from_trajectory(
    model: &LindbladModel,
    trajectory: &Trajectory,
    output_op: &Operator,
    tolerances: Tolerances,
) -> Result<CorrelationMatrix> {
    output_op.same_space(model.space())?;
    let grid = &trajectory.grid;
    let times = grid.samples();
    let n = times.len();
    let prop = Propagator::new(model, tolerances);
    let o = output_op.matrix();
    let o_conj: Vec<C64> = o.iter().map(|v| v.conj()).collect();

    let rows: Vec<Result<Vec<C64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = o * trajectory.states[i].matrix();
            let mut row = Vec::with_capacity(n - i);
            prop.sweep(x.as_slice(), &times[i..], |_, y| {
                // Tr[O^dag X] = sum conj(O) .* X
                row.push(o_conj.iter().zip(y).map(|(a, b)| a * b).sum());
                Ok(())
            })
            .map_err(|e| {
                let t_j = match &e {
                    Error::Integration { time, .. } => *time,
                    _ => times[i],
                };
                Error::Regression {
                    t_i: times[i],
                    t_j,
                    source: Box::new(e),
                }
            })?;
            Ok(row)
        })
        .collect();

    let mut values = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for (k, v) in row.into_iter().enumerate() {
            let j = i + k;
            if j == i {
                values[(i, i)] = C64::new(v.re, 0.0);
            } else {
                values[(i, j)] = v;
                values[(j, i)] = v.conj();
            }
        }
    }
    CorrelationMatrix::new(grid.clone(), values)
}

/// Total emitted photons `sum_k w_k G(t_k, t_k)`.
pub fn emitted_photons(g: &CorrelationMatrix) -> f64 {
    g.flux()
        .iter()
        .zip(&g.weights)
        .map(|(f, w)| f * w)
        .sum::<f64>()
        .max(0.0)
}
