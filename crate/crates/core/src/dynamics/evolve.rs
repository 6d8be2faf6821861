use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::generator::{Generator, Workspace};
use super::integrator::{Dopri5, StepStats, Tolerances};
use super::model::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Operator};

/// Eigenvalues below this are reported as positivity violations.
pub const POSITIVITY_WARNING: f64 = -1e-7;

/// Strictly increasing sample times (us), endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(
                "a time grid needs at least two samples".into(),
            ));
        }
        if samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid sample".into()));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "grid samples must be strictly increasing".into(),
            ));
        }
        Ok(Self { samples })
    }

    pub fn uniform(t0: f64, t1: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t1 > t0) {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs t1 > t0 and >= 2 points (got [{t0}, {t1}], {points})"
            )));
        }
        let step = (t1 - t0) / (points - 1) as f64;
        let mut s: Vec<f64> = (0..points).map(|k| t0 + step * k as f64).collect();
        s[points - 1] = t1;
        Self::new(s)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0]
    }

    pub fn end(&self) -> f64 {
        *self.samples.last().unwrap()
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let s = &self.samples;
        let n = s.len();
        let mut w = vec![0.0; n];
        for k in 0..n - 1 {
            let h = s[k + 1] - s[k];
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
        w
    }

    /// Index `k` with `s[k] <= t < s[k+1]`, clamped to the last interval.
    pub fn locate(&self, t: f64) -> usize {
        let s = &self.samples;
        match s.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(s.len() - 2),
            Err(0) => 0,
            Err(k) => (k - 1).min(s.len() - 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityCheck {
    EverySample,
    FinalOnly,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tolerances: Tolerances,
    pub positivity: PositivityCheck,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            positivity: PositivityCheck::EverySample,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    /// Smallest eigenvalue over the checked samples.
    pub min_eigenvalue: Option<f64>,
    /// `(t, eigenvalue)` for samples below the warning threshold.
    pub positivity_warnings: Vec<(f64, f64)>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    /// `<O>(t)` at every sample.
    pub fn expectation(&self, op: &Operator) -> Result<Vec<C64>> {
        self.states.iter().map(|r| r.expectation(op)).collect()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().unwrap()
    }
}

/// Reusable propagation engine for one model.
pub struct Propagator {
    generator: Generator,
    tolerances: Tolerances,
}

impl Propagator {
    pub fn new(model: &LindbladModel, tolerances: Tolerances) -> Self {
        Self {
            generator: Generator::new(model),
            tolerances,
        }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// Propagates `x` (column-major, `dim x dim`) from `times[0]` through all
    /// later `times`, calling `visit(k, state)` at each sample, including k = 0.
    pub fn sweep<V>(&self, x0: &[C64], times: &[f64], mut visit: V) -> Result<StepStats>
    where
        V: FnMut(usize, &[C64]) -> Result<()>,
    {
        let d = self.dim();
        if x0.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for generator of dimension {d}",
                x0.len()
            )));
        }
        let mut y = x0.to_vec();
        let mut ws = Workspace::default();
        let gen = &self.generator;
        let mut rhs = |t: f64, x: &[C64], out: &mut [C64]| gen.apply(t, x, out, &mut ws);
        let mut solver = Dopri5::new(d * d, self.tolerances);
        let Some(&t_start) = times.first() else {
            return Ok(solver.stats());
        };
        let mut t = t_start;
        visit(0, &y)?;
        for (k, &target) in times.iter().enumerate().skip(1) {
            solver.advance(&mut rhs, &mut t, &mut y, target)?;
            visit(k, &y)?;
        }
        Ok(solver.stats())
    }

    /// Applies `L(t_to, t_from)` to an arbitrary matrix.
    pub fn propagate(&self, x: &DMatrix<C64>, t_from: f64, t_to: f64) -> Result<DMatrix<C64>> {
        if t_to < t_from {
            return Err(Error::InvalidArgument(format!(
                "propagation must run forward (t_from = {t_from}, t_to = {t_to})"
            )));
        }
        let d = self.dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for generator of dimension {d}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        if t_to == t_from {
            return Ok(out);
        }
        self.sweep(x.as_slice(), &[t_from, t_to], |k, y| {
            if k == 1 {
                out.as_mut_slice().copy_from_slice(y);
            }
            Ok(())
        })?;
        Ok(out)
    }
}

pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
    evolve_with(model, rho0, grid, &SolverOptions::default())
}

pub fn evolve_with(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    options: &SolverOptions,
) -> Result<Trajectory> {
    if rho0.space() != model.space() {
        return Err(Error::DimensionMismatch(format!(
            "initial state on {:?} for a model on {:?}",
            rho0.space().dims(),
            model.space().dims()
        )));
    }
    let prop = Propagator::new(model, options.tolerances);
    let d = prop.dim();
    let space = model.space().clone();
    let mut states = Vec::with_capacity(grid.len());
    let stats = prop.sweep(rho0.matrix().as_slice(), grid.samples(), |_, y| {
        let m = DMatrix::from_column_slice(d, d, y);
        states.push(DensityMatrix::from_matrix_unchecked(space.clone(), m)?);
        Ok(())
    })?;
    let diagnostics = diagnose(grid, &states, options.positivity, stats);
    Ok(Trajectory {
        grid: grid.clone(),
        states,
        diagnostics,
    })
}

fn diagnose(
    grid: &TimeGrid,
    states: &[DensityMatrix],
    positivity: PositivityCheck,
    stats: StepStats,
) -> TrajectoryDiagnostics {
    let mut diag = TrajectoryDiagnostics {
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
        rhs_evals: stats.rhs_evals,
        ..Default::default()
    };
    for rho in states {
        let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        let herm = crate::quantum::operator::max_abs_diff(rho.matrix(), &rho.matrix().adjoint());
        diag.max_hermiticity = diag.max_hermiticity.max(herm);
    }
    let checked: Vec<usize> = match positivity {
        PositivityCheck::EverySample => (0..states.len()).collect(),
        PositivityCheck::FinalOnly => vec![states.len() - 1],
        PositivityCheck::Off => vec![],
    };
    for k in checked {
        let e = states[k].min_eigenvalue();
        diag.min_eigenvalue = Some(diag.min_eigenvalue.map_or(e, |m: f64| m.min(e)));
        if e < POSITIVITY_WARNING {
            log::warn!("negative eigenvalue {e:.3e} at t = {:.4}", grid.samples()[k]);
            diag.positivity_warnings.push((grid.samples()[k], e));
        }
    }
    diag
}

/// Propagates an arbitrary matrix with the model's generator.
pub fn propagate_matrix(
    model: &LindbladModel,
    x: &DMatrix<C64>,
    t_from: f64,
    t_to: f64,
) -> Result<DMatrix<C64>> {
    Propagator::new(model, Tolerances::default()).propagate(x, t_from, t_to)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::uniform(1.0, 0.0, 5).is_err());
        let g = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let w = g.trapezoid_weights();
        assert_eq!(w, vec![0.25, 0.5, 0.5, 0.5, 0.25]);
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(0.7), 1);
        assert_eq!(g.locate(2.0), 3);
        assert_eq!(g.locate(5.0), 3);
    }

    use crate::dynamics::control::ControlFunction;
    use crate::dynamics::model::{build_effective_model, build_toy_model, EmitterDims};
    use crate::quantum::{annihilation, coherent_state, embed, fock_state, number, Ket};
    use nalgebra::DVector;
    use crate::quantum::operator::max_abs_diff;

    fn toy(dim: usize, omega: f64, chi: f64, kappa: f64) -> LindbladModel {
        build_toy_model(
            dim,
            ControlFunction::constant(omega),
            ControlFunction::constant(chi),
            kappa,
        )
        .unwrap()
    }

    #[test]
    fn single_photon_decay() {
        let kappa = 1.3;
        let m = toy(3, 0.0, 0.0, kappa);
        let grid = TimeGrid::uniform(0.0, 4.0, 41).unwrap();
        let tr = evolve(&m, &fock_state(3, 1).unwrap().to_density(), &grid).unwrap();
        let n = number(3).unwrap();
        for (t, v) in grid.samples().iter().zip(tr.expectation(&n).unwrap()) {
            assert!((v.re - (-kappa * t).exp()).abs() < 1e-6);
        }
        assert!(tr.diagnostics.max_trace_drift < 1e-8);
        assert!(tr.diagnostics.positivity_warnings.is_empty());
    }

    #[test]
    fn kerr_phases_match_analytic_state() {
        let (dim, chi) = (12, 0.8);
        let psi0 = coherent_state(dim, C64::new(1.1, 0.3)).unwrap();
        let m = toy(dim, 0.0, chi, 0.0);
        let grid = TimeGrid::uniform(0.0, 3.0, 7).unwrap();
        let tr = evolve(&m, &psi0.to_density(), &grid).unwrap();
        for (t, rho) in grid.samples().iter().zip(&tr.states) {
            let amps = DVector::from_fn(dim, |n, _| {
                let nn = n as f64;
                psi0.amplitudes()[n] * C64::from_polar(1.0, -chi * nn * (nn - 1.0) * t)
            });
            let exact = Ket::new(psi0.space().clone(), amps).unwrap();
            let f = crate::quantum::fidelity_pure(rho, &exact).unwrap();
            assert!(f >= 1.0 - 1e-8, "t = {t}: {f}");
        }
    }

    #[test]
    fn kerr_conserves_photon_number() {
        let dim = 8;
        let m = toy(dim, 0.4, 2.0 * std::f64::consts::PI * 0.47, 0.0);
        let rho = coherent_state(dim, C64::new(1.2, 0.0)).unwrap().to_density();
        let grid = TimeGrid::uniform(0.0, 5.0, 26).unwrap();
        let tr = evolve(&m, &rho, &grid).unwrap();
        let n0 = rho.expectation(&number(dim).unwrap()).unwrap().re;
        for v in tr.expectation(&number(dim).unwrap()).unwrap() {
            assert!((v.re - n0).abs() < 1e-10);
        }
    }

    #[test]
    fn nonlinear_emission_follows_rate_equation() {
        // Kerr commutes with n, so kappa * int <n> dt = 5 (1 - e^{-6}) over 6/kappa.
        let kappa = 1.0;
        let chi = 2.0 * std::f64::consts::PI * 0.47;
        let m = toy(7, 0.0, chi, kappa);
        let grid = TimeGrid::uniform(0.0, 6.0 / kappa, 601).unwrap();
        let tr = evolve(&m, &fock_state(7, 5).unwrap().to_density(), &grid).unwrap();
        let n = tr.expectation(&number(7).unwrap()).unwrap();
        let w = grid.trapezoid_weights();
        let emitted: f64 = n.iter().zip(&w).map(|(v, w)| kappa * v.re * w).sum();
        assert!((emitted - 5.0 * (1.0 - (-6.0f64).exp())).abs() < 1e-3, "{emitted}");
    }

    #[test]
    fn linear_two_mode_first_moments() {
        // With all Kerr terms zero, <a> and <b> obey a closed 2x2 linear ODE.
        let p = crate::circuit::EffectiveParams {
            chi_a: 0.0,
            chi_b: 0.0,
            chi_ab: 0.0,
            swap_scale: 2.0,
            stark_scale_a: 0.3,
            stark_scale_b: -0.5,
            drive_frequency: 0.0,
        };
        let (delta, t0, kappa) = (0.8, 0.7, 1.5);
        let drive = crate::dynamics::control::drive_envelope(delta, t0).unwrap();
        let dims = EmitterDims { storage: 16, leakage: 10 };
        let m = build_effective_model(&p, drive.clone(), kappa, dims).unwrap();
        let space = m.space().clone();
        // Truncation is far enough out that <a> is exact to 1e-9.
        let psi = coherent_state(16, C64::new(0.9, 0.2))
            .unwrap()
            .tensor(&fock_state(10, 0).unwrap())
            .unwrap();
        let grid = TimeGrid::uniform(0.0, 3.0, 31).unwrap();
        let tr = evolve(&m, &psi.to_density(), &grid).unwrap();
        let a = embed(&annihilation(16).unwrap(), &space, 0).unwrap();
        let b = embed(&annihilation(10).unwrap(), &space, 1).unwrap();

        // d<a>/dt = -i S_a <a> + g <b>, d<b>/dt = -i S_b <b> - g <a> - kappa/2 <b>
        let i = C64::new(0.0, 1.0);
        let mut f = |t: f64, y: &[C64], out: &mut [C64]| {
            let fv = drive.eval(t);
            let g = p.swap_scale * fv;
            let (sa, sb) = (p.stark_scale_a * fv * fv, p.stark_scale_b * fv * fv);
            out[0] = -i * sa * y[0] + g * y[1];
            out[1] = -i * sb * y[1] - g * y[0] - 0.5 * kappa * y[1];
        };
        let tol = Tolerances { rtol: 1e-12, atol: 1e-14 };
        let mut solver = super::super::integrator::Dopri5::new(2, tol);
        let mut y = vec![C64::new(0.9, 0.2), C64::new(0.0, 0.0)];
        let mut t = 0.0;
        for (k, &tk) in grid.samples().iter().enumerate() {
            solver.advance(&mut f, &mut t, &mut y, tk).unwrap();
            let ea = tr.states[k].expectation(&a).unwrap();
            let eb = tr.states[k].expectation(&b).unwrap();
            assert!((ea - y[0]).norm() < 1e-6, "t = {tk}: {ea} vs {}", y[0]);
            assert!((eb - y[1]).norm() < 1e-6, "t = {tk}: {eb} vs {}", y[1]);
        }
    }

    #[test]
    fn propagation_is_linear_and_consistent() {
        let m = toy(4, 0.3, 0.5, 0.9);
        let x = DMatrix::from_fn(4, 4, |r, c| C64::new((r + 2 * c) as f64 * 0.1, r as f64 - 0.5 * c as f64));
        let y = DMatrix::from_fn(4, 4, |r, c| C64::new(0.2 * c as f64, (r * c) as f64 * 0.05));
        let (al, be) = (C64::new(0.7, -0.2), C64::new(-1.1, 0.4));
        let lhs = propagate_matrix(&m, &(&x * al + &y * be), 0.2, 1.7).unwrap();
        let rhs = propagate_matrix(&m, &x, 0.2, 1.7).unwrap() * al
            + propagate_matrix(&m, &y, 0.2, 1.7).unwrap() * be;
        assert!(max_abs_diff(&lhs, &rhs) < 1e-10);

        let zero = DMatrix::zeros(4, 4);
        assert_eq!(propagate_matrix(&m, &zero, 0.0, 2.0).unwrap(), zero);

        let rho = fock_state(4, 2).unwrap().to_density();
        let grid = TimeGrid::new(vec![0.0, 1.5]).unwrap();
        let tr = evolve(&m, &rho, &grid).unwrap();
        let p = propagate_matrix(&m, rho.matrix(), 0.0, 1.5).unwrap();
        assert!(max_abs_diff(&p, tr.final_state().matrix()) < 1e-10);
        assert!(propagate_matrix(&m, &zero, 1.0, 0.5).is_err());
    }

    #[test]
    fn evolution_is_deterministic() {
        let m = toy(6, 0.1, 1.7, 1.0);
        let rho = fock_state(6, 4).unwrap().to_density();
        let grid = TimeGrid::uniform(0.0, 3.0, 17).unwrap();
        let a = evolve(&m, &rho, &grid).unwrap();
        let b = evolve(&m, &rho, &grid).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x.matrix(), y.matrix());
        }
    }

    #[test]
    fn rejects_state_on_wrong_space() {
        let m = toy(4, 0.0, 0.0, 1.0);
        let rho = fock_state(5, 0).unwrap().to_density();
        let grid = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        assert!(evolve(&m, &rho, &grid).is_err());
    }
}
