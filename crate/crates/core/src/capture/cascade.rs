use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coupling::ReceiverCoupling;
use crate::dynamics::{
    evolve_with, CollapseOperator, ComplexControl, ControlFunction, LindbladModel, PositivityCheck,
    Smoothness, SolverOptions, TimeGrid,
};
use crate::error::{Error, Result};
use crate::quantum::{annihilation, number, partial_trace, DensityMatrix, HilbertSpace, Operator};

/// Sign of the unidirectional exchange term
/// `H_c = sign * (i/2) (g d^dag L - g^* L^dag d)` for emitter jump `L`.
///
/// `Cascaded` is what the series product of the emitter and receiver
/// channels gives; `Flipped` is the opposite sign. Only `Cascaded`
/// reproduces perfect single-photon capture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangeSign {
    #[default]
    Cascaded,
    Flipped,
}

impl ExchangeSign {
    fn value(self) -> f64 {
        match self {
            ExchangeSign::Cascaded => -1.0,
            ExchangeSign::Flipped => 1.0,
        }
    }
}

/// `op (x) 1_extra`.
fn extend(op: &Operator, space: &HilbertSpace, extra: usize) -> Result<Operator> {
    let id = DMatrix::<C64>::identity(extra, extra);
    Operator::new(space.clone(), op.matrix().kronecker(&id))
}

/// Adds a linear receiver `d` as the last subsystem and couples it to the
/// emitter's output through the composite jump `L + conj(g(t)) d`.
pub fn cascade_model(
    emitter: &LindbladModel,
    coupling: &ReceiverCoupling,
    receiver_dim: usize,
) -> Result<LindbladModel> {
    cascade_model_with(emitter, coupling.control(), receiver_dim, ExchangeSign::default())
}

/// As [`cascade_model`], with an arbitrary coupling control and sign.
pub fn cascade_model_with(
    emitter: &LindbladModel,
    g: ComplexControl,
    receiver_dim: usize,
    sign: ExchangeSign,
) -> Result<LindbladModel> {
    let [l_e] = emitter.collapse_ops() else {
        return Err(Error::Unsupported(format!(
            "cascading needs exactly one emitter collapse operator, found {}",
            emitter.collapse_ops().len()
        )));
    };
    let Some(l_e) = l_e.as_constant() else {
        return Err(Error::Unsupported(
            "cascading needs a time-independent emitter collapse operator".into(),
        ));
    };
    let mut dims = emitter.space().dims().to_vec();
    dims.push(receiver_dim);
    let space = HilbertSpace::new(dims)?;
    let slot = space.num_subsystems() - 1;
    let d = crate::quantum::embed(&annihilation(receiver_dim)?, &space, slot)?;
    let l = extend(&l_e, &space, receiver_dim)?;

    let mut terms = Vec::new();
    for (op, f) in emitter.hamiltonian_terms() {
        terms.push((extend(op, &space, receiver_dim)?, f.clone()));
    }
    // H_c = (s/2) [Re g * i(X - X^dag) - Im g * (X + X^dag)], X = d^dag L
    let x = &d.adjoint() * &l;
    let xd = x.adjoint();
    let i = C64::new(0.0, 1.0);
    let quad_p = (&x - &xd).scale(i);
    let quad_x = &x + &xd;
    let s = 0.5 * sign.value();
    let (g_re, g_im) = (g.clone(), g.clone());
    terms.push((
        quad_p,
        ControlFunction::new("exchange re", Smoothness::Piecewise, move |t| s * g_re.eval(t).re),
    ));
    terms.push((
        quad_x,
        ControlFunction::new("exchange im", Smoothness::Piecewise, move |t| -s * g_im.eval(t).im),
    ));
    let g_conj = g.clone();
    let jump = CollapseOperator::time_dependent(vec![
        (l, ComplexControl::constant(C64::new(1.0, 0.0))),
        (
            d,
            ComplexControl::new("conj(g)", Smoothness::Piecewise, move |t| g_conj.eval(t).conj()),
        ),
    ])?;
    LindbladModel::new(space, terms, vec![jump])
}

#[derive(Clone, Debug, Serialize)]
pub struct CaptureResult {
    #[serde(serialize_with = "serialize_density")]
    pub rho_d: DensityMatrix,
    pub captured_photons: f64,
    /// `<n>` of every emitter subsystem at the final time.
    pub leftover: Vec<f64>,
    pub end_time: f64,
    pub max_trace_drift: f64,
    pub positivity_warnings: usize,
    pub floor_activations: usize,
    pub cap_activations: usize,
}

/// Writes a density matrix as `{"re": [[..]], "im": [[..]]}` rows.
fn serialize_density<S: serde::Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let m = rho.matrix();
    let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect()
    };
    let mut st = s.serialize_struct("DensityMatrix", 2)?;
    st.serialize_field("re", &rows(|z| z.re))?;
    st.serialize_field("im", &rows(|z| z.im))?;
    st.end()
}

/// Runs a cascaded model whose receiver is the last subsystem.
pub fn capture(model: &LindbladModel, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<CaptureResult> {
    let options = SolverOptions {
        positivity: PositivityCheck::FinalOnly,
        ..Default::default()
    };
    let traj = evolve_with(model, rho0, grid, &options)?;
    let last = traj.final_state();
    let space = model.space();
    let slot = space.num_subsystems() - 1;
    let rho_d = partial_trace(last, slot)?;
    let captured_photons = rho_d.expectation(&number(rho_d.dim())?)?.re;
    let mut leftover = Vec::with_capacity(slot);
    for k in 0..slot {
        let n = crate::quantum::embed(&number(space.dims()[k])?, space, k)?;
        leftover.push(last.expectation(&n)?.re);
    }
    Ok(CaptureResult {
        rho_d,
        captured_photons,
        leftover,
        end_time: grid.end(),
        max_trace_drift: traj.diagnostics.max_trace_drift,
        positivity_warnings: traj.diagnostics.positivity_warnings.len(),
        floor_activations: 0,
        cap_activations: 0,
    })
}

/// Grid for the capture run: the emission samples up to `end`, then `end`.
pub fn capture_grid(emission_grid: &TimeGrid, end: f64) -> Result<TimeGrid> {
    let mut s: Vec<f64> = emission_grid
        .samples()
        .iter()
        .copied()
        .filter(|&t| t < end)
        .collect();
    if s.last().is_none_or(|&t| t < end) {
        s.push(end);
    }
    TimeGrid::new(s)
}
