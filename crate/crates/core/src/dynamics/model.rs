use num_complex::Complex64 as C64;

use super::control::{ComplexControl, ControlFunction};
use crate::circuit::EffectiveParams;
use crate::error::{Error, Result};
use crate::quantum::{annihilation, embed, HilbertSpace, Operator};

/// Hermiticity tolerance for Hamiltonian terms.
pub const HERMITIAN_TERM_TOL: f64 = 1e-10;

/// Collapse operator `L(t) = sum_k c_k(t) L_k`.
///
/// A single part with a constant unit coefficient is an ordinary,
/// time-independent jump operator.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    parts: Vec<(Operator, ComplexControl)>,
}

impl CollapseOperator {
    pub fn constant(op: Operator) -> Self {
        Self {
            parts: vec![(op, ComplexControl::constant(C64::new(1.0, 0.0)))],
        }
    }

    pub fn time_dependent(parts: Vec<(Operator, ComplexControl)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("collapse operator without parts".into()));
        }
        let space = parts[0].0.space().clone();
        for (op, _) in &parts {
            op.same_space(&space)?;
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[(Operator, ComplexControl)] {
        &self.parts
    }

    pub fn space(&self) -> &HilbertSpace {
        self.parts[0].0.space()
    }

    /// The operator itself when every coefficient is constant.
    pub fn as_constant(&self) -> Option<Operator> {
        use super::control::Smoothness;
        if self
            .parts
            .iter()
            .all(|(_, c)| c.smoothness() == Smoothness::Constant)
        {
            let mut acc = Operator::zeros(self.space());
            for (op, c) in &self.parts {
                acc = &acc + &op.scale(c.eval(0.0));
            }
            Some(acc)
        } else {
            None
        }
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut acc = Operator::zeros(self.space());
        for (op, c) in &self.parts {
            acc = &acc + &op.scale(c.eval(t));
        }
        acc
    }
}

/// Time-dependent Lindblad generator
/// `d rho/dt = -i[H(t), rho] + sum_L (L rho L^dag - {L^dag L, rho}/2)`
/// with `H(t) = sum_k f_k(t) H_k`.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    space: HilbertSpace,
    hamiltonian: Vec<(Operator, ControlFunction)>,
    collapse: Vec<CollapseOperator>,
}

impl LindbladModel {
    pub fn new(
        space: HilbertSpace,
        hamiltonian: Vec<(Operator, ControlFunction)>,
        collapse: Vec<CollapseOperator>,
    ) -> Result<Self> {
        for (op, _) in &hamiltonian {
            op.same_space(&space)?;
            op.require_hermitian(HERMITIAN_TERM_TOL)?;
        }
        for l in &collapse {
            for (op, _) in l.parts() {
                op.same_space(&space)?;
            }
        }
        Ok(Self {
            space,
            hamiltonian,
            collapse,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian_terms(&self) -> &[(Operator, ControlFunction)] {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[CollapseOperator] {
        &self.collapse
    }

    /// Adds a Hamiltonian term. The operator must be Hermitian.
    pub fn with_term(mut self, op: Operator, control: ControlFunction) -> Result<Self> {
        op.same_space(&self.space)?;
        op.require_hermitian(HERMITIAN_TERM_TOL)?;
        self.hamiltonian.push((op, control));
        Ok(self)
    }

    /// Adds an extra decoherence channel.
    pub fn with_collapse(mut self, l: CollapseOperator) -> Result<Self> {
        for (op, _) in l.parts() {
            op.same_space(&self.space)?;
        }
        self.collapse.push(l);
        Ok(self)
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        let mut acc = Operator::zeros(&self.space);
        for (op, f) in &self.hamiltonian {
            acc = &acc + &op.scale_real(f.eval(t));
        }
        acc
    }
}

fn check_rate(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay rate must be non-negative and finite, got {kappa}"
        )));
    }
    Ok(())
}

/// Single nonlinear resonator `H = omega(t) a^dag a + chi(t) a^dag^2 a^2`
/// decaying through `sqrt(kappa) a`.
pub fn build_toy_model(
    dim: usize,
    omega: ControlFunction,
    chi: ControlFunction,
    kappa: f64,
) -> Result<LindbladModel> {
    check_rate(kappa)?;
    let a = annihilation(dim)?;
    let ad = a.adjoint();
    let n = &ad * &a;
    let kerr = &(&ad * &ad) * &(&a * &a);
    let space = a.space().clone();
    LindbladModel::new(
        space,
        vec![(n, omega), (kerr, chi)],
        vec![CollapseOperator::constant(a.scale_real(kappa.sqrt()))],
    )
}

/// Frequency chirp `omega0 + max(0, 2 chi (n exp(-kappa t) - 1))` that makes a
/// linear resonator sweep the same band a Kerr resonator emits into.
pub fn chirp_profile(omega0: f64, chi: f64, n: f64, kappa: f64) -> ControlFunction {
    ControlFunction::new(
        format!("chirp(omega0={omega0}, chi={chi}, n={n}, kappa={kappa})"),
        super::control::Smoothness::Piecewise,
        move |t| omega0 + (2.0 * chi * (n * (-kappa * t).exp() - 1.0)).max(0.0),
    )
}

/// Dimensions of the two-oscillator emitter (storage a, leakage b).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmitterDims {
    pub storage: usize,
    pub leakage: usize,
}

impl Default for EmitterDims {
    fn default() -> Self {
        Self { storage: 6, leakage: 4 }
    }
}

pub const STORAGE_SLOT: usize = 0;
pub const LEAKAGE_SLOT: usize = 1;

/// Storage/leakage emitter in the rotating frame of the drive. The coupler
/// never enters the simulation space.
pub fn build_effective_model(
    params: &EffectiveParams,
    drive: ControlFunction,
    kappa: f64,
    dims: EmitterDims,
) -> Result<LindbladModel> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "leakage decay rate must be positive, got {kappa}"
        )));
    }
    params.check_finite()?;
    let space = HilbertSpace::new(vec![dims.storage, dims.leakage])?;
    let a = embed(&annihilation(dims.storage)?, &space, STORAGE_SLOT)?;
    let b = embed(&annihilation(dims.leakage)?, &space, LEAKAGE_SLOT)?;
    let (ad, bd) = (a.adjoint(), b.adjoint());
    let na = &ad * &a;
    let nb = &bd * &b;
    let kerr_a = &(&ad * &ad) * &(&a * &a);
    let kerr_b = &(&bd * &bd) * &(&b * &b);
    let cross = &na * &nb;
    // -i (b^dag a - a^dag b)
    let swap = (&(&bd * &a) - &(&ad * &b)).scale(C64::new(0.0, -1.0));

    let f2 = drive.squared();
    let terms = vec![
        (na, f2.scaled(params.stark_scale_a)),
        (nb, f2.scaled(params.stark_scale_b)),
        (kerr_a, ControlFunction::constant(params.chi_a)),
        (kerr_b, ControlFunction::constant(params.chi_b)),
        (cross, ControlFunction::constant(params.chi_ab)),
        (swap, drive.scaled(params.swap_scale)),
    ];
    LindbladModel::new(
        space,
        terms,
        vec![CollapseOperator::constant(b.scale_real(kappa.sqrt()))],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_model_rejects_negative_rate() {
        let r = build_toy_model(
            4,
            ControlFunction::constant(0.0),
            ControlFunction::constant(0.0),
            -1.0,
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn non_hermitian_term_rejected() {
        let a = annihilation(3).unwrap();
        let r = LindbladModel::new(
            a.space().clone(),
            vec![(a, ControlFunction::constant(1.0))],
            vec![],
        );
        assert!(matches!(r, Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn chirp_saturates_at_omega0() {
        let f = chirp_profile(1.0, 2.0, 5.0, 1.0);
        assert!((f.eval(0.0) - (1.0 + 16.0)).abs() < 1e-14);
        assert_eq!(f.eval(10.0), 1.0);
    }

    #[test]
    fn effective_model_terms_are_hermitian() {
        let p = EffectiveParams {
            chi_a: -0.1,
            chi_b: -0.2,
            chi_ab: -0.5,
            swap_scale: 3.0,
            stark_scale_a: -0.4,
            stark_scale_b: -0.7,
            drive_frequency: 100.0,
        };
        let drive = super::super::control::drive_envelope(0.1, 1.0).unwrap();
        let m = build_effective_model(&p, drive, 5.0, EmitterDims::default()).unwrap();
        assert_eq!(m.space().dims(), &[6, 4]);
        assert_eq!(m.hamiltonian_terms().len(), 6);
        assert!(m.hamiltonian_at(2.0).is_hermitian(1e-14));
    }
}
