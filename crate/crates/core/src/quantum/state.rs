use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::operator::{max_abs_diff, Operator, C64};
use super::space::HilbertSpace;
use crate::error::{Error, Result};

/// Tail mass above which truncating a coherent or cat state logs a warning.
pub const TAIL_MASS_WARNING: f64 = 1e-8;

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    space: HilbertSpace,
    amplitudes: DVector<C64>,
}

impl Ket {
    /// Normalizes `amplitudes` onto `space`.
    pub fn new(space: HilbertSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn apply(&self, op: &Operator) -> Result<DVector<C64>> {
        op.same_space(&self.space)?;
        Ok(op.matrix() * &self.amplitudes)
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        Ok(self.amplitudes.dotc(&self.apply(op)?))
    }

    /// Tensor product `self (x) other`.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let mut dims = self.space.dims().to_vec();
        dims.extend_from_slice(other.space.dims());
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ket::new(HilbertSpace::new(dims)?, amps)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

pub fn fock_state(dim: usize, n: usize) -> Result<Ket> {
    if n >= dim {
        return Err(Error::OutOfRange(format!(
            "Fock state |{n}> does not fit in dimension {dim}"
        )));
    }
    let mut v = DVector::zeros(dim);
    v[n] = C64::new(1.0, 0.0);
    Ket::new(HilbertSpace::single(dim)?, v)
}

/// Unnormalized series `alpha^n / sqrt(n!)` for n < dim.
fn coherent_series(dim: usize, alpha: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new(1.0, 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Probability mass of an untruncated coherent state above the cutoff.
pub fn coherent_tail_mass(dim: usize, alpha: C64) -> f64 {
    let x = alpha.norm_sqr();
    let kept: f64 = coherent_series(dim, alpha).iter().map(|c| c.norm_sqr()).sum();
    (1.0 - (-x).exp() * kept).max(0.0)
}

/// Truncated coherent state, renormalized after truncation.
pub fn coherent_state(dim: usize, alpha: C64) -> Result<Ket> {
    let tail = coherent_tail_mass(dim, alpha);
    if tail > TAIL_MASS_WARNING {
        log::warn!("coherent state |alpha|={:.3} truncated at dim {dim}: tail mass {tail:.2e}", alpha.norm());
    }
    Ket::new(
        HilbertSpace::single(dim)?,
        DVector::from_vec(coherent_series(dim, alpha)),
    )
}

/// Family of cat-state superpositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatFamily {
    /// `|alpha> + |-alpha>`, support on even Fock states.
    Two,
    /// `|alpha> + |-alpha> + |i alpha> + |-i alpha>`, support on multiples of 4.
    Four,
}

impl CatFamily {
    pub fn from_components(components: usize) -> Result<Self> {
        match components {
            2 => Ok(CatFamily::Two),
            4 => Ok(CatFamily::Four),
            k => Err(Error::InvalidArgument(format!(
                "cat states have 2 or 4 components, got {k}"
            ))),
        }
    }

    pub fn components(self) -> usize {
        match self {
            CatFamily::Two => 2,
            CatFamily::Four => 4,
        }
    }

    /// Rotation angle under which the family maps onto itself.
    pub fn symmetry_period(self) -> f64 {
        2.0 * std::f64::consts::PI / self.components() as f64
    }
}

/// Sum of the coherent states `|omega^j alpha>` for the k-th roots of unity.
///
/// Summing the roots analytically leaves `k alpha^n / sqrt(n!)` on the
/// multiples of k and an exact zero everywhere else.
pub(crate) fn cat_series(dim: usize, alpha: C64, family: CatFamily) -> Vec<C64> {
    let k = family.components();
    coherent_series(dim, alpha)
        .into_iter()
        .enumerate()
        .map(|(n, c)| if n % k == 0 { c } else { C64::new(0.0, 0.0) })
        .collect()
}

/// Probability mass of the untruncated cat state lying above the cutoff.
pub fn cat_tail_mass(dim: usize, alpha: C64, family: CatFamily) -> f64 {
    // Generous reference cutoff; the series terms decay super-exponentially.
    let reference = (dim + 40).max((4.0 * alpha.norm_sqr()) as usize + 60);
    let full: f64 = cat_series(reference, alpha, family).iter().map(|c| c.norm_sqr()).sum();
    let kept: f64 = cat_series(dim, alpha, family).iter().map(|c| c.norm_sqr()).sum();
    ((full - kept) / full).max(0.0)
}

pub fn cat_state(dim: usize, alpha: C64, components: usize) -> Result<Ket> {
    let family = CatFamily::from_components(components)?;
    cat_state_family(dim, alpha, family)
}

pub fn cat_state_family(dim: usize, alpha: C64, family: CatFamily) -> Result<Ket> {
    let tail = cat_tail_mass(dim, alpha, family);
    if tail > TAIL_MASS_WARNING {
        log::warn!(
            "{}-component cat |alpha|={:.3} truncated at dim {dim}: tail mass {tail:.2e}",
            family.components(),
            alpha.norm()
        );
    }
    Ket::new(
        HilbertSpace::single(dim)?,
        DVector::from_vec(cat_series(dim, alpha, family)),
    )
}

/// Deviations of a candidate density matrix from the type invariants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

/// Mixed state on a (possibly composite) space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(space: HilbertSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, matrix)?;
        let d = rho.diagnostics();
        if d.hermiticity > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: d.hermiticity });
        }
        if d.trace_error > TRACE_TOL {
            return Err(Error::DataIntegrity(format!(
                "density matrix trace deviates from 1 by {:.3e}",
                d.trace_error
            )));
        }
        if d.min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::DataIntegrity(format!(
                "density matrix has eigenvalue {:.3e}",
                d.min_eigenvalue
            )));
        }
        Ok(rho)
    }

    /// Wraps integrator output; only the shape is checked.
    pub fn from_matrix_unchecked(space: HilbertSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a space of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: DMatrix::identity(n, n) / C64::new(n as f64, 0.0),
        }
    }

    /// Incoherent mixture `sum_k p_k |k><k|` in the Fock basis.
    pub fn diagonal(space: &HilbertSpace, populations: &[f64]) -> Result<Self> {
        if populations.len() != space.total_dim() {
            return Err(Error::DimensionMismatch("population vector length".into()));
        }
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(space.clone(), m)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        op.same_space(&self.space)?;
        // Tr[O rho] without forming the product.
        let n = self.dim();
        let (o, r) = (op.matrix(), &self.matrix);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += o[(i, k)] * r[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics {
            hermiticity: max_abs_diff(&self.matrix, &self.matrix.adjoint()),
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Tensor product `self (x) other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.space.dims().to_vec();
        dims.extend_from_slice(other.space.dims());
        Self::from_matrix_unchecked(HilbertSpace::new(dims)?, self.matrix.kronecker(&other.matrix))
    }

    /// `U rho U^dag` for an operator on the same space.
    pub fn conjugate_by(&self, op: &Operator) -> Result<DensityMatrix> {
        op.same_space(&self.space)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: op.matrix() * &self.matrix * op.matrix().adjoint(),
        })
    }

    pub fn population(&self, index: usize) -> Result<f64> {
        if index >= self.dim() {
            return Err(Error::OutOfRange(format!(
                "basis index {index} outside dimension {}",
                self.dim()
            )));
        }
        Ok(self.matrix[(index, index)].re)
    }
}

/// Reduced state of subsystem `keep`, tracing out every other slot.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let space = rho.space();
    let d_keep = space.subsystem_dim(keep)?;
    let stride = space.stride(keep);
    let left: usize = space.dims()[..keep].iter().product();
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(d_keep, d_keep);
    for l in 0..left {
        for r in 0..stride {
            let base = l * d_keep * stride + r;
            for i in 0..d_keep {
                let row = base + i * stride;
                for j in 0..d_keep {
                    out[(i, j)] += m[(row, base + j * stride)];
                }
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(HilbertSpace::single(d_keep)?, out)
}

/// `<psi|rho|psi>`, clamped to [0, 1] when within 1e-10 of the boundary.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &Ket) -> Result<f64> {
    if rho.space() != psi.space() {
        return Err(Error::DimensionMismatch(format!(
            "state on {:?} compared with ket on {:?}",
            rho.space().dims(),
            psi.space().dims()
        )));
    }
    let v = psi.amplitudes();
    let f = v.dotc(&(rho.matrix() * v)).re;
    Ok(clamp_unit(f))
}

pub(crate) fn clamp_unit(f: f64) -> f64 {
    const EDGE: f64 = 1e-10;
    if f < 0.0 && f > -EDGE {
        0.0
    } else if f > 1.0 && f < 1.0 + EDGE {
        1.0
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::operator::{annihilation, embed, number};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fock_basics() {
        let vac = fock_state(6, 0).unwrap();
        assert_eq!(vac.amplitudes()[0], c(1.0));
        let five = fock_state(6, 5).unwrap();
        assert_eq!(five.amplitudes()[5], c(1.0));
        let n = number(6).unwrap();
        let three = fock_state(6, 3).unwrap();
        assert!((three.expectation(&n).unwrap().re - 3.0).abs() < 1e-15);
        assert!(matches!(fock_state(6, 6), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn ladder_action_on_fock() {
        let a = annihilation(5).unwrap();
        let out = fock_state(5, 3).unwrap().apply(&a).unwrap();
        let expected = fock_state(5, 2).unwrap().amplitudes() * c(3f64.sqrt());
        assert!((out - expected).norm() < 1e-15);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let alpha = c(3f64.sqrt());
        let psi = coherent_state(20, alpha).unwrap();
        let n = psi.expectation(&number(20).unwrap()).unwrap().re;
        // Oracle: truncated Poisson series sum_n n p_n / sum_n p_n.
        let (mut num, mut den, mut p) = (0.0, 0.0, 1.0);
        for k in 0..20 {
            if k > 0 {
                p *= 3.0 / k as f64;
            }
            num += k as f64 * p;
            den += p;
        }
        assert!((n - num / den).abs() < 1e-12);
        assert!((n - 3.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_overlap_closed_form() {
        let alpha = C64::new(1.1, 0.4);
        let plus = coherent_state(30, alpha).unwrap();
        let minus = coherent_state(30, -alpha).unwrap();
        let overlap = plus.inner(&minus).norm();
        let expected = (-2.0 * alpha.norm_sqr()).exp();
        assert!((overlap - expected).abs() < 1e-9);
        assert_eq!(coherent_state(4, c(0.0)).unwrap(), fock_state(4, 0).unwrap());
    }

    #[test]
    fn cat_parity_support_is_exact() {
        let alpha = c(3f64.sqrt());
        let two = cat_state(20, alpha, 2).unwrap();
        let four = cat_state(20, alpha, 4).unwrap();
        for n in 0..20 {
            if n % 2 != 0 {
                assert_eq!(two.amplitudes()[n], c(0.0));
            } else {
                assert!(two.amplitudes()[n].norm() > 0.0);
            }
            if n % 4 != 0 {
                assert_eq!(four.amplitudes()[n], c(0.0));
            } else {
                assert!(four.amplitudes()[n].norm() > 0.0);
            }
        }
        assert_eq!(cat_state(20, c(0.0), 2).unwrap(), fock_state(20, 0).unwrap());
        assert!(matches!(cat_state(20, alpha, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cat_matches_coherent_superposition() {
        let alpha = C64::new(0.9, 0.7);
        let dim = 40;
        let sum = [alpha, -alpha, alpha * C64::i(), -alpha * C64::i()]
            .iter()
            .map(|&b| coherent_state(dim, b).unwrap().amplitudes().clone())
            .fold(DVector::zeros(dim), |acc, v| acc + v);
        let four = cat_state(dim, alpha, 4).unwrap();
        let sum = Ket::new(HilbertSpace::single(dim).unwrap(), sum).unwrap();
        assert!((four.inner(&sum).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = coherent_state(4, C64::new(0.3, 0.2)).unwrap();
        let b = fock_state(3, 1).unwrap();
        let joint = a.tensor(&b).unwrap().to_density();
        let ra = partial_trace(&joint, 0).unwrap();
        let rb = partial_trace(&joint, 1).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.to_density().matrix()) < 1e-14);
        assert!(max_abs_diff(rb.matrix(), b.to_density().matrix()) < 1e-14);
        assert!((ra.trace() - c(1.0)).norm() < 1e-14);

        // (|00> + |11>)/sqrt2 on 2x2.
        let space = HilbertSpace::new(vec![2, 2]).unwrap();
        let bell = Ket::new(
            space,
            DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]),
        )
        .unwrap()
        .to_density();
        let red = partial_trace(&bell, 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(red.space());
        assert!(max_abs_diff(red.matrix(), mixed.matrix()) < 1e-15);
        assert!(partial_trace(&bell, 2).is_err());
    }

    #[test]
    fn ancilla_round_trip() {
        let rho = cat_state(5, c(0.8), 2).unwrap().to_density();
        let anc = fock_state(3, 0).unwrap().to_density();
        let joint = rho.tensor(&anc).unwrap().tensor(&anc).unwrap();
        let back = partial_trace(&joint, 0).unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-14);
        // embed consistency: <n_a> survives embedding
        let n = embed(&number(5).unwrap(), joint.space(), 0).unwrap();
        let n_direct = rho.expectation(&number(5).unwrap()).unwrap();
        assert!((joint.expectation(&n).unwrap() - n_direct).norm() < 1e-14);
    }

    #[test]
    fn fidelity_cases() {
        let psi = cat_state(6, c(1.0), 2).unwrap();
        assert!((fidelity_pure(&psi.to_density(), &psi).unwrap() - 1.0).abs() < 1e-14);

        let space = HilbertSpace::single(5).unwrap();
        let mixed = DensityMatrix::maximally_mixed(&space);
        assert!((fidelity_pure(&mixed, &fock_state(5, 2).unwrap()).unwrap() - 0.2).abs() < 1e-15);

        let half = DensityMatrix::diagonal(&HilbertSpace::single(2).unwrap(), &[0.5, 0.5]).unwrap();
        let plus = Ket::new(
            HilbertSpace::single(2).unwrap(),
            DVector::from_vec(vec![c(1.0), c(1.0)]),
        )
        .unwrap();
        assert!((fidelity_pure(&half, &plus).unwrap() - 0.5).abs() < 1e-15);

        assert!(fidelity_pure(&half, &fock_state(3, 0).unwrap()).is_err());
    }

    #[test]
    fn validating_constructor() {
        let space = HilbertSpace::single(2).unwrap();
        let bad_trace = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.6), c(0.6)]));
        assert!(DensityMatrix::new(space.clone(), bad_trace).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.1), c(-0.1)]));
        assert!(DensityMatrix::new(space.clone(), negative).is_err());
        let mut non_herm = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.5)]));
        non_herm[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(space, non_herm).is_err());
    }
}
