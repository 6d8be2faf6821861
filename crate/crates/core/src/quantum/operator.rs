use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::space::HilbertSpace;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense operator on a truncated multi-oscillator space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: DMatrix<C64>) -> Result<Self> {
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

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: DMatrix::zeros(n, n),
        }
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

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn powi(&self, exponent: u32) -> Self {
        let mut out = Operator::identity(&self.space);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn same_space(&self, other: &HilbertSpace) -> Result<()> {
        if &self.space != other {
            return Err(Error::DimensionMismatch(format!(
                "operator on {:?} used with space {:?}",
                self.space.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_pair(a: &Operator, b: &Operator) {
    assert_eq!(
        a.space, b.space,
        "operator arithmetic on different spaces"
    );
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        check_pair(self, rhs);
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        check_pair(self, rhs);
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        check_pair(self, rhs);
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Ladder operator `a` on a single truncated oscillator: `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "ladder operators need dim >= 2, got {dim}"
        )));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(HilbertSpace::single(dim)?, m)
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

/// Number operator `a^dag a`.
pub fn number(dim: usize) -> Result<Operator> {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    Operator::new(HilbertSpace::single(dim)?, m)
}

/// Phase rotation `exp(-i theta a^dag a)`.
pub fn rotation(dim: usize, theta: f64) -> Result<Operator> {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = C64::from_polar(1.0, -theta * n as f64);
    }
    Operator::new(HilbertSpace::single(dim)?, m)
}

/// Embeds a single-oscillator operator into `space` at `slot`, padding
/// every other slot with the identity.
pub fn embed(op: &Operator, space: &HilbertSpace, slot: usize) -> Result<Operator> {
    let slot_dim = space.subsystem_dim(slot)?;
    if op.dim() != slot_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} embedded in slot {slot} of dimension {slot_dim}",
            op.dim()
        )));
    }
    let left: usize = space.dims()[..slot].iter().product();
    let right = space.stride(slot);
    let left_id = DMatrix::<C64>::identity(left, left);
    let right_id = DMatrix::<C64>::identity(right, right);
    let m = left_id.kronecker(&op.matrix).kronecker(&right_id);
    Operator::new(space.clone(), m)
}
