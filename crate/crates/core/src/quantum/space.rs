use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor product of truncated oscillator Fock spaces.
///
/// Slot 0 is the most significant index of the Kronecker ordering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension(
                "a Hilbert space needs at least one subsystem".into(),
            ));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimension must be positive, got {d}"
            )));
        }
        Ok(Self { dims })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn subsystem_dim(&self, slot: usize) -> Result<usize> {
        self.dims.get(slot).copied().ok_or_else(|| {
            Error::OutOfRange(format!(
                "slot {slot} does not exist in a {}-subsystem space",
                self.dims.len()
            ))
        })
    }

    /// Kronecker stride of a slot (product of the dimensions after it).
    pub fn stride(&self, slot: usize) -> usize {
        self.dims[slot + 1..].iter().product()
    }

    /// Splits a flat basis index into per-slot occupation numbers.
    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for slot in (0..self.dims.len()).rev() {
            out[slot] = index % self.dims[slot];
            index /= self.dims[slot];
        }
        out
    }

    pub fn flatten(&self, occupations: &[usize]) -> usize {
        occupations
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&n, &d)| acc * d + n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_zero() {
        assert!(HilbertSpace::new(vec![]).is_err());
        assert!(HilbertSpace::new(vec![3, 0]).is_err());
    }

    #[test]
    fn flatten_round_trip() {
        let s = HilbertSpace::new(vec![3, 4, 2]).unwrap();
        assert_eq!(s.total_dim(), 24);
        for i in 0..24 {
            assert_eq!(s.flatten(&s.unflatten(i)), i);
        }
        assert_eq!(s.stride(0), 8);
        assert_eq!(s.stride(2), 1);
    }
}
