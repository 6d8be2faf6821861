use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ComplexControl, Smoothness, TimeGrid};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const DEFAULT_CAP_FACTOR: f64 = 50.0;
const NORM_TOL: f64 = 1e-6;

/// Time-reversal coupling `g(t) = -conj(v(t)) / sqrt(int_0^t |v|^2)` of a
/// receiver that absorbs the temporal mode `v`.
///
/// `v` is linearly interpolated between grid samples and zero outside; the
/// accumulated norm is the exact integral of that interpolant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReceiverCoupling {
    pub times: Vec<f64>,
    pub mode: Vec<C64>,
    pub accumulated: Vec<f64>,
    pub epsilon: f64,
    pub cap: f64,
    /// Grid samples where the norm floor or the magnitude cap was active.
    pub floor_activations: usize,
    pub cap_activations: usize,
}

/// `int |(1-s) a + s b|^2 ds` over one interval of length `h`.
fn segment_norm(a: C64, b: C64, h: f64) -> f64 {
    h * (a.norm_sqr() + (a.conj() * b).re + b.norm_sqr()) / 3.0
}

impl ReceiverCoupling {
    pub fn new(grid: &TimeGrid, mode: Vec<C64>, kappa: f64) -> Result<Self> {
        Self::with_limits(grid, mode, DEFAULT_EPSILON, DEFAULT_CAP_FACTOR * kappa.sqrt())
    }

    pub fn with_limits(grid: &TimeGrid, mode: Vec<C64>, epsilon: f64, cap: f64) -> Result<Self> {
        if mode.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "mode with {} samples on a {}-point grid",
                mode.len(),
                grid.len()
            )));
        }
        if !(epsilon > 0.0) || !(cap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need epsilon > 0 and cap > 0 (got {epsilon}, {cap})"
            )));
        }
        let w = grid.trapezoid_weights();
        let norm: f64 = mode.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "receiver mode must be normalized, got norm {norm:.9}"
            )));
        }
        let t = grid.samples();
        let mut accumulated = vec![0.0; t.len()];
        for k in 1..t.len() {
            accumulated[k] = accumulated[k - 1] + segment_norm(mode[k - 1], mode[k], t[k] - t[k - 1]);
        }
        let mut c = Self {
            times: t.to_vec(),
            mode,
            accumulated,
            epsilon,
            cap,
            floor_activations: 0,
            cap_activations: 0,
        };
        for k in 0..t.len() {
            if c.accumulated[k] < epsilon {
                c.floor_activations += 1;
            }
            let raw = c.mode[k].norm() / c.accumulated[k].max(epsilon).sqrt();
            if raw > cap {
                c.cap_activations += 1;
            }
        }
        if c.floor_activations + c.cap_activations > 0 {
            log::info!(
                "receiver coupling regularized: norm floor at {} samples, cap at {} samples",
                c.floor_activations,
                c.cap_activations
            );
        }
        Ok(c)
    }

    /// Interpolated mode value and accumulated norm at `t`.
    fn locate(&self, t: f64) -> Option<(C64, f64)> {
        let s = &self.times;
        if t < s[0] || t > s[s.len() - 1] {
            return None;
        }
        let k = match s.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => k.min(s.len() - 2),
            Err(k) => (k - 1).min(s.len() - 2),
        };
        let h = s[k + 1] - s[k];
        let f = (t - s[k]) / h;
        let (a, b) = (self.mode[k], self.mode[k + 1]);
        let v = a * (1.0 - f) + b * f;
        let partial = segment_norm(a, v, t - s[k]);
        Some((v, self.accumulated[k] + partial))
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self.locate(t) {
            None => C64::new(0.0, 0.0),
            Some((v, n)) => {
                let g = -v.conj() / n.max(self.epsilon).sqrt();
                let m = g.norm();
                if m > self.cap {
                    g * (self.cap / m)
                } else {
                    g
                }
            }
        }
    }

    pub fn control(&self) -> ComplexControl {
        let me = Arc::new(self.clone());
        ComplexControl::new("receiver coupling", Smoothness::Piecewise, move |t| me.eval(t))
    }

    /// First time the accumulated norm exceeds `1 - 1e-4`, plus `2 / kappa`.
    ///
    /// The accumulated norm is measured relative to its value at the last
    /// sample, so the piecewise-linear and trapezoid quadratures agree.
    pub fn capture_end(&self, kappa: f64) -> f64 {
        let tail = 2.0 / kappa;
        let total = self.accumulated.last().copied().unwrap_or(0.0);
        if total < 1.0 - 1e-3 {
            log::warn!("mode norm only reaches {total:.6} on the grid; capture may be incomplete");
        }
        let k = self
            .accumulated
            .iter()
            .position(|&n| n > (1.0 - 1e-4) * total)
            .unwrap_or(self.times.len() - 1);
        self.times[k] + tail
    }
}
