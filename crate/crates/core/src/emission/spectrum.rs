use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::CorrelationMatrix;
use crate::error::{Error, Result};

/// Time-dependent spectrum `I(omega, t)`; `intensity[(k, m)]` belongs to
/// `omegas[k]` and `times[m]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrogram {
    pub times: Vec<f64>,
    pub omegas: Vec<f64>,
    pub intensity: DMatrix<f64>,
    /// Largest imaginary part discarded from the complex transform.
    pub max_imaginary: f64,
    /// Width (us) of the Gaussian lag window, if one was applied.
    pub window_width: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpectrumOptions {
    /// Lag step in us; defaults to the mean grid spacing.
    pub lag_step: Option<f64>,
    /// Standard deviation of a Gaussian window on the lag `s`.
    pub gaussian_window: Option<f64>,
}

/// Bilinear interpolation of `G`, zero outside the grid square.
pub fn interpolate(g: &CorrelationMatrix, x: f64, y: f64) -> C64 {
    let s = g.grid.samples();
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if x < lo || x > hi || y < lo || y > hi {
        return C64::new(0.0, 0.0);
    }
    let i = g.grid.locate(x);
    let j = g.grid.locate(y);
    let fx = (x - s[i]) / (s[i + 1] - s[i]);
    let fy = (y - s[j]) / (s[j + 1] - s[j]);
    let v = &g.values;
    v[(i, j)] * ((1.0 - fx) * (1.0 - fy))
        + v[(i + 1, j)] * (fx * (1.0 - fy))
        + v[(i, j + 1)] * ((1.0 - fx) * fy)
        + v[(i + 1, j + 1)] * (fx * fy)
}

/// `I(omega, t) = int ds G(t - s/2, t + s/2) exp(-i omega s)`.
///
/// With `G(t_i, t_j) = <O^dag(t_j) O(t_i)>` a field oscillating as
/// `exp(-i omega_0 t)` shows up at `+omega_0`.
pub fn time_dependent_spectrum(
    g: &CorrelationMatrix,
    omegas: &[f64],
    times: &[f64],
    options: &SpectrumOptions,
) -> Result<Spectrogram> {
    let samples = g.grid.samples();
    let span = g.grid.end() - g.grid.start();
    let ds = options
        .lag_step
        .unwrap_or(span / (samples.len() - 1) as f64);
    if !(ds > 0.0) {
        return Err(Error::InvalidArgument(format!("lag step must be positive, got {ds}")));
    }
    if let Some(w) = options.gaussian_window {
        if !(w > 0.0) {
            return Err(Error::InvalidArgument(format!("window width must be positive, got {w}")));
        }
    }
    let columns: Vec<(Vec<f64>, f64)> = times
        .par_iter()
        .map(|&t| {
            let reach = 2.0 * (t - g.grid.start()).min(g.grid.end() - t);
            if reach < 0.0 {
                return (vec![0.0; omegas.len()], 0.0);
            }
            let kmax = (reach / ds).floor() as i64;
            let kernel: Vec<(f64, C64)> = (-kmax..=kmax)
                .map(|k| {
                    let s = k as f64 * ds;
                    let mut val = interpolate(g, t - s / 2.0, t + s / 2.0) * ds;
                    if let Some(w) = options.gaussian_window {
                        val *= (-s * s / (2.0 * w * w)).exp();
                    }
                    (s, val)
                })
                .collect();
            let mut col = Vec::with_capacity(omegas.len());
            let mut imag: f64 = 0.0;
            for &om in omegas {
                let acc: C64 = kernel
                    .iter()
                    .map(|&(s, v)| v * C64::from_polar(1.0, -om * s))
                    .sum();
                imag = imag.max(acc.im.abs());
                col.push(acc.re);
            }
            (col, imag)
        })
        .collect();
    let mut intensity = DMatrix::zeros(omegas.len(), times.len());
    let mut max_imaginary: f64 = 0.0;
    for (m, (col, imag)) in columns.into_iter().enumerate() {
        max_imaginary = max_imaginary.max(imag);
        for (k, v) in col.into_iter().enumerate() {
            intensity[(k, m)] = v;
        }
    }
    Ok(Spectrogram {
        times: times.to_vec(),
        omegas: omegas.to_vec(),
        intensity,
        max_imaginary,
        window_width: options.gaussian_window,
    })
}

impl Spectrogram {
    /// Spectrum integrated over the time samples (trapezoid).
    pub fn integrated(&self) -> Vec<f64> {
        let w = if self.times.len() >= 2 {
            crate::dynamics::TimeGrid::new(self.times.clone())
                .map(|g| g.trapezoid_weights())
                .unwrap_or_else(|_| vec![1.0; self.times.len()])
        } else {
            vec![1.0; self.times.len()]
        };
        (0..self.omegas.len())
            .map(|k| (0..self.times.len()).map(|m| self.intensity[(k, m)] * w[m]).sum())
            .collect()
    }
}

/// Local maxima above `rel_threshold * max`, refined by a parabola through
/// the three samples around each maximum.
pub fn spectral_peaks(omegas: &[f64], values: &[f64], rel_threshold: f64) -> Vec<f64> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for k in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[k - 1], values[k], values[k + 1]);
        if c > l && c >= r && c > rel_threshold * top {
            let denom = l - 2.0 * c + r;
            let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let h = omegas[k + 1] - omegas[k];
            peaks.push(omegas[k] + shift.clamp(-0.5, 0.5) * h);
        }
    }
    peaks
}

/// Mean spacing between adjacent peaks.
pub fn mean_line_spacing(peaks: &[f64]) -> Option<f64> {
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}
