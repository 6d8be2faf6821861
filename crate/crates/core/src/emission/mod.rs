//! The emitted field: two-time correlation, temporal modes and spectra.

pub mod correlation;
pub mod modes;
pub mod spectrum;

pub use correlation::{
    correlation_from_trajectory, emission, emitted_photons, first_order_correlation,
    CorrelationMatrix, CorrelationOptions, Emission,
};
pub use modes::{decompose_modes, mode_occupation_ratio, weighted_inner, ModeDecomposition};
pub use spectrum::{
    mean_line_spacing, spectral_peaks, time_dependent_spectrum, Spectrogram, SpectrumOptions,
};
