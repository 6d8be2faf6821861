use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hint for the step controller about how a control varies in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    Constant,
    Smooth,
    /// Continuous but with kinks (e.g. interpolated samples).
    Piecewise,
}

/// Real scalar control `t (us) -> value`.
#[derive(Clone)]
pub struct ControlFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    smoothness: Smoothness,
    label: String,
}

impl ControlFunction {
    pub fn new(
        label: impl Into<String>,
        smoothness: Smoothness,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            smoothness,
            label: label.into(),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("const({value})"), Smoothness::Constant, move |_| value)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Pointwise product with a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |t| factor * f(t)),
            smoothness: self.smoothness,
            label: format!("{factor}*{}", self.label),
        }
    }

    /// Pointwise square.
    pub fn squared(&self) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |t| {
                let v = f(t);
                v * v
            }),
            smoothness: self.smoothness,
            label: format!("({})^2", self.label),
        }
    }
}

impl fmt::Debug for ControlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlFunction")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// Complex scalar control, used for time-dependent collapse coefficients.
#[derive(Clone)]
pub struct ComplexControl {
    f: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    smoothness: Smoothness,
    label: String,
}

impl ComplexControl {
    pub fn new(
        label: impl Into<String>,
        smoothness: Smoothness,
        f: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            smoothness,
            label: label.into(),
        }
    }

    pub fn constant(value: C64) -> Self {
        Self::new(format!("const({value})"), Smoothness::Constant, move |_| value)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> C64 {
        (self.f)(t)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ComplexControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexControl")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// Flux-drive envelope `delta tanh(t / t0)` for `t >= 0`, zero before.
pub fn drive_envelope(delta: f64, t0: f64) -> Result<ControlFunction> {
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "drive turn-on time must be positive, got {t0}"
        )));
    }
    Ok(ControlFunction::new(
        format!("{delta}*tanh(t/{t0})"),
        Smoothness::Smooth,
        move |t| if t < 0.0 { 0.0 } else { delta * (t / t0).tanh() },
    ))
}
