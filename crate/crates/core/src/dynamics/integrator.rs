//! Dormand-Prince 5(4) embedded Runge-Kutta pair with FSAL and a standard
//! proportional step controller.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const MAX_STEPS: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Integrator state that persists between `advance` calls.
#[derive(Debug)]
pub struct Dopri5 {
    tol: Tolerances,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    h: Option<f64>,
    fsal: bool,
    stats: StepStats,
}

impl Dopri5 {
    pub fn new(len: usize, tol: Tolerances) -> Self {
        let zero = vec![C64::new(0.0, 0.0); len];
        Self {
            tol,
            k: std::array::from_fn(|_| zero.clone()),
            stage: zero.clone(),
            y_new: zero,
            h: None,
            fsal: false,
            stats: StepStats::default(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Forget the cached derivative, e.g. after `y` was modified externally.
    pub fn invalidate(&mut self) {
        self.fsal = false;
    }

    /// Integrates `y' = f(t, y)` from `*t` to exactly `t_target`.
    pub fn advance<F>(&mut self, f: &mut F, t: &mut f64, y: &mut [C64], t_target: f64) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        if t_target < *t {
            return Err(Error::Integration {
                time: *t,
                reason: format!("cannot integrate backwards to {t_target}"),
            });
        }
        if t_target == *t {
            return Ok(());
        }
        if !self.fsal {
            f(*t, y, &mut self.k[0]);
            self.stats.rhs_evals += 1;
            self.fsal = true;
        }
        let span = t_target - *t;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, span),
        };
        let mut rejected_last = false;
        loop {
            let remaining = t_target - *t;
            let clipped = h >= remaining * (1.0 - 1e-12);
            let h_try = if clipped { remaining } else { h };
            if !(h_try > 1e-13 * t.abs().max(1.0)) {
                return Err(Error::Integration {
                    time: *t,
                    reason: format!("step size underflow (h = {h_try:.3e})"),
                });
            }
            if self.stats.accepted + self.stats.rejected > MAX_STEPS {
                return Err(Error::Integration {
                    time: *t,
                    reason: "step budget exhausted".into(),
                });
            }
            let err = self.attempt(f, *t, y, h_try);
            if !err.is_finite() {
                self.stats.rejected += 1;
                h = h_try * FAC_MIN;
                rejected_last = true;
                continue;
            }
            let fac_max = if rejected_last { 1.0 } else { FAC_MAX };
            let factor = if err == 0.0 {
                fac_max
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max)
            };
            if err <= 1.0 {
                self.stats.accepted += 1;
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                rejected_last = false;
                let proposal = h_try * factor;
                if clipped {
                    *t = t_target;
                    // A short landing step says nothing about the natural scale.
                    self.h = Some(proposal.max(h));
                    return Ok(());
                }
                *t += h_try;
                h = proposal;
            } else {
                self.stats.rejected += 1;
                rejected_last = true;
                h = h_try * factor;
            }
        }
    }

    fn initial_step(&self, y: &[C64], span: f64) -> f64 {
        let d0 = rms(y);
        let d1 = rms(&self.k[0]);
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(span)
    }

    /// One trial step; returns the scaled RMS error estimate.
    fn attempt<F>(&mut self, f: &mut F, t: f64, y: &[C64], h: f64) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let stage = &mut self.stage;

        for i in 0..y.len() {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, stage, k2);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, stage, k3);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, stage, k4);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, stage, k5);
        for i in 0..y.len() {
            stage[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, stage, k6);
        let y_new = &mut self.y_new;
        for i in 0..y.len() {
            y_new[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, y_new, k7);
        self.stats.rhs_evals += 6;

        let Tolerances { rtol, atol } = self.tol;
        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / scale;
            acc += r * r;
        }
        (acc / y.len() as f64).sqrt()
    }
}

fn rms(v: &[C64]) -> f64 {
    (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len().max(1) as f64).sqrt()
}
