use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{CatFamily, DensityMatrix};

/// Best match of a captured state to a rotated cat `exp(-i theta n) |cat(alpha)>`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatFitReport {
    pub components: usize,
    /// Real amplitude of the fitted cat.
    pub alpha: f64,
    pub alpha_sq: f64,
    /// Rotation angle in `[0, 2 pi / components)`; larger angles are equivalent.
    pub theta: f64,
    pub fidelity: f64,
    /// `(alpha, theta, fidelity)` for every grid point of the scan.
    pub scan: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatFitOptions {
    pub alpha_steps: usize,
    pub theta_steps: usize,
    /// Absolute tolerance of the golden-section refinement.
    pub tolerance: f64,
}

impl Default for CatFitOptions {
    fn default() -> Self {
        Self {
            alpha_steps: 61,
            theta_steps: 64,
            tolerance: 1e-9,
        }
    }
}

/// Fidelity of `rho` with the rotated cat, computed from cat amplitudes.
struct Objective<'a> {
    rho: &'a DensityMatrix,
    family: CatFamily,
}

impl Objective<'_> {
    fn amplitudes(&self, alpha: f64) -> Result<Vec<C64>> {
        // Truncation warnings are the caller's business; build the series directly.
        let mut amps = crate::quantum::state::cat_series(self.rho.dim(), C64::new(alpha, 0.0), self.family);
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument(format!("cat amplitude {alpha} has zero norm")));
        }
        for c in &mut amps {
            *c /= norm;
        }
        Ok(amps)
    }

    fn fidelity(&self, amps: &[C64], theta: f64) -> f64 {
        let m = self.rho.matrix();
        let psi: Vec<C64> = amps
            .iter()
            .enumerate()
            .map(|(n, c)| c * C64::from_polar(1.0, -theta * n as f64))
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for (r, pr) in psi.iter().enumerate() {
            if *pr == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for (c, pc) in psi.iter().enumerate() {
                row += m[(r, c)] * pc;
            }
            acc += pr.conj() * row;
        }
        acc.re.clamp(0.0, 1.0)
    }

    fn eval(&self, alpha: f64, theta: f64) -> Result<f64> {
        Ok(self.fidelity(&self.amplitudes(alpha)?, theta))
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

pub fn best_cat_fit(
    rho_d: &DensityMatrix,
    family: CatFamily,
    alpha_range: (f64, f64),
) -> Result<CatFitReport> {
    best_cat_fit_with(rho_d, family, alpha_range, &CatFitOptions::default())
}

/// Grid scan over `(|alpha|, theta)`, then alternating golden-section
/// refinement of both coordinates around the best grid point.
pub fn best_cat_fit_with(
    rho_d: &DensityMatrix,
    family: CatFamily,
    alpha_range: (f64, f64),
    options: &CatFitOptions,
) -> Result<CatFitReport> {
    if rho_d.space().num_subsystems() != 1 {
        return Err(Error::MultiSubsystem(
            "cat fitting needs a single-oscillator state; take a partial trace first".into(),
        ));
    }
    let (lo, hi) = alpha_range;
    if !(hi > lo) || !(lo >= 0.0) || options.alpha_steps < 2 || options.theta_steps < 1 {
        return Err(Error::InvalidArgument(format!(
            "empty cat-fit range [{lo}, {hi}] with {} x {} points",
            options.alpha_steps, options.theta_steps
        )));
    }
    let obj = Objective { rho: rho_d, family };
    let period = family.symmetry_period();
    let da = (hi - lo) / (options.alpha_steps - 1) as f64;
    let dt = period / options.theta_steps as f64;

    let mut scan = Vec::with_capacity(options.alpha_steps * options.theta_steps);
    let mut best = (lo, 0.0, f64::NEG_INFINITY);
    for ia in 0..options.alpha_steps {
        let alpha = lo + da * ia as f64;
        let amps = obj.amplitudes(alpha)?;
        for it in 0..options.theta_steps {
            let theta = dt * it as f64;
            let f = obj.fidelity(&amps, theta);
            scan.push((alpha, theta, f));
            if f > best.2 {
                best = (alpha, theta, f);
            }
        }
    }

    let (mut alpha, mut theta, mut fid) = best;
    for _ in 0..50 {
        let (a, _) = golden_max(
            (alpha - da).max(lo),
            (alpha + da).min(hi),
            options.tolerance,
            |a| obj.eval(a, theta),
        )?;
        let amps = obj.amplitudes(a)?;
        let (t, f) = golden_max(theta - dt, theta + dt, options.tolerance, |t| {
            Ok(obj.fidelity(&amps, t))
        })?;
        let moved = (a - alpha).abs().max((t - theta).abs());
        if f >= fid {
            alpha = a;
            theta = t;
            fid = f;
        }
        if moved < options.tolerance {
            break;
        }
    }
    Ok(CatFitReport {
        components: family.components(),
        alpha,
        alpha_sq: alpha * alpha,
        theta: theta.rem_euclid(period),
        fidelity: fid,
        scan,
    })
}

/// `<n| rho |n>`.
pub fn fock_population_fidelity(rho_d: &DensityMatrix, n: usize) -> Result<f64> {
    rho_d.population(n)
}
