use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catfit::CatFitReport;
use crate::error::{Error, Result};

/// One evaluated drive-rate candidate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub t0: f64,
    pub report: Option<CatFitReport>,
    /// Error message when the pipeline failed for this candidate.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriveRateOptimum {
    pub best_t0: f64,
    pub best_fidelity: f64,
    /// All candidates in input order.
    pub candidates: Vec<Candidate>,
}

impl DriveRateOptimum {
    pub fn best(&self) -> &CatFitReport {
        self.candidates
            .iter()
            .find(|c| c.t0 == self.best_t0)
            .and_then(|c| c.report.as_ref())
            .expect("best candidate always has a report")
    }
}

/// Logarithmic grid with `per_decade` points per decade covering `[lo, hi]`.
pub fn log_candidates(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || per_decade == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad candidate range [{lo}, {hi}] with {per_decade} points per decade"
        )));
    }
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    if n == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=n)
        .map(|k| lo * 10f64.powf(decades * k as f64 / n as f64))
        .collect())
}

/// Default candidates: 8 per decade over `[0.5, 20]` us.
pub fn default_candidates() -> Vec<f64> {
    log_candidates(0.5, 20.0, 8).expect("static range")
}

/// Runs `pipeline` for every candidate in parallel and keeps the one with
/// the highest cat fidelity. Failing candidates are logged and skipped.
pub fn optimize_drive_rate<F>(candidates: &[f64], pipeline: F) -> Result<DriveRateOptimum>
where
    F: Fn(f64) -> Result<CatFitReport> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no drive-rate candidates".into()));
    }
    let evaluated: Vec<Candidate> = candidates
        .par_iter()
        .map(|&t0| match pipeline(t0) {
            Ok(report) => Candidate { t0, report: Some(report), error: None },
            Err(e) => {
                log::warn!("drive-rate candidate t0 = {t0} failed: {e}");
                Candidate { t0, report: None, error: Some(e.to_string()) }
            }
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for c in &evaluated {
        if let Some(r) = &c.report {
            if best.is_none_or(|(_, f)| r.fidelity > f) {
                best = Some((c.t0, r.fidelity));
            }
        }
    }
    let Some((best_t0, best_fidelity)) = best else {
        return Err(Error::AllCandidatesFailed {
            count: candidates.len(),
            first: evaluated[0].error.clone().unwrap_or_default(),
        });
    };
    Ok(DriveRateOptimum { best_t0, best_fidelity, candidates: evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(f: f64) -> CatFitReport {
        CatFitReport { components: 2, alpha: 1.0, alpha_sq: 1.0, theta: 0.0, fidelity: f, scan: vec![] }
    }

    #[test]
    fn default_grid() {
        let c = default_candidates();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[c.len() - 1] - 20.0).abs() < 1e-9);
        assert_eq!(c.len(), 14);
        assert!(c.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn picks_maximum_and_skips_failures() {
        let cands = [1.0, 2.0, 4.0, 8.0];
        let r = optimize_drive_rate(&cands, |t0| {
            if t0 == 8.0 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(report(1.0 - (t0 - 2.5f64).abs() / 10.0))
            }
        })
        .unwrap();
        assert_eq!(r.best_t0, 2.0);
        assert!(r.candidates[3].error.is_some());
        assert_eq!(r.candidates.iter().map(|c| c.t0).collect::<Vec<_>>(), cands);
        assert_eq!(r.best().fidelity, r.best_fidelity);
    }

    #[test]
    fn single_candidate_and_all_failed() {
        let r = optimize_drive_rate(&[3.0], |_| Ok(report(0.2))).unwrap();
        assert_eq!(r.best_t0, 3.0);
        assert!(optimize_drive_rate(&[1.0, 2.0], |_| Err(Error::InvalidArgument("x".into()))).is_err());
        assert!(optimize_drive_rate(&[], |_| Ok(report(1.0))).is_err());
    }
}
