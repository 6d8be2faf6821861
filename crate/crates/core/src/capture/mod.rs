//! Recapture of the dominant output mode by a virtual linear receiver and
//! fidelity analysis of the captured state.

mod cascade;
mod catfit;
mod coupling;
mod optimize;

pub use cascade::{capture, capture_grid, cascade_model, cascade_model_with, CaptureResult, ExchangeSign};
pub use catfit::{best_cat_fit, best_cat_fit_with, fock_population_fidelity, CatFitOptions, CatFitReport};
pub use coupling::{ReceiverCoupling, DEFAULT_CAP_FACTOR, DEFAULT_EPSILON};
pub use optimize::{default_candidates, log_candidates, optimize_drive_rate, Candidate, DriveRateOptimum};
