//! Scans the drive amplitude delta and reports the four-component cat
//! capture fidelity, the quantity the reference drive is calibrated on.
//!
//! Usage: `cargo run --release --example calibrate_drive [lo] [hi] [points]`

use std::path::PathBuf;

use multimode_release::harness::{run_capture, RunConfig};
use multimode_release::quantum::linspace;

fn main() -> multimode_release::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (lo, hi) = (args.first().copied().unwrap_or(0.010), args.get(1).copied().unwrap_or(0.018));
    let points = args.get(2).copied().unwrap_or(5.0) as usize;
    let base = RunConfig::read(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/configs/fccs_capture.toml"))?;
    for delta in linspace(lo, hi, points) {
        let out = run_capture(&base.with_override("drive_delta", delta)?)?;
        let s = &out.summary;
        println!(
            "delta = {delta:.4}  F = {:.4}  |alpha|^2 = {:.4}  n1 / n_out = {:.4}",
            s.fidelity,
            s.alpha_sq.unwrap_or(f64::NAN),
            s.emit.n1_over_nout.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
