//! Chooses the drive turn-on time t0 that maximizes the capture fidelity of
//! a two-component cat.
//!
//! Usage: `cargo run --release --example optimize_drive_rate [per_decade]`

use std::path::PathBuf;

use multimode_release::harness::{run_capture, RunConfig};

fn main() -> multimode_release::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/configs/tccs_optimize.toml");
    let mut rc = RunConfig::read(&path)?;
    if let Some(per_decade) = std::env::args().nth(1).and_then(|s| s.parse::<f64>().ok()) {
        rc = rc.with_override("t0_per_decade", per_decade)?;
    }
    let out = run_capture(&rc)?;
    let opt = out.optimization.as_ref().expect("optimize_t0 is set in the config");
    for c in &opt.candidates {
        match (&c.report, &c.error) {
            (Some(r), _) => println!("t0 = {:6.3} us  F = {:.4}  |alpha|^2 = {:.4}", c.t0, r.fidelity, r.alpha_sq),
            (None, Some(e)) => println!("t0 = {:6.3} us  failed: {e}", c.t0),
            _ => {}
        }
    }
    println!("best t0 = {:.3} us with F = {:.4}", opt.best_t0, opt.best_fidelity);
    Ok(())
}
