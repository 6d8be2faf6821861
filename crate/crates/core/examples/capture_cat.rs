//! Releases a four-component cat through the driven coupler, captures the
//! dominant mode and fits the closest cat to the received state.
//!
//! Usage: `cargo run --release --example capture_cat [config.toml]`

use std::path::PathBuf;

use multimode_release::harness::{run_capture, RunConfig};

fn main() -> multimode_release::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/configs/fccs_capture.toml"));
    let rc = RunConfig::read(&path)?;
    let out = run_capture(&rc)?;
    let s = &out.summary;
    println!("emitted {:.4} photons, n1 / n_out = {:.4}", s.emit.n_out, s.emit.n1_over_nout.unwrap_or(f64::NAN));
    println!("captured {:.4} photons by t = {:.2} us", s.captured_photons, s.capture_end_us);
    match &out.fit {
        Some(f) => println!("fidelity {:.4} with |alpha|^2 = {:.4}, theta = {:.4}", f.fidelity, f.alpha_sq, f.theta),
        None => println!("Fock population fidelity {:.4}", s.fidelity),
    }
    Ok(())
}
