//! Resumable sweep of the initial Fock number; single-mode content drops as
//! the Kerr shifts grow with photon number.
//!
//! Usage: `cargo run --release --example photon_number_sweep [out_dir]`

use std::path::PathBuf;

use multimode_release::harness::{read_csv, run_sweep, RunConfig};

fn main() -> multimode_release::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/configs/fock_sweep.toml");
    let rc = RunConfig::read(&path)?;
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fock_sweep"));
    let report = run_sweep(&rc, &out, true, 2)?;
    println!("{} simulated, {} reused, {} failed", report.simulated, report.skipped, report.failed);
    let (_, header, rows) = read_csv(&report.csv)?;
    let col = header.iter().position(|h| h == "n1_over_nout").unwrap();
    for row in rows {
        println!("n = {}  n1 / n_out = {}", row[0], row[col]);
    }
    Ok(())
}
