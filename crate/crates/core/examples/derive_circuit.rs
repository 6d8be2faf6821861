//! Effective Hamiltonian coefficients of a circuit netlist.
//!
//! Usage: `cargo run --example derive_circuit [netlist.toml] [kappa_per_us] [drive_delta]`

use std::path::PathBuf;

use multimode_release::circuit::CircuitNetlist;
use multimode_release::harness::{derive_report, REFERENCE_DRIVE_DELTA};

fn main() -> multimode_release::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference_netlist.toml"));
    let kappa = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let delta = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(REFERENCE_DRIVE_DELTA);

    let netlist = CircuitNetlist::read(&path)?;
    let r = derive_report(&netlist, kappa, delta)?;
    println!("modes (GHz): storage {:.4}, coupler {:.4}, leakage {:.4}", r.storage_ghz, r.coupler_ghz, r.leakage_ghz);
    println!("participations: a {:.5}, c {:.5}, b {:.5}", r.lambda_a, r.lambda_c, r.lambda_b);
    println!("chi_a {:.4} MHz, chi_b {:.4} MHz, chi_ab {:.4} MHz", r.chi_a_mhz, r.chi_b_mhz, r.chi_ab_mhz);
    println!("chi_ab^2 / (16 chi_a chi_b) = {:.12}", r.kerr_identity_ratio);
    println!(
        "swap scale {:.3} MHz, Stark scales {:.3} / {:.3} MHz, drive at {:.1} MHz",
        r.swap_scale_mhz, r.stark_scale_a_mhz, r.stark_scale_b_mhz, r.drive_frequency_mhz
    );
    println!("at delta = {delta}: g = {:.4} MHz, Purcell rate {:.4} /us", r.g_swap_mhz, r.purcell_rate_per_us);
    Ok(())
}
