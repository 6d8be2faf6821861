//! Tunes the two coupling capacitances of the reference netlist until the
//! self-Kerr coefficients hit target values.
//!
//! Usage: `cargo run --example calibrate_netlist [chi_a_MHz] [chi_b_MHz]`

use std::path::PathBuf;

use multimode_release::circuit::{dressed_modes, effective_params, CircuitNetlist};
use multimode_release::units::rad_per_us_to_mhz;

/// |chi| grows with the coupling capacitance, so a bracket search suffices.
fn solve(mut f: impl FnMut(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn chis(n: &CircuitNetlist) -> (f64, f64, f64) {
    let p = effective_params(&dressed_modes(n).expect("netlist is solvable"), n);
    (rad_per_us_to_mhz(p.chi_a), rad_per_us_to_mhz(p.chi_b), rad_per_us_to_mhz(p.chi_ab))
}

fn main() -> multimode_release::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let target_a = args.first().copied().unwrap_or(-0.017).abs();
    let target_b = args.get(1).copied().unwrap_or(-0.04).abs();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference_netlist.toml");
    let mut n = CircuitNetlist::read(&path)?;

    // chi_a depends mostly on C_ac and chi_b on C_bc; alternate a few times.
    for _ in 0..6 {
        let mut m = n.clone();
        n.c_ac = solve(|c| { m.c_ac = c; chis(&m).0.abs() }, target_a, 0.0, 20.0);
        let mut m = n.clone();
        n.c_bc = solve(|c| { m.c_bc = c; chis(&m).1.abs() }, target_b, 0.0, 60.0);
    }
    let (a, b, ab) = chis(&n);
    println!("C_ac = {:.4} fF, C_bc = {:.4} fF", n.c_ac, n.c_bc);
    println!("chi_a {a:.5} MHz, chi_b {b:.5} MHz, chi_ab {ab:.5} MHz");
    println!("\n{}", n.to_text());
    Ok(())
}
