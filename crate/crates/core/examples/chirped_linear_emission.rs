//! A linear resonator whose frequency follows the Kerr-shifted band still
//! emits |5> into a single temporal mode.

use multimode_release::dynamics::{build_toy_model, chirp_profile, ControlFunction, TimeGrid};
use multimode_release::emission::{decompose_modes, emission, mode_occupation_ratio, CorrelationOptions};
use multimode_release::quantum::{annihilation, fock_state, number};
use multimode_release::units::mhz_to_rad_per_us;

fn main() -> multimode_release::Result<()> {
    let (dim, kappa, n) = (8, 1.0, 5);
    let omega = chirp_profile(0.0, mhz_to_rad_per_us(0.47), n as f64, kappa);
    let model = build_toy_model(dim, omega, ControlFunction::constant(0.0), kappa)?;
    let grid = TimeGrid::uniform(0.0, 10.0, 401)?;
    let opts = CorrelationOptions { residual_op: Some(number(dim)?), ..Default::default() };
    let e = emission(
        &model,
        &fock_state(dim, n)?.to_density(),
        &grid,
        &annihilation(dim)?.scale_real(kappa.sqrt()),
        &opts,
    )?;
    let modes = decompose_modes(&e.correlation, 4)?;
    let residual = e.residual.unwrap_or(0.0);
    println!("n_out = {:.5}, residual = {residual:.2e}, sum = {:.5}", modes.total, modes.total + residual);
    println!("n1 = {:.5}, n1 / n_out = {:.6}", modes.occupations[0], mode_occupation_ratio(&modes)?);
    Ok(())
}
