//! A Kerr resonator prepared in |5> releases its photons into several
//! temporal modes; its spectrum shows lines spaced by 2 chi.

use multimode_release::dynamics::{build_toy_model, ControlFunction, TimeGrid};
use multimode_release::emission::{
    decompose_modes, emission, mean_line_spacing, mode_occupation_ratio, spectral_peaks,
    time_dependent_spectrum, CorrelationOptions, SpectrumOptions,
};
use multimode_release::quantum::{annihilation, fock_state, linspace, number};
use multimode_release::units::{mhz_to_rad_per_us, rad_per_us_to_mhz};

fn main() -> multimode_release::Result<()> {
    let (dim, kappa) = (8, 1.0);
    let chi = mhz_to_rad_per_us(0.47);
    let model = build_toy_model(dim, ControlFunction::constant(0.0), ControlFunction::constant(chi), kappa)?;
    let rho0 = fock_state(dim, 5)?.to_density();
    let grid = TimeGrid::uniform(0.0, 10.0, 401)?;
    let out = annihilation(dim)?.scale_real(kappa.sqrt());
    let opts = CorrelationOptions { residual_op: Some(number(dim)?), ..Default::default() };
    let e = emission(&model, &rho0, &grid, &out, &opts)?;

    let modes = decompose_modes(&e.correlation, 8)?;
    println!("emitted {:.4} photons, {:.2e} left in the resonator", modes.total, e.residual.unwrap_or(0.0));
    for (k, n) in modes.occupations.iter().enumerate() {
        println!("  mode {}: {n:.4}", k + 1);
    }
    println!("modes above 0.1: {}", modes.modes_above(0.1));
    println!("n1 / n_out = {:.4}", mode_occupation_ratio(&modes)?);

    let omegas = linspace(mhz_to_rad_per_us(-1.5), mhz_to_rad_per_us(5.0), 261);
    let times = linspace(0.0, 10.0, 41);
    let sp = time_dependent_spectrum(&e.correlation, &omegas, &times, &SpectrumOptions::default())?;
    let peaks: Vec<f64> = spectral_peaks(&sp.omegas, &sp.integrated(), 0.05)
        .into_iter()
        .map(rad_per_us_to_mhz)
        .collect();
    println!("spectral lines (MHz): {peaks:.3?}");
    if let Some(s) = mean_line_spacing(&peaks) {
        println!("line spacing {s:.3} MHz, 2 chi = {:.3} MHz", 2.0 * 0.47);
    }
    Ok(())
}
