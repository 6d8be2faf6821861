//! A linear emitter releases |1>; a receiver with the time-dependent coupling
//! matched to the emitted mode absorbs it completely.

use multimode_release::capture::{capture, capture_grid, cascade_model, ReceiverCoupling};
use multimode_release::dynamics::{build_toy_model, ControlFunction, TimeGrid};
use multimode_release::emission::{decompose_modes, emission, CorrelationOptions};
use multimode_release::quantum::{annihilation, fock_state};

fn main() -> multimode_release::Result<()> {
    let (dim, kappa) = (2, 1.0);
    let model = build_toy_model(dim, ControlFunction::constant(0.0), ControlFunction::constant(0.0), kappa)?;
    let rho0 = fock_state(dim, 1)?.to_density();
    let grid = TimeGrid::uniform(0.0, 12.0, 241)?;
    let out = annihilation(dim)?.scale_real(kappa.sqrt());
    let e = emission(&model, &rho0, &grid, &out, &CorrelationOptions::default())?;
    let v1 = decompose_modes(&e.correlation, 1)?.modes.remove(0);

    let coupling = ReceiverCoupling::new(&grid, v1, kappa)?;
    let end = coupling.capture_end(kappa).min(grid.end());
    let cascade = cascade_model(&model, &coupling, 3)?;
    let start = rho0.tensor(&fock_state(3, 0)?.to_density())?;
    let r = capture(&cascade, &start, &capture_grid(&grid, end)?)?;
    println!("capture ends at {end:.2} us");
    println!("captured {:.5} photons ({} floor, {} cap activations)", r.captured_photons, coupling.floor_activations, coupling.cap_activations);
    Ok(())
}
