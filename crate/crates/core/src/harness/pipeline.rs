use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::config::{DriveSpec, InitialState, RunConfig, Scenario};
use crate::capture::{
    best_cat_fit_with, capture, capture_grid, cascade_model, cascade_model_with, fock_population_fidelity,
    log_candidates, optimize_drive_rate, CaptureResult, CatFitOptions, CatFitReport, DriveRateOptimum,
    ExchangeSign, ReceiverCoupling,
};
use crate::circuit::{purcell_rate, resonance_detuning, EffectiveParams};
use crate::dynamics::{
    build_effective_model, build_toy_model, chirp_profile, drive_envelope, evolve_with, ComplexControl,
    ControlFunction, EmitterDims, LindbladModel, SolverOptions, TimeGrid, Trajectory, TrajectoryDiagnostics,
    LEAKAGE_SLOT, STORAGE_SLOT,
};
use crate::emission::{
    correlation_from_trajectory, decompose_modes, emitted_photons, mean_line_spacing, mode_occupation_ratio,
    spectral_peaks, time_dependent_spectrum, Emission, ModeDecomposition, Spectrogram, SpectrumOptions,
};
use crate::error::{Error, Result};
use crate::quantum::{
    annihilation, cat_tail_mass, cat_state_family, embed, fock_state, linspace, number, partial_trace,
    CatFamily, DensityMatrix, Ket, Operator,
};
use crate::units::{mhz_to_rad_per_us, rad_per_us_to_mhz};

/// Tail mass allowed when truncating a cat state.
pub const CAT_TAIL_LIMIT: f64 = 1e-2;
/// Auto grids stop after this many characteristic release times.
pub const RELEASE_TIME_CAP: f64 = 12.0;
/// Relative height a spectral line must reach to count as a peak.
pub const PEAK_THRESHOLD: f64 = 0.05;

impl InitialState {
    pub fn family(&self) -> Option<CatFamily> {
        match self {
            InitialState::Fock(_) => None,
            InitialState::Tccs(_) => Some(CatFamily::Two),
            InitialState::Fccs(_) => Some(CatFamily::Four),
        }
    }

    /// Default truncation: `n + 3` for Fock states, the smallest dimension
    /// leaving at most [`CAT_TAIL_LIMIT`] of the mass outside for cats.
    pub fn default_dim(&self) -> usize {
        match (self, self.family()) {
            (InitialState::Fock(n), _) => n + 3,
            (InitialState::Tccs(a) | InitialState::Fccs(a), Some(f)) => (1..200)
                .find(|&d| cat_tail_mass(d, C64::new(*a, 0.0), f) <= CAT_TAIL_LIMIT)
                .unwrap_or(200),
            _ => unreachable!(),
        }
    }

    pub fn ket(&self, dim: usize) -> Result<Ket> {
        match (self, self.family()) {
            (InitialState::Fock(n), _) => fock_state(dim, *n),
            (InitialState::Tccs(a) | InitialState::Fccs(a), Some(f)) => cat_state_family(dim, C64::new(*a, 0.0), f),
            _ => unreachable!(),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            InitialState::Fock(_) => None,
            InitialState::Tccs(a) | InitialState::Fccs(a) => Some(*a),
        }
    }
}

/// Emitter model with everything the pipelines need around it.
#[derive(Clone, Debug)]
pub struct Emitter {
    pub model: LindbladModel,
    pub rho0: DensityMatrix,
    pub output_op: Operator,
    /// Total source occupation, whose final value is the residual.
    pub residual_op: Operator,
    pub storage_dim: usize,
    pub initial_photons: f64,
    /// Characteristic release time in us.
    pub release_time: f64,
    pub params: Option<EffectiveParams>,
    pub drive: Option<DriveSpec>,
}

impl RunConfig {
    pub fn storage_dim_resolved(&self) -> usize {
        self.storage_dim.unwrap_or_else(|| self.initial.default_dim())
    }

    /// Copy with a different drive turn-on time.
    pub fn with_drive_t0(&self, t0: f64) -> Result<RunConfig> {
        let mut rc = self.clone();
        match &mut rc.scenario {
            Scenario::Effective { drive, .. } | Scenario::Circuit { drive, .. } => drive.t0 = t0,
            Scenario::Toy { .. } => return Err(Error::Config("the toy scenario has no flux drive".into())),
        }
        Ok(rc)
    }
}

pub fn build_emitter(rc: &RunConfig) -> Result<Emitter> {
    let dim = rc.storage_dim_resolved();
    let ket = rc.initial.ket(dim)?;
    let kappa = rc.kappa;
    let n_op = number(dim)?;
    let initial_photons = ket.expectation(&n_op)?.re;
    match rc.effective_params()? {
        None => {
            let Scenario::Toy { omega0, chi, chirp_chi } = rc.scenario else { unreachable!() };
            let omega = match chirp_chi {
                Some(c) => chirp_profile(omega0, c, initial_photons, kappa),
                None => ControlFunction::constant(omega0),
            };
            let model = build_toy_model(dim, omega, ControlFunction::constant(chi * rc.kerr_scale), kappa)?;
            Ok(Emitter {
                output_op: annihilation(dim)?.scale_real(kappa.sqrt()),
                residual_op: n_op,
                rho0: ket.to_density(),
                model,
                storage_dim: dim,
                initial_photons,
                release_time: 1.0 / kappa,
                params: None,
                drive: None,
            })
        }
        Some((params, drive)) => {
            let dims = EmitterDims { storage: dim, leakage: rc.leakage_dim };
            let model = build_effective_model(&params, drive_envelope(drive.delta, drive.t0)?, kappa, dims)?;
            let space = model.space().clone();
            let b = embed(&annihilation(rc.leakage_dim)?, &space, LEAKAGE_SLOT)?;
            let na = embed(&n_op, &space, STORAGE_SLOT)?;
            let nb = embed(&number(rc.leakage_dim)?, &space, LEAKAGE_SLOT)?;
            let rho0 = ket.tensor(&fock_state(rc.leakage_dim, 0)?)?.to_density();
            let g = params.swap_scale.abs() * drive.delta;
            // Purcell-limited when g << kappa, kappa-limited otherwise.
            let rate = (4.0 * g * g / kappa).min(kappa / 2.0);
            Ok(Emitter {
                model,
                rho0,
                output_op: b.scale_real(kappa.sqrt()),
                residual_op: &na + &nb,
                storage_dim: dim,
                initial_photons,
                release_time: if rate > 0.0 { drive.t0 + 1.0 / rate } else { f64::INFINITY },
                params: Some(params),
                drive: Some(drive),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub automatic: bool,
    /// True when the automatic grid stopped at the release-time cap.
    pub cap_reached: bool,
}

fn merge_diagnostics(into: &mut TrajectoryDiagnostics, d: &TrajectoryDiagnostics) {
    into.max_trace_drift = into.max_trace_drift.max(d.max_trace_drift);
    into.max_hermiticity = into.max_hermiticity.max(d.max_hermiticity);
    into.min_eigenvalue = match (into.min_eigenvalue, d.min_eigenvalue) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    into.positivity_warnings.extend_from_slice(&d.positivity_warnings);
    into.accepted_steps += d.accepted_steps;
    into.rejected_steps += d.rejected_steps;
    into.rhs_evals += d.rhs_evals;
}

/// Evolves on a fixed grid, or chunk by chunk until the source holds less
/// than the residual threshold (capped at [`RELEASE_TIME_CAP`] release times).
pub fn evolve_source(rc: &RunConfig, emitter: &Emitter) -> Result<(Trajectory, GridReport)> {
    let dt = rc.grid.dt;
    let opts = SolverOptions::default();
    if let Some(t_end) = rc.grid.t_end {
        let points = ((t_end / dt).round() as usize).max(1) + 1;
        let grid = TimeGrid::uniform(0.0, t_end, points)?;
        let traj = evolve_with(&emitter.model, &emitter.rho0, &grid, &opts)?;
        let report = GridReport { points, dt: t_end / (points - 1) as f64, t_end, automatic: false, cap_reached: false };
        return Ok((traj, report));
    }
    let tau = emitter.release_time;
    if !tau.is_finite() {
        return Err(Error::Config(
            "the drive never releases the source; set t_end_us for a fixed grid".into(),
        ));
    }
    let cap = RELEASE_TIME_CAP * tau;
    let chunk_steps = ((tau / dt).ceil() as usize).max(1);
    let mut samples = vec![0.0];
    let mut states = vec![emitter.rho0.clone()];
    let mut diagnostics = TrajectoryDiagnostics::default();
    let residual = |r: &DensityMatrix| r.expectation(&emitter.residual_op).map(|v| v.re);
    let mut stop = (residual(&states[0])? < rc.grid.residual_threshold).then_some(0);
    let mut k0 = 0usize;
    while stop.is_none() && samples[samples.len() - 1] < cap {
        let ts: Vec<f64> = (0..=chunk_steps).map(|k| (k0 + k) as f64 * dt).collect();
        let grid = TimeGrid::new(ts)?;
        let traj = evolve_with(&emitter.model, states.last().unwrap(), &grid, &opts)?;
        merge_diagnostics(&mut diagnostics, &traj.diagnostics);
        for (k, rho) in traj.states.into_iter().enumerate().skip(1) {
            samples.push(grid.samples()[k]);
            states.push(rho);
            if stop.is_none() && residual(states.last().unwrap())? < rc.grid.residual_threshold {
                stop = Some(states.len() - 1);
            }
        }
        k0 += chunk_steps;
    }
    let cap_reached = stop.is_none();
    // Keep at least two samples so the grid stays valid.
    let last = stop.unwrap_or(states.len() - 1).max(1);
    if states.len() < 2 {
        let grid = TimeGrid::new(vec![0.0, dt])?;
        let traj = evolve_with(&emitter.model, &emitter.rho0, &grid, &opts)?;
        merge_diagnostics(&mut diagnostics, &traj.diagnostics);
        samples.push(dt);
        states.push(traj.states[1].clone());
    }
    samples.truncate(last + 1);
    states.truncate(last + 1);
    if cap_reached {
        log::warn!(
            "automatic grid hit the cap of {RELEASE_TIME_CAP} release times ({cap:.2} us) before the \
             source emptied"
        );
    }
    let grid = TimeGrid::new(samples)?;
    let report = GridReport { points: grid.len(), dt, t_end: grid.end(), automatic: true, cap_reached };
    Ok((Trajectory { grid, states, diagnostics }, report))
}

/// Scalars describing one emission run.
#[derive(Clone, Debug, Serialize)]
pub struct EmitSummary {
    pub config_hash: String,
    pub initial_photons: f64,
    pub storage_dim: usize,
    pub kappa_per_us: f64,
    pub grid: GridReport,
    pub n_out: f64,
    pub residual: f64,
    pub n1: Option<f64>,
    pub n1_over_nout: Option<f64>,
    pub occupations: Vec<f64>,
    pub modes_above_0_1: usize,
    pub min_eigenvalue: f64,
    pub spectral_peaks_mhz: Vec<f64>,
    pub line_spacing_mhz: Option<f64>,
    pub max_trace_drift: f64,
    pub effective: Option<EffectiveSummary>,
    pub runtime_s: f64,
}

/// Effective-model quantities in MHz (frequency units, divided by 2 pi).
#[derive(Clone, Debug, Serialize)]
pub struct EffectiveSummary {
    pub chi_a_mhz: f64,
    pub chi_b_mhz: f64,
    pub chi_ab_mhz: f64,
    pub g_swap_mhz: f64,
    pub purcell_rate_per_us: f64,
    /// `(n - 1)(2 chi_a - chi_ab)` for the initial photon number.
    pub delta_e_mhz: f64,
    pub drive_delta: f64,
    pub drive_t0_us: f64,
}

pub struct EmitOutcome {
    pub emitter: Emitter,
    pub emission: Emission,
    pub modes: ModeDecomposition,
    pub spectrogram: Option<Spectrogram>,
    pub summary: EmitSummary,
}

fn effective_summary(e: &Emitter, kappa: f64) -> Result<Option<EffectiveSummary>> {
    let (Some(p), Some(d)) = (&e.params, &e.drive) else { return Ok(None) };
    let g = p.swap_scale * d.delta;
    let n = (e.initial_photons.round() as usize).max(1);
    Ok(Some(EffectiveSummary {
        chi_a_mhz: rad_per_us_to_mhz(p.chi_a),
        chi_b_mhz: rad_per_us_to_mhz(p.chi_b),
        chi_ab_mhz: rad_per_us_to_mhz(p.chi_ab),
        g_swap_mhz: rad_per_us_to_mhz(g),
        purcell_rate_per_us: purcell_rate(g, kappa)?,
        delta_e_mhz: rad_per_us_to_mhz(resonance_detuning(n, p.chi_a, p.chi_ab)?),
        drive_delta: d.delta,
        drive_t0_us: d.t0,
    }))
}

/// Evolve, regress, decompose, and (when configured) build the spectrogram.
pub fn run_emit(rc: &RunConfig, with_spectrum: bool) -> Result<EmitOutcome> {
    let clock = Instant::now();
    if with_spectrum && rc.spectrum.is_none() {
        return Err(Error::Config(
            "spectrum_freq_min_MHz, spectrum_freq_max_MHz, spectrum_freq_points and \
             spectrum_time_points are required to export a spectrogram"
                .into(),
        ));
    }
    let emitter = build_emitter(rc)?;
    let (trajectory, grid_report) = evolve_source(rc, &emitter)?;
    let correlation = correlation_from_trajectory(
        &emitter.model,
        &trajectory,
        &emitter.output_op,
        SolverOptions::default().tolerances,
    )?;
    let residual = trajectory.final_state().expectation(&emitter.residual_op)?.re;
    let emission = Emission { correlation, trajectory, residual: Some(residual) };
    let modes = decompose_modes(&emission.correlation, rc.max_modes)?;
    let n_out = emitted_photons(&emission.correlation);
    let ratio = mode_occupation_ratio(&modes).ok();

    let spectrogram = match (&rc.spectrum, with_spectrum) {
        (Some(s), true) => {
            let omegas = linspace(mhz_to_rad_per_us(s.freq_min), mhz_to_rad_per_us(s.freq_max), s.freq_points);
            let g = &emission.correlation.grid;
            let times = linspace(g.start(), g.end(), s.time_points);
            let opts = SpectrumOptions { lag_step: None, gaussian_window: s.window };
            Some(time_dependent_spectrum(&emission.correlation, &omegas, &times, &opts)?)
        }
        _ => None,
    };
    let (peaks, spacing) = match &spectrogram {
        Some(sp) => {
            let p: Vec<f64> = spectral_peaks(&sp.omegas, &sp.integrated(), PEAK_THRESHOLD)
                .into_iter()
                .map(rad_per_us_to_mhz)
                .collect();
            let sp = mean_line_spacing(&p);
            (p, sp)
        }
        None => (vec![], None),
    };

    let summary = EmitSummary {
        config_hash: rc.hash.clone(),
        initial_photons: emitter.initial_photons,
        storage_dim: emitter.storage_dim,
        kappa_per_us: rc.kappa,
        grid: grid_report,
        n_out,
        residual,
        n1: modes.occupations.first().copied(),
        n1_over_nout: ratio,
        occupations: modes.occupations.clone(),
        modes_above_0_1: modes.modes_above(0.1),
        min_eigenvalue: modes.min_eigenvalue,
        spectral_peaks_mhz: peaks,
        line_spacing_mhz: spacing,
        max_trace_drift: emission.trajectory.diagnostics.max_trace_drift,
        effective: effective_summary(&emitter, rc.kappa)?,
        runtime_s: clock.elapsed().as_secs_f64(),
    };
    Ok(EmitOutcome { emitter, emission, modes, spectrogram, summary })
}

/// Scalars describing one capture run.
#[derive(Clone, Debug, Serialize)]
pub struct CaptureSummary {
    pub emit: EmitSummary,
    pub captured_photons: f64,
    pub leftover: Vec<f64>,
    pub capture_end_us: f64,
    /// Cat fidelity for cat inputs, Fock population for Fock inputs.
    pub fidelity: f64,
    pub alpha_sq: Option<f64>,
    pub theta: Option<f64>,
    pub best_t0_us: Option<f64>,
    pub floor_activations: usize,
    pub cap_activations: usize,
    pub runtime_s: f64,
}

pub struct CaptureOutcome {
    pub emit: EmitOutcome,
    pub result: CaptureResult,
    pub fit: Option<CatFitReport>,
    pub summary: CaptureSummary,
    pub optimization: Option<DriveRateOptimum>,
}

impl CaptureOutcome {
    /// Reduced initial state of the storage oscillator.
    pub fn initial_storage(&self) -> Result<DensityMatrix> {
        let rho0 = &self.emit.emitter.rho0;
        if rho0.space().num_subsystems() == 1 {
            Ok(rho0.clone())
        } else {
            partial_trace(rho0, STORAGE_SLOT)
        }
    }
}

fn capture_once(rc: &RunConfig) -> Result<CaptureOutcome> {
    let clock = Instant::now();
    let emit = run_emit(rc, false)?;
    let grid = &emit.emission.correlation.grid;
    let receiver_dim = rc.capture.receiver_dim.unwrap_or(emit.emitter.storage_dim);
    let (model, end, coupling) = match emit.modes.modes.first() {
        Some(v1) => {
            let c = ReceiverCoupling::new(grid, v1.clone(), rc.kappa)?;
            let end = c.capture_end(rc.kappa).min(grid.end());
            (cascade_model(&emit.emitter.model, &c, receiver_dim)?, end, Some(c))
        }
        None => {
            // Nothing was emitted: the receiver is left uncoupled.
            let zero = ComplexControl::constant(C64::new(0.0, 0.0));
            let m = cascade_model_with(&emit.emitter.model, zero, receiver_dim, ExchangeSign::default())?;
            (m, grid.end(), None)
        }
    };
    let rho0 = emit.emitter.rho0.tensor(&fock_state(receiver_dim, 0)?.to_density())?;
    let mut result = capture(&model, &rho0, &capture_grid(grid, end)?)?;
    if let Some(c) = &coupling {
        result.floor_activations = c.floor_activations;
        result.cap_activations = c.cap_activations;
    }
    let (fit, fidelity) = match (rc.initial, rc.initial.family()) {
        (InitialState::Fock(n), _) => {
            let f = if n < receiver_dim { fock_population_fidelity(&result.rho_d, n)? } else { 0.0 };
            (None, f)
        }
        (_, Some(family)) => {
            let a = rc.initial.alpha().unwrap();
            let opts = CatFitOptions {
                alpha_steps: rc.capture.alpha_steps,
                theta_steps: rc.capture.theta_steps,
                ..Default::default()
            };
            let r = best_cat_fit_with(&result.rho_d, family, (0.5 * a, 1.2 * a), &opts)?;
            let f = r.fidelity;
            (Some(r), f)
        }
        _ => unreachable!(),
    };
    let summary = CaptureSummary {
        emit: emit.summary.clone(),
        captured_photons: result.captured_photons,
        leftover: result.leftover.clone(),
        capture_end_us: end,
        fidelity,
        alpha_sq: fit.as_ref().map(|r| r.alpha_sq),
        theta: fit.as_ref().map(|r| r.theta),
        best_t0_us: None,
        floor_activations: result.floor_activations,
        cap_activations: result.cap_activations,
        runtime_s: clock.elapsed().as_secs_f64(),
    };
    Ok(CaptureOutcome { emit, result, fit, summary, optimization: None })
}

/// Emission followed by capture of the dominant mode and fidelity analysis.
/// With `optimize_t0` the drive turn-on time is chosen from a log grid.
pub fn run_capture(rc: &RunConfig) -> Result<CaptureOutcome> {
    if !rc.capture.optimize_t0 {
        return capture_once(rc);
    }
    if rc.initial.family().is_none() {
        return Err(Error::Config("optimize_t0 needs a cat initial state".into()));
    }
    rc.with_drive_t0(1.0)?;
    let clock = Instant::now();
    let candidates = log_candidates(rc.capture.t0_min, rc.capture.t0_max, rc.capture.t0_per_decade)?;
    let outcomes: Mutex<BTreeMap<usize, CaptureOutcome>> = Mutex::new(BTreeMap::new());
    let opt = optimize_drive_rate(&candidates, |t0| {
        let out = capture_once(&rc.with_drive_t0(t0)?)?;
        let fit = out.fit.clone().expect("cat inputs always produce a fit");
        let idx = candidates.iter().position(|&c| c == t0).unwrap();
        outcomes.lock().unwrap().insert(idx, out);
        Ok(fit)
    })?;
    let idx = candidates.iter().position(|&c| c == opt.best_t0).unwrap();
    let mut best = outcomes.into_inner().unwrap().remove(&idx).unwrap();
    best.summary.best_t0_us = Some(opt.best_t0);
    best.summary.runtime_s = clock.elapsed().as_secs_f64();
    best.optimization = Some(opt);
    Ok(best)
}
