use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::export::{
    ensure_dir, write_correlation, write_json, write_mode_occupations, write_modes, write_spectrogram,
    write_wigner, Metadata,
};
use super::pipeline::{run_capture, run_emit, CaptureSummary, EmitSummary};
use crate::circuit::{dressed_modes, effective_params, purcell_rate, CircuitNetlist, DressedModes};
use crate::error::{Error, Result};
use crate::units::rad_per_us_to_mhz;

/// Drive amplitude of the calibrated reference operating point.
pub const REFERENCE_DRIVE_DELTA: f64 = 0.0142;

/// Derived circuit quantities in user units: GHz for mode frequencies, MHz
/// (frequency, not angular) for couplings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeriveReport {
    pub netlist: CircuitNetlist,
    pub storage_ghz: f64,
    pub coupler_ghz: f64,
    pub leakage_ghz: f64,
    pub lambda_a: f64,
    pub lambda_c: f64,
    pub lambda_b: f64,
    pub lambda_bar: f64,
    pub eigen_residual: f64,
    pub chi_a_mhz: f64,
    pub chi_b_mhz: f64,
    pub chi_ab_mhz: f64,
    /// `chi_ab^2 / (16 chi_a chi_b)`, 1 up to rounding.
    pub kerr_identity_ratio: f64,
    pub swap_scale_mhz: f64,
    pub stark_scale_a_mhz: f64,
    pub stark_scale_b_mhz: f64,
    pub drive_frequency_mhz: f64,
    pub kappa_per_us: f64,
    pub drive_delta: f64,
    pub g_swap_mhz: f64,
    pub purcell_rate_per_us: f64,
}

pub fn derive_report(netlist: &CircuitNetlist, kappa: f64, drive_delta: f64) -> Result<DeriveReport> {
    let m: DressedModes = dressed_modes(netlist)?;
    let p = effective_params(&m, netlist);
    let ghz = |w: f64| rad_per_us_to_mhz(w) / 1e3;
    let g = p.swap_scale * drive_delta;
    let denom = 16.0 * p.chi_a * p.chi_b;
    Ok(DeriveReport {
        netlist: netlist.clone(),
        storage_ghz: ghz(m.omega_a),
        coupler_ghz: ghz(m.omega_c),
        leakage_ghz: ghz(m.omega_b),
        lambda_a: m.lambda_a,
        lambda_c: m.lambda_c,
        lambda_b: m.lambda_b,
        lambda_bar: m.lambda_bar,
        eigen_residual: m.eigen_residual,
        chi_a_mhz: rad_per_us_to_mhz(p.chi_a),
        chi_b_mhz: rad_per_us_to_mhz(p.chi_b),
        chi_ab_mhz: rad_per_us_to_mhz(p.chi_ab),
        kerr_identity_ratio: if denom != 0.0 { p.chi_ab * p.chi_ab / denom } else { f64::NAN },
        swap_scale_mhz: rad_per_us_to_mhz(p.swap_scale),
        stark_scale_a_mhz: rad_per_us_to_mhz(p.stark_scale_a),
        stark_scale_b_mhz: rad_per_us_to_mhz(p.stark_scale_b),
        drive_frequency_mhz: rad_per_us_to_mhz(p.drive_frequency),
        kappa_per_us: kappa,
        drive_delta,
        g_swap_mhz: rad_per_us_to_mhz(g),
        purcell_rate_per_us: purcell_rate(g, kappa)?,
    })
}

/// Reads a netlist and writes `derive.json` into `out` (when given).
pub fn cmd_derive(netlist_path: &Path, kappa: f64, drive_delta: f64, out: Option<&Path>) -> Result<DeriveReport> {
    let netlist = CircuitNetlist::read(netlist_path)?;
    let report = derive_report(&netlist, kappa, drive_delta)?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let text = fs::read_to_string(netlist_path).map_err(|e| Error::io(netlist_path, e))?;
        let hash = super::config::hash_canonical(
            &crate::flat::FlatConfig::parse(netlist_path, &text)?.canonical(),
        );
        write_json(&dir.join("derive.json"), &Metadata::new(&hash), &report)?;
    }
    Ok(report)
}

/// Output directory: the explicit one, else the config's, else `./out`.
pub fn output_dir(rc: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| rc.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn mark_failed(dir: &Path, err: &Error) {
    let _ = fs::write(dir.join("FAILED"), format!("{err}\n"));
}

fn clear_failed(dir: &Path) {
    let _ = fs::remove_file(dir.join("FAILED"));
}

/// Emission run: correlation, modes, summary and (when the spectrum keys
/// are set) spectrogram files.
pub fn cmd_emit(rc: &RunConfig, dir: &Path) -> Result<EmitSummary> {
    ensure_dir(dir)?;
    clear_failed(dir);
    let result = (|| {
        let out = run_emit(rc, rc.spectrum.is_some())?;
        let meta = Metadata::new(&rc.hash);
        write_correlation(&dir.join("correlation.csv"), &meta, &out.emission.correlation)?;
        write_modes(&dir.join("modes.csv"), &meta, &out.modes)?;
        write_mode_occupations(&dir.join("modes.json"), &meta, &out.modes)?;
        if let Some(sp) = &out.spectrogram {
            write_spectrogram(&dir.join("spectrogram.csv"), &meta, sp)?;
        }
        write_json(&dir.join("summary.json"), &meta, &out.summary)?;
        Ok(out.summary)
    })();
    if let Err(e) = &result {
        mark_failed(dir, e);
    }
    result
}

/// Capture run: capture result, cat fit, Wigner grids and summary files.
pub fn cmd_capture(rc: &RunConfig, dir: &Path) -> Result<CaptureSummary> {
    ensure_dir(dir)?;
    clear_failed(dir);
    let result = (|| {
        let out = run_capture(rc)?;
        let meta = Metadata::new(&rc.hash);
        write_json(&dir.join("capture.json"), &meta, &out.result)?;
        if let Some(fit) = &out.fit {
            write_json(&dir.join("catfit.json"), &meta, fit)?;
        }
        if let Some(opt) = &out.optimization {
            write_json(&dir.join("optimization.json"), &meta, opt)?;
        }
        let points = rc.capture.wigner_points;
        write_wigner(&dir.join("wigner_initial.csv"), &meta, &out.initial_storage()?, points)?;
        write_wigner(&dir.join("wigner_captured.csv"), &meta, &out.result.rho_d, points)?;
        write_modes(&dir.join("modes.csv"), &meta, &out.emit.modes)?;
        write_json(&dir.join("summary.json"), &meta, &out.summary)?;
        Ok(out.summary)
    })();
    if let Err(e) = &result {
        mark_failed(dir, e);
    }
    result
}
