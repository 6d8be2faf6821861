use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::commands::{cmd_capture, cmd_emit, derive_report, REFERENCE_DRIVE_DELTA};
use super::config::{RunConfig, Scenario, SweepMode, SweepSpec, VERSION};
use super::export::{ensure_dir, read_json_metadata, write_atomic, write_csv, write_json, Metadata};
use super::pipeline::{CaptureSummary, EmitSummary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub dir: String,
    pub config_hash: String,
    pub status: PointStatus,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepManifest {
    pub version: String,
    pub config_hash: String,
    pub key: String,
    pub mode: SweepMode,
    pub points: Vec<SweepPoint>,
}

impl SweepManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// Summary scalars of one sweep point; columns of the aggregated CSV.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_out: Option<f64>,
    pub n1_over_nout: Option<f64>,
    pub modes_above_0_1: Option<f64>,
    pub fidelity: Option<f64>,
    pub alpha_sq: Option<f64>,
    pub theta: Option<f64>,
    pub chi_a_mhz: Option<f64>,
    pub chi_b_mhz: Option<f64>,
    pub chi_ab_mhz: Option<f64>,
    pub g_swap_mhz: Option<f64>,
    pub delta_e_mhz: Option<f64>,
    pub purcell_rate_per_us: Option<f64>,
}

const ROW_COLUMNS: [&str; 12] = [
    "n_out",
    "n1_over_nout",
    "modes_above_0_1",
    "fidelity",
    "alpha_sq",
    "theta",
    "chi_a_MHz",
    "chi_b_MHz",
    "chi_ab_MHz",
    "g_swap_MHz",
    "delta_E_MHz",
    "purcell_rate_per_us",
];

impl SweepRow {
    fn cells(&self) -> [Option<f64>; 12] {
        [
            self.n_out,
            self.n1_over_nout,
            self.modes_above_0_1,
            self.fidelity,
            self.alpha_sq,
            self.theta,
            self.chi_a_mhz,
            self.chi_b_mhz,
            self.chi_ab_mhz,
            self.g_swap_mhz,
            self.delta_e_mhz,
            self.purcell_rate_per_us,
        ]
    }

    fn from_emit(s: &EmitSummary) -> Self {
        let e = s.effective.as_ref();
        Self {
            n_out: Some(s.n_out),
            n1_over_nout: s.n1_over_nout,
            modes_above_0_1: Some(s.modes_above_0_1 as f64),
            chi_a_mhz: e.map(|e| e.chi_a_mhz),
            chi_b_mhz: e.map(|e| e.chi_b_mhz),
            chi_ab_mhz: e.map(|e| e.chi_ab_mhz),
            g_swap_mhz: e.map(|e| e.g_swap_mhz),
            delta_e_mhz: e.map(|e| e.delta_e_mhz),
            purcell_rate_per_us: e.map(|e| e.purcell_rate_per_us),
            ..Default::default()
        }
    }

    fn from_capture(s: &CaptureSummary) -> Self {
        Self {
            fidelity: Some(s.fidelity),
            alpha_sq: s.alpha_sq,
            theta: s.theta,
            ..Self::from_emit(&s.emit)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PointSummary {
    value: f64,
    row: SweepRow,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub simulated: usize,
    pub skipped: usize,
    pub failed: usize,
    pub csv: PathBuf,
}

fn point_dir_name(key: &str, value: f64) -> String {
    let v = format!("{value}").replace(['/', '\\', ' '], "_");
    format!("{key}={v}")
}

fn run_point(rc: &RunConfig, mode: SweepMode, dir: &Path) -> Result<SweepRow> {
    match mode {
        SweepMode::Derive => {
            let Scenario::Circuit { netlist, drive, .. } = &rc.scenario else {
                return Err(Error::Config("derive sweeps need the circuit scenario".into()));
            };
            let delta = if drive.delta > 0.0 { drive.delta } else { REFERENCE_DRIVE_DELTA };
            let r = derive_report(netlist, rc.kappa, delta)?;
            ensure_dir(dir)?;
            write_json(&dir.join("derive.json"), &Metadata::new(&rc.hash), &r)?;
            Ok(SweepRow {
                chi_a_mhz: Some(r.chi_a_mhz * rc.kerr_scale),
                chi_b_mhz: Some(r.chi_b_mhz * rc.kerr_scale),
                chi_ab_mhz: Some(r.chi_ab_mhz * rc.kerr_scale),
                g_swap_mhz: Some(r.g_swap_mhz),
                delta_e_mhz: Some(2.0 * (2.0 * r.chi_a_mhz - r.chi_ab_mhz) * rc.kerr_scale),
                purcell_rate_per_us: Some(r.purcell_rate_per_us),
                ..Default::default()
            })
        }
        SweepMode::Emit => Ok(SweepRow::from_emit(&cmd_emit(rc, dir)?)),
        SweepMode::Capture => Ok(SweepRow::from_capture(&cmd_capture(rc, dir)?)),
    }
}

fn fresh_manifest(rc: &RunConfig, spec: &SweepSpec) -> Result<SweepManifest> {
    let points = spec
        .values
        .iter()
        .map(|&v| {
            Ok(SweepPoint {
                value: v,
                dir: point_dir_name(&spec.key, v),
                config_hash: rc.with_override(&spec.key, v)?.hash,
                status: PointStatus::Pending,
                reason: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepManifest {
        version: VERSION.to_string(),
        config_hash: rc.hash.clone(),
        key: spec.key.clone(),
        mode: spec.mode,
        points,
    })
}

/// Runs (or resumes) the sweep described in the config, then writes the
/// aggregated `sweep.csv`. Points already done are not recomputed.
pub fn run_sweep(rc: &RunConfig, out: &Path, resume: bool, workers: usize) -> Result<SweepReport> {
    let spec = rc
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs `sweep_key` and `sweep_values`".into()))?;
    ensure_dir(out)?;
    let manifest_path = out.join("manifest.json");
    let mut manifest = if manifest_path.exists() {
        if !resume {
            return Err(Error::Manifest(format!(
                "{} already exists; pass --resume to continue it",
                manifest_path.display()
            )));
        }
        let m = SweepManifest::read(&manifest_path)?;
        if m.config_hash != rc.hash {
            return Err(Error::Manifest(format!(
                "config hash {} does not match the manifest's {}; refusing to resume",
                rc.hash, m.config_hash
            )));
        }
        m
    } else {
        let m = fresh_manifest(rc, spec)?;
        m.write(&manifest_path)?;
        m
    };
    // Statuses must agree with what is on disk.
    for p in &mut manifest.points {
        let summary = out.join(&p.dir).join("point.json");
        if p.status == PointStatus::Done && !summary.is_file() {
            log::warn!("point {} is marked done but has no results; rerunning", p.dir);
            p.status = PointStatus::Pending;
        }
    }
    manifest.write(&manifest_path)?;

    let todo: Vec<usize> = (0..manifest.points.len())
        .filter(|&k| manifest.points[k].status != PointStatus::Done)
        .collect();
    let skipped = manifest.points.len() - todo.len();
    let shared = Mutex::new(manifest);
    let failed = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        todo.par_iter().for_each(|&k| {
            let (value, dir, hash) = {
                let m = shared.lock().unwrap();
                let p = &m.points[k];
                (p.value, out.join(&p.dir), p.config_hash.clone())
            };
            let result = rc.with_override(&spec.key, value).and_then(|prc| {
                let row = run_point(&prc, spec.mode, &dir)?;
                let meta = Metadata::new(&hash);
                write_json(&dir.join("point.json"), &meta, &PointSummary { value, row })?;
                Ok(())
            });
            let mut m = shared.lock().unwrap();
            match result {
                Ok(()) => {
                    m.points[k].status = PointStatus::Done;
                    m.points[k].reason = None;
                }
                Err(e) => {
                    log::error!("sweep point {}={value} failed: {e}", spec.key);
                    failed.fetch_add(1, Ordering::Relaxed);
                    m.points[k].status = PointStatus::Failed;
                    m.points[k].reason = Some(e.to_string());
                }
            }
            if let Err(e) = m.write(&manifest_path) {
                log::error!("could not update the manifest: {e}");
            }
        })
    });
    let manifest = shared.into_inner().unwrap();
    let csv = aggregate(&manifest, out)?;
    Ok(SweepReport {
        simulated: todo.len(),
        skipped,
        failed: failed.into_inner(),
        csv,
    })
}

/// Writes `sweep.csv`, one row per point in manifest order.
pub fn aggregate(manifest: &SweepManifest, out: &Path) -> Result<PathBuf> {
    let mut header = vec![manifest.key.clone(), "status".to_string()];
    header.extend(ROW_COLUMNS.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for p in &manifest.points {
        let mut row = vec![format!("{}", p.value), format!("{:?}", p.status).to_lowercase()];
        let cells = if p.status == PointStatus::Done {
            let path = out.join(&p.dir).join("point.json");
            let meta = read_json_metadata(&path)?;
            if meta.config_hash != p.config_hash {
                return Err(Error::DataIntegrity(format!(
                    "{} was produced by config {} but the manifest expects {}",
                    path.display(),
                    meta.config_hash,
                    p.config_hash
                )));
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let s: PointSummary = serde_json::from_str(&text)?;
            s.row.cells()
        } else {
            [None; 12]
        };
        row.extend(cells.iter().map(|c| c.map(|x| format!("{x:e}")).unwrap_or_default()));
        rows.push(row);
    }
    let path = out.join("sweep.csv");
    write_csv(&path, &Metadata::new(&manifest.config_hash), &header, rows)?;
    Ok(path)
}
