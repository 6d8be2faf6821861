use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::circuit::{dressed_modes, effective_params, CircuitNetlist, EffectiveParams};
use crate::error::{Error, Result};
use crate::flat::{FlatConfig, Scalar};
use crate::units::mhz_to_rad_per_us;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every key a run config may contain.
pub const RUN_KEYS: [&str; 41] = [
    "scenario",
    "initial_state",
    "fock_n",
    "alpha",
    "kappa_per_us",
    "omega0_MHz",
    "chi_MHz",
    "chirp_chi_MHz",
    "chi_a_MHz",
    "chi_b_MHz",
    "chi_ab_MHz",
    "swap_scale_MHz",
    "stark_scale_a_MHz",
    "stark_scale_b_MHz",
    "netlist",
    "kerr_scale",
    "drive_delta",
    "drive_t0_us",
    "dt_us",
    "t_end_us",
    "residual_threshold",
    "storage_dim",
    "leakage_dim",
    "max_modes",
    "spectrum_freq_min_MHz",
    "spectrum_freq_max_MHz",
    "spectrum_freq_points",
    "spectrum_time_points",
    "spectrum_window_us",
    "receiver_dim",
    "fit_alpha_steps",
    "fit_theta_steps",
    "optimize_t0",
    "t0_min_us",
    "t0_max_us",
    "t0_per_decade",
    "wigner_points",
    "output_dir",
    "sweep_key",
    "sweep_values",
    "sweep_mode",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriveSpec {
    pub delta: f64,
    /// us
    pub t0: f64,
}

/// The emitter being simulated. Frequencies are in rad/us.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Single Kerr resonator, optionally with a chirped frequency.
    Toy { omega0: f64, chi: f64, chirp_chi: Option<f64> },
    Effective { params: EffectiveParams, drive: DriveSpec },
    Circuit { netlist_path: PathBuf, netlist: CircuitNetlist, drive: DriveSpec },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialState {
    Fock(usize),
    Tccs(f64),
    Fccs(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub dt: f64,
    /// Fixed end time; automatic when absent.
    pub t_end: Option<f64>,
    pub residual_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSpec {
    /// MHz
    pub freq_min: f64,
    pub freq_max: f64,
    pub freq_points: usize,
    pub time_points: usize,
    pub window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaptureSpec {
    pub receiver_dim: Option<usize>,
    pub alpha_steps: usize,
    pub theta_steps: usize,
    pub optimize_t0: bool,
    pub t0_min: f64,
    pub t0_max: f64,
    pub t0_per_decade: usize,
    pub wigner_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Derive,
    Emit,
    Capture,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<f64>,
    pub mode: SweepMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub kappa: f64,
    pub kerr_scale: f64,
    pub initial: InitialState,
    pub storage_dim: Option<usize>,
    pub leakage_dim: usize,
    pub grid: GridSpec,
    pub max_modes: usize,
    pub spectrum: Option<SpectrumSpec>,
    pub capture: CaptureSpec,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
    /// sha256 of the canonical key/value form, netlist included.
    pub hash: String,
    #[serde(skip)]
    source: FlatConfig,
}

fn positive(cfg: &FlatConfig, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg.line_error(key, format!("`{key}` must be positive, got {v}")))
    }
}

fn opt_positive(cfg: &FlatConfig, key: &str) -> Result<Option<f64>> {
    cfg.get_f64(key)?.map(|v| positive(cfg, key, v)).transpose()
}

fn mhz(cfg: &FlatConfig, key: &str) -> Result<f64> {
    Ok(mhz_to_rad_per_us(cfg.f64(key)?))
}

fn drive(cfg: &FlatConfig) -> Result<DriveSpec> {
    let delta = cfg.f64("drive_delta")?;
    if !delta.is_finite() || delta < 0.0 {
        return Err(cfg.line_error("drive_delta", "`drive_delta` must be non-negative"));
    }
    let t0 = positive(cfg, "drive_t0_us", cfg.f64("drive_t0_us")?)?;
    Ok(DriveSpec { delta, t0 })
}

fn parse_values(cfg: &FlatConfig, text: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| cfg.line_error("sweep_values", format!("`{s}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(cfg.line_error("sweep_values", "sweep value list is empty"));
    }
    Ok(values)
}

/// sha256 over the canonical JSON of `map`.
pub fn hash_canonical(map: &BTreeMap<String, Scalar>) -> String {
    let json = serde_json::to_string(map).expect("scalar maps always serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        Self::from_flat(FlatConfig::read(path)?)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        Self::from_flat(FlatConfig::parse(path, text)?)
    }

    pub fn from_flat(cfg: FlatConfig) -> Result<Self> {
        cfg.check_known(&RUN_KEYS)?;
        let base_dir = cfg.path().parent().map(Path::to_path_buf).unwrap_or_default();
        let kappa = positive(&cfg, "kappa_per_us", cfg.f64("kappa_per_us")?)?;
        let kerr_scale = cfg.get_f64("kerr_scale")?.unwrap_or(1.0);
        if !kerr_scale.is_finite() {
            return Err(cfg.line_error("kerr_scale", "`kerr_scale` must be finite"));
        }

        let scenario = match cfg.str("scenario")? {
            "toy" => Scenario::Toy {
                omega0: mhz(&cfg, "omega0_MHz")?,
                chi: mhz(&cfg, "chi_MHz")?,
                chirp_chi: cfg.get_f64("chirp_chi_MHz")?.map(mhz_to_rad_per_us),
            },
            "effective" => Scenario::Effective {
                params: EffectiveParams {
                    chi_a: mhz(&cfg, "chi_a_MHz")?,
                    chi_b: mhz(&cfg, "chi_b_MHz")?,
                    chi_ab: mhz(&cfg, "chi_ab_MHz")?,
                    swap_scale: mhz(&cfg, "swap_scale_MHz")?,
                    stark_scale_a: mhz(&cfg, "stark_scale_a_MHz")?,
                    stark_scale_b: mhz(&cfg, "stark_scale_b_MHz")?,
                    drive_frequency: 0.0,
                },
                drive: drive(&cfg)?,
            },
            "circuit" => {
                let rel = cfg.str("netlist")?;
                let netlist_path = base_dir.join(rel);
                if !netlist_path.is_file() {
                    return Err(cfg.line_error(
                        "netlist",
                        format!("netlist file {} does not exist", netlist_path.display()),
                    ));
                }
                Scenario::Circuit {
                    netlist: CircuitNetlist::read(&netlist_path)?,
                    netlist_path,
                    drive: drive(&cfg)?,
                }
            }
            other => {
                return Err(cfg.line_error(
                    "scenario",
                    format!("unknown scenario `{other}` (expected toy, effective or circuit)"),
                ))
            }
        };

        let initial = match cfg.str("initial_state")? {
            "fock" => InitialState::Fock(cfg.usize("fock_n")?),
            "tccs" => InitialState::Tccs(positive(&cfg, "alpha", cfg.f64("alpha")?)?),
            "fccs" => InitialState::Fccs(positive(&cfg, "alpha", cfg.f64("alpha")?)?),
            other => {
                return Err(cfg.line_error(
                    "initial_state",
                    format!("unknown initial state `{other}` (expected fock, tccs or fccs)"),
                ))
            }
        };

        let grid = GridSpec {
            dt: positive(&cfg, "dt_us", cfg.f64("dt_us")?)?,
            t_end: opt_positive(&cfg, "t_end_us")?,
            residual_threshold: opt_positive(&cfg, "residual_threshold")?.unwrap_or(1e-3),
        };

        let spectrum = match cfg.get_f64("spectrum_freq_min_MHz")? {
            None => None,
            Some(freq_min) => {
                let freq_max = cfg.f64("spectrum_freq_max_MHz")?;
                if !(freq_max > freq_min) {
                    return Err(cfg.line_error(
                        "spectrum_freq_max_MHz",
                        "spectrum frequency range is empty",
                    ));
                }
                Some(SpectrumSpec {
                    freq_min,
                    freq_max,
                    freq_points: cfg.usize("spectrum_freq_points")?.max(2),
                    time_points: cfg.usize("spectrum_time_points")?.max(2),
                    window: opt_positive(&cfg, "spectrum_window_us")?,
                })
            }
        };

        let capture = CaptureSpec {
            receiver_dim: cfg.get_usize("receiver_dim")?,
            alpha_steps: cfg.get_usize("fit_alpha_steps")?.unwrap_or(61),
            theta_steps: cfg.get_usize("fit_theta_steps")?.unwrap_or(64),
            optimize_t0: cfg.get_bool("optimize_t0")?.unwrap_or(false),
            t0_min: opt_positive(&cfg, "t0_min_us")?.unwrap_or(0.5),
            t0_max: opt_positive(&cfg, "t0_max_us")?.unwrap_or(20.0),
            t0_per_decade: cfg.get_usize("t0_per_decade")?.unwrap_or(8),
            wigner_points: cfg.get_usize("wigner_points")?.unwrap_or(81),
        };

        let sweep = match cfg.get_str("sweep_key")? {
            None => None,
            Some(key) => {
                let mode = match cfg.get_str("sweep_mode")?.unwrap_or("emit") {
                    "derive" => SweepMode::Derive,
                    "emit" => SweepMode::Emit,
                    "capture" => SweepMode::Capture,
                    other => {
                        return Err(cfg.line_error("sweep_mode", format!("unknown sweep mode `{other}`")))
                    }
                };
                Some(SweepSpec {
                    key: key.to_string(),
                    values: parse_values(&cfg, cfg.str("sweep_values")?)?,
                    mode,
                })
            }
        };

        let mut canonical = cfg.canonical();
        if let Scenario::Circuit { netlist, .. } = &scenario {
            for k in crate::circuit::NETLIST_KEYS {
                canonical.insert(format!("netlist.{k}"), Scalar::Float(netlist.get(k).unwrap()));
            }
        }
        let hash = hash_canonical(&canonical);

        let rc = RunConfig {
            scenario,
            kappa,
            kerr_scale,
            initial,
            storage_dim: cfg.get_usize("storage_dim")?,
            leakage_dim: cfg.get_usize("leakage_dim")?.unwrap_or(4),
            grid,
            max_modes: cfg.usize("max_modes")?,
            spectrum,
            capture,
            output_dir: cfg.get_str("output_dir")?.map(|s| base_dir.join(s)),
            sweep,
            hash,
            source: cfg,
        };
        rc.check_dims()?;
        Ok(rc)
    }

    fn check_dims(&self) -> Result<()> {
        for (key, d) in [("storage_dim", self.storage_dim), ("receiver_dim", self.capture.receiver_dim)] {
            if d == Some(0) {
                return Err(self.source.line_error(key, format!("`{key}` must be at least 1")));
            }
        }
        if self.leakage_dim < 2 {
            return Err(self.source.line_error("leakage_dim", "`leakage_dim` must be at least 2"));
        }
        if self.max_modes == 0 {
            return Err(self.source.line_error("max_modes", "`max_modes` must be at least 1"));
        }
        Ok(())
    }

    pub fn source(&self) -> &FlatConfig {
        &self.source
    }

    /// Effective parameters for the effective and circuit scenarios, with
    /// `kerr_scale` applied.
    pub fn effective_params(&self) -> Result<Option<(EffectiveParams, DriveSpec)>> {
        Ok(match &self.scenario {
            Scenario::Toy { .. } => None,
            Scenario::Effective { params, drive } => Some((params.with_kerr_scaled(self.kerr_scale), *drive)),
            Scenario::Circuit { netlist, drive, .. } => {
                let p = effective_params(&dressed_modes(netlist)?, netlist);
                Some((p.with_kerr_scaled(self.kerr_scale), *drive))
            }
        })
    }

    /// Copy of the config with `key` set to `value`. Netlist keys of a
    /// circuit scenario are applied to the netlist.
    pub fn with_override(&self, key: &str, value: f64) -> Result<RunConfig> {
        let mut canonical = self.source.canonical();
        if let Scenario::Circuit { netlist, .. } = &self.scenario {
            if netlist.get(key).is_some() {
                let mut rc = self.clone();
                let mut n = netlist.clone();
                n.set(key, value)?;
                n.validate()?;
                if let Scenario::Circuit { netlist, .. } = &mut rc.scenario {
                    *netlist = n;
                }
                let mut c = canonical;
                for k in crate::circuit::NETLIST_KEYS {
                    let v = if k == key { value } else { netlist.get(k).unwrap() };
                    c.insert(format!("netlist.{k}"), Scalar::Float(v));
                }
                rc.hash = hash_canonical(&c);
                return Ok(rc);
            }
        }
        if !RUN_KEYS.contains(&key) || key.starts_with("sweep_") {
            return Err(Error::Config(format!("`{key}` cannot be swept")));
        }
        let mut text = String::new();
        canonical.insert(
            key.to_string(),
            if value.fract() == 0.0 && is_integer_key(key) {
                Scalar::Int(value as i64)
            } else {
                Scalar::Float(value)
            },
        );
        for (k, v) in &canonical {
            let rendered = match v {
                Scalar::Float(x) => format!("{x:?}"),
                Scalar::Int(i) => i.to_string(),
                Scalar::Bool(b) => b.to_string(),
                Scalar::Text(s) => toml::Value::String(s.clone()).to_string(),
            };
            text.push_str(&format!("{k} = {rendered}\n"));
        }
        RunConfig::parse(self.source.path(), &text)
    }
}

fn is_integer_key(key: &str) -> bool {
    matches!(
        key,
        "fock_n"
            | "storage_dim"
            | "leakage_dim"
            | "max_modes"
            | "spectrum_freq_points"
            | "spectrum_time_points"
            | "receiver_dim"
            | "fit_alpha_steps"
            | "fit_theta_steps"
            | "t0_per_decade"
            | "wigner_points"
    )
}
