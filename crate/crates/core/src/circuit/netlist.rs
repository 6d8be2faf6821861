use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::FlatConfig;

pub const NETLIST_KEYS: [&str; 10] = [
    "C_a_fF", "C_b_fF", "C_c_fF", "C_ac_fF", "C_bc_fF", "C_bL_fF", "L_a_nH", "L_b_nH", "E_J_GHz",
    "phi_dc_rad",
];

/// Lumped-element emitter: storage LC (a), flux-tunable coupler (c) and
/// leakage LC (b) loaded by the line capacitance `C_bL`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitNetlist {
    #[serde(rename = "C_a_fF")]
    pub c_a: f64,
    #[serde(rename = "C_b_fF")]
    pub c_b: f64,
    #[serde(rename = "C_c_fF")]
    pub c_c: f64,
    #[serde(rename = "C_ac_fF")]
    pub c_ac: f64,
    #[serde(rename = "C_bc_fF")]
    pub c_bc: f64,
    #[serde(rename = "C_bL_fF")]
    pub c_bl: f64,
    #[serde(rename = "L_a_nH")]
    pub l_a: f64,
    #[serde(rename = "L_b_nH")]
    pub l_b: f64,
    /// `E_J / h` of one SQUID junction.
    #[serde(rename = "E_J_GHz")]
    pub e_j_ghz: f64,
    #[serde(rename = "phi_dc_rad")]
    pub phi_dc: f64,
}

impl CircuitNetlist {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("C_a_fF", self.c_a),
            ("C_b_fF", self.c_b),
            ("C_c_fF", self.c_c),
            ("L_a_nH", self.l_a),
            ("L_b_nH", self.l_b),
            ("E_J_GHz", self.e_j_ghz),
        ];
        for (k, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        for (k, v) in [("C_ac_fF", self.c_ac), ("C_bc_fF", self.c_bc), ("C_bL_fF", self.c_bl)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{k} must be non-negative, got {v}")));
            }
        }
        if !self.phi_dc.is_finite() {
            return Err(Error::Config("phi_dc_rad must be finite".into()));
        }
        let smallest = self.c_a.min(self.c_b).min(self.c_c);
        if self.c_ac >= smallest || self.c_bc >= smallest {
            log::warn!(
                "coupling capacitances (C_ac = {}, C_bc = {}) are not small against {smallest} fF; \
                 the weak-coupling picture may not hold",
                self.c_ac,
                self.c_bc
            );
        }
        Ok(())
    }

    pub fn from_flat(cfg: &FlatConfig) -> Result<Self> {
        cfg.check_known(&NETLIST_KEYS)?;
        let n = Self {
            c_a: cfg.f64("C_a_fF")?,
            c_b: cfg.f64("C_b_fF")?,
            c_c: cfg.f64("C_c_fF")?,
            c_ac: cfg.f64("C_ac_fF")?,
            c_bc: cfg.f64("C_bc_fF")?,
            c_bl: cfg.f64("C_bL_fF")?,
            l_a: cfg.f64("L_a_nH")?,
            l_b: cfg.f64("L_b_nH")?,
            e_j_ghz: cfg.f64("E_J_GHz")?,
            phi_dc: cfg.f64("phi_dc_rad")?,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_flat(&FlatConfig::read(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_flat(&FlatConfig::parse(Path::new("<netlist>"), text)?)
    }

    /// Same file format as `read`.
    pub fn to_text(&self) -> String {
        NETLIST_KEYS
            .iter()
            .map(|k| format!("{k} = {:?}\n", self.get(k).unwrap()))
            .collect()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "C_a_fF" => self.c_a,
            "C_b_fF" => self.c_b,
            "C_c_fF" => self.c_c,
            "C_ac_fF" => self.c_ac,
            "C_bc_fF" => self.c_bc,
            "C_bL_fF" => self.c_bl,
            "L_a_nH" => self.l_a,
            "L_b_nH" => self.l_b,
            "E_J_GHz" => self.e_j_ghz,
            "phi_dc_rad" => self.phi_dc,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "C_a_fF" => &mut self.c_a,
            "C_b_fF" => &mut self.c_b,
            "C_c_fF" => &mut self.c_c,
            "C_ac_fF" => &mut self.c_ac,
            "C_bc_fF" => &mut self.c_bc,
            "C_bL_fF" => &mut self.c_bl,
            "L_a_nH" => &mut self.l_a,
            "L_b_nH" => &mut self.l_b,
            "E_J_GHz" => &mut self.e_j_ghz,
            "phi_dc_rad" => &mut self.phi_dc,
            _ => return Err(Error::Config(format!("unknown netlist key `{key}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// Loaded capacitances `(C_a + C_ac, C_c + C_bc + C_ac, C_b + C_bc + C_bL)`.
    pub fn loaded_capacitances(&self) -> (f64, f64, f64) {
        (
            self.c_a + self.c_ac,
            self.c_c + self.c_bc + self.c_ac,
            self.c_b + self.c_bc + self.c_bl,
        )
    }
}
