use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::VERSION;
use crate::emission::{CorrelationMatrix, ModeDecomposition, Spectrogram};
use crate::error::{Error, Result};
use crate::quantum::{covering_half_width, linspace, wigner, DensityMatrix};
use crate::units::rad_per_us_to_mhz;

/// Header attached to every exported file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub version: String,
}

impl Metadata {
    pub fn new(config_hash: &str) -> Self {
        Self { config_hash: config_hash.to_string(), version: VERSION.to_string() }
    }

    fn csv_line(&self) -> String {
        format!("# config_hash={},version={}\n", self.config_hash, self.version)
    }
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// JSON object `{"metadata": .., <fields of value>}`.
pub fn write_json(path: &Path, meta: &Metadata, value: &impl Serialize) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    let meta = serde_json::to_value(meta)?;
    let out = match v.as_object_mut() {
        Some(obj) => {
            let mut m = serde_json::Map::new();
            m.insert("metadata".into(), meta);
            m.append(obj);
            serde_json::Value::Object(m)
        }
        None => serde_json::json!({ "metadata": meta, "data": v }),
    };
    write_atomic(path, serde_json::to_string_pretty(&out)?.as_bytes())
}

pub fn read_json_metadata(path: &Path) -> Result<Metadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    Ok(serde_json::from_value(v["metadata"].clone())?)
}

/// CSV with a `# config_hash=..,version=..` line before the header row.
pub fn write_csv<I>(path: &Path, meta: &Metadata, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut buf = meta.csv_line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_atomic(path, &buf)
}

/// Reads a file written by [`write_csv`]: metadata, header, rows.
pub fn read_csv(path: &Path) -> Result<(Metadata, Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let meta = parse_meta_line(first)
        .ok_or_else(|| Error::DataIntegrity(format!("{} has no metadata line", path.display())))?;
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((meta, header, rows))
}

fn parse_meta_line(line: &str) -> Option<Metadata> {
    let body = line.strip_prefix("# ")?;
    let mut hash = None;
    let mut version = None;
    for part in body.trim().split(',') {
        let (k, v) = part.split_once('=')?;
        match k {
            "config_hash" => hash = Some(v.to_string()),
            "version" => version = Some(v.to_string()),
            _ => {}
        }
    }
    Some(Metadata { config_hash: hash?, version: version? })
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Wide layout: one row per `t_i`, `Re`/`Im` column pairs per `t_j`.
pub fn write_correlation(path: &Path, meta: &Metadata, g: &CorrelationMatrix) -> Result<()> {
    let t = g.grid.samples();
    let mut header = vec!["t_us".to_string()];
    for j in 0..t.len() {
        header.push(format!("re_{j}"));
        header.push(format!("im_{j}"));
    }
    let rows = (0..t.len()).map(|i| {
        let mut row = vec![num(t[i])];
        for j in 0..t.len() {
            row.push(num(g.values[(i, j)].re));
            row.push(num(g.values[(i, j)].im));
        }
        row
    });
    write_csv(path, meta, &header, rows)
}

/// `t_us, re_v1, im_v1, re_v2, ...` with modes in 1/sqrt(us).
pub fn write_modes(path: &Path, meta: &Metadata, d: &ModeDecomposition) -> Result<()> {
    let mut header = vec!["t_us".to_string()];
    for k in 1..=d.modes.len() {
        header.push(format!("re_v{k}"));
        header.push(format!("im_v{k}"));
    }
    let rows = d.grid.samples().iter().enumerate().map(|(i, &t)| {
        let mut row = vec![num(t)];
        for v in &d.modes {
            row.push(num(v[i].re));
            row.push(num(v[i].im));
        }
        row
    });
    write_csv(path, meta, &header, rows)
}

#[derive(Serialize)]
struct ModeTable<'a> {
    occupations: &'a [f64],
    total: f64,
    min_eigenvalue: f64,
    grid_points: usize,
}

pub fn write_mode_occupations(path: &Path, meta: &Metadata, d: &ModeDecomposition) -> Result<()> {
    let t = ModeTable {
        occupations: &d.occupations,
        total: d.total,
        min_eigenvalue: d.min_eigenvalue,
        grid_points: d.grid.len(),
    };
    write_json(path, meta, &t)
}

/// One row per frequency (MHz); one column per time sample.
pub fn write_spectrogram(path: &Path, meta: &Metadata, s: &Spectrogram) -> Result<()> {
    let mut header = vec!["freq_MHz".to_string()];
    header.extend(s.times.iter().map(|t| format!("t={t:.6}")));
    let rows = s.omegas.iter().enumerate().map(|(k, &w)| {
        let mut row = vec![num(rad_per_us_to_mhz(w))];
        row.extend((0..s.times.len()).map(|m| num(s.intensity[(k, m)])));
        row
    });
    write_csv(path, meta, &header, rows)
}

/// Wigner function on a square grid covering the truncated space.
pub fn wigner_grid(rho: &DensityMatrix, points: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = covering_half_width(rho.dim());
    let x = linspace(-h, h, points.max(2));
    let w = wigner(rho, &x, &x)?;
    Ok((x, w))
}

/// Rows are `x`, columns `p`.
pub fn write_wigner(path: &Path, meta: &Metadata, rho: &DensityMatrix, points: usize) -> Result<()> {
    let (x, w) = wigner_grid(rho, points)?;
    let mut header = vec!["x\\p".to_string()];
    header.extend(x.iter().map(|p| format!("{p:.6}")));
    let rows = x.iter().enumerate().map(|(i, &xi)| {
        let mut row = vec![num(xi)];
        row.extend((0..x.len()).map(|j| num(w[(i, j)])));
        row
    });
    write_csv(path, meta, &header, rows)
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
