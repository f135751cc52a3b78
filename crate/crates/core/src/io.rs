//! Signal CSV files, their JSON sidecars, and run manifests.
//!
//! A signal file is a CSV with header `x,value` and one row per sample, both
//! columns written with 17 significant digits so that a write/read cycle is
//! bit-exact. The optional sidecar `<file>.meta.json` carries the exact grid.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fd::StabilityReport;
use crate::signal::Signal;
use crate::spectral::CharacteristicFrequencies;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMeta {
    pub dx: f64,
    pub x0: f64,
    pub n: usize,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    suffixed(path, ".meta.json")
}

pub fn manifest_path(path: &Path) -> PathBuf {
    suffixed(path, ".manifest.json")
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a two-column CSV with the given header.
pub fn write_columns(path: &Path, header: (&str, &str), rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, v) in rows {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(v));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn signal_to_csv(u: &Signal) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in u.xs().zip(u.samples()) {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(*v));
    }
    out
}

/// Writes the CSV and its sidecar.
pub fn write_signal(path: &Path, u: &Signal, description: &str, seed: Option<u64>) -> Result<()> {
    fs::write(path, signal_to_csv(u))?;
    let meta = SignalMeta {
        dx: u.dx(),
        x0: u.x0(),
        n: u.len(),
        description: description.into(),
        seed,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn parse_signal_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == "x,value" => {}
        Some((_, h)) => return Err(Error::Parse(format!("expected header `x,value`, found `{h}`"))),
        None => return Err(Error::Parse("empty signal file".into())),
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in lines {
        let mut cols = line.split(',');
        let (Some(x), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: `{}`: {e}", lineno + 1, s.trim())))
        };
        xs.push(parse(x)?);
        vs.push(parse(v)?);
    }
    if vs.is_empty() {
        return Err(Error::Parse("signal file has no samples".into()));
    }
    Ok((xs, vs))
}

fn check_uniform(xs: &[f64], x0: f64, dx: f64) -> Result<()> {
    for (i, &x) in xs.iter().enumerate() {
        let expect = x0 + i as f64 * dx;
        if (x - expect).abs() > 1e-9 * dx.max(x.abs()) {
            return Err(Error::Parse(format!(
                "sample {i}: x = {x} is off the uniform grid (expected {expect})"
            )));
        }
    }
    Ok(())
}

/// Reads a signal, taking the grid from the sidecar when present and from
/// the `x` column otherwise.
pub fn read_signal(path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path)?;
    let (xs, vs) = parse_signal_csv(&text)?;
    let side = sidecar_path(path);
    let (dx, x0) = if side.exists() {
        let meta: SignalMeta = serde_json::from_str(&fs::read_to_string(&side)?)?;
        if meta.n != vs.len() {
            return Err(Error::Parse(format!(
                "sidecar declares {} samples, file has {}",
                meta.n,
                vs.len()
            )));
        }
        (meta.dx, meta.x0)
    } else {
        if xs.len() < 2 {
            return Err(Error::Parse(
                "grid spacing cannot be inferred from one sample without a sidecar".into(),
            ));
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if dx.is_nan() || dx <= 0.0 {
            return Err(Error::Parse("x column must be strictly increasing".into()));
        }
        (dx, xs[0])
    };
    check_uniform(&xs, x0, dx)?;
    Signal::new(vs, dx, x0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256,
        })
    }
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name; replaying them reproduces the run.
    pub argv: Vec<String>,
    /// Working directory the command ran in; relative paths resolve here.
    #[serde(default)]
    pub cwd: Option<String>,
    pub parameters: serde_json::Value,
    #[serde(default)]
    pub stability: Option<StabilityReport>,
    #[serde(default)]
    pub characteristic_frequencies: Option<CharacteristicFrequencies>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub created_unix_s: u64,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv,
            cwd: None,
            parameters,
            stability: None,
            characteristic_frequencies: None,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
