//! Error metrics, the noise-ensemble benchmark and the `b` sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPolicy;
use crate::error::{invalid, Error, Result};
use crate::fd::{filter_fd, FdConfig};
use crate::savgol::{filter_savgol, SavGolSpec};
use crate::signal::{add_noise, NoiseSpec, Signal};
use crate::spectral::{filter_fft, FilterParams};

fn check_lengths(u0: &Signal, u: &Signal) -> Result<()> {
    if u0.len() != u.len() {
        return invalid(format!("length mismatch: {} vs {}", u0.len(), u.len()));
    }
    Ok(())
}

/// Mean squared error over the signal length.
pub fn mse(u0: &Signal, u: &Signal) -> Result<f64> {
    check_lengths(u0, u)?;
    let sq: f64 = u0.samples().iter().zip(u.samples()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(sq / u0.len() as f64)
}

/// `10 log10(sum u0^2 / sum (u0 - u)^2)`; `+inf` when `u == u0`.
pub fn snr_db(u0: &Signal, u: &Signal) -> Result<f64> {
    check_lengths(u0, u)?;
    let power = u0.energy();
    if power == 0.0 {
        return invalid("SNR is undefined for an all-zero reference signal");
    }
    let err: f64 = u0.samples().iter().zip(u.samples()).map(|(a, b)| (a - b).powi(2)).sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (power / err).log10())
}

/// A filter under comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterConfig {
    Identity,
    Fft {
        params: FilterParams,
    },
    Fd {
        a: f64,
        b: f64,
        lambda: f64,
        config: FdConfig,
    },
    Savgol {
        spec: SavGolSpec,
        #[serde(default)]
        boundary: BoundaryPolicy,
    },
}

impl FilterConfig {
    pub fn savgol_default() -> Self {
        FilterConfig::Savgol {
            spec: SavGolSpec::default(),
            boundary: BoundaryPolicy::ConstantExtension,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FilterConfig::Identity => "identity".into(),
            FilterConfig::Fft { params: p } => {
                format!("fft(a4pi2={},b={},lambda={},t={})", p.a4pi2(), p.b(), p.lambda(), p.t())
            }
            FilterConfig::Fd { a, b, lambda, config } => format!(
                "fd(a={a},b={b},lambda={lambda},dt={},steps={},A={},{},{})",
                config.dt, config.steps, config.truncation, config.mode, config.boundary
            ),
            FilterConfig::Savgol { spec, boundary } => {
                format!(
                    "savgol(window={},order={},{boundary})",
                    spec.window(),
                    spec.poly_order()
                )
            }
        }
    }

    pub fn apply(&self, u: &Signal) -> Result<Signal> {
        match self {
            FilterConfig::Identity => Ok(u.clone()),
            FilterConfig::Fft { params } => filter_fft(u, params),
            FilterConfig::Fd { a, b, lambda, config } => Ok(filter_fd(u, *a, *b, *lambda, config)?.signal),
            FilterConfig::Savgol { spec, boundary } => filter_savgol(u, spec, *boundary),
        }
    }
}

/// Mean output metrics of one filter over the SNR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCurve {
    pub label: String,
    pub config: FilterConfig,
    pub mean_snr_db: Vec<f64>,
    pub mean_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub input_snr_grid: Vec<f64>,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub filters: Vec<FilterCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// The SNR grid `{0, 1, ..., 8}` dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=8).map(f64::from).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise seed of realisation `i` at grid point `g`.
pub fn realization_seed(base_seed: u64, grid_index: usize, realization: usize) -> u64 {
    base_seed ^ splitmix64(splitmix64(grid_index as u64) ^ realization as u64)
}

/// Runs every filter on `n` noisy copies of `u0` per grid SNR and averages
/// output SNR and MSE. All filters see the same noisy signal.
pub fn run_ensemble(
    u0: &Signal,
    filters: &[FilterConfig],
    input_snr_grid: &[f64],
    n: usize,
    base_seed: u64,
) -> Result<BenchmarkReport> {
    run_ensemble_with(u0, filters, input_snr_grid, n, base_seed, Execution::Parallel)
}

pub fn run_ensemble_with(
    u0: &Signal,
    filters: &[FilterConfig],
    input_snr_grid: &[f64],
    n: usize,
    base_seed: u64,
    execution: Execution,
) -> Result<BenchmarkReport> {
    if n < 1 {
        return invalid("ensemble needs at least one realisation");
    }
    if input_snr_grid.is_empty() {
        return invalid("input SNR grid is empty");
    }
    if filters.is_empty() {
        return invalid("no filters to compare");
    }
    let tasks: Vec<(usize, usize)> = (0..input_snr_grid.len())
        .flat_map(|g| (0..n).map(move |i| (g, i)))
        .collect();

    // (snr, mse) per filter for one realisation
    let run_one = |&(g, i): &(usize, usize)| -> Result<Vec<(f64, f64)>> {
        let spec = NoiseSpec::snr_db(input_snr_grid[g], realization_seed(base_seed, g, i));
        let noisy = add_noise(u0, &spec)?;
        filters
            .iter()
            .map(|f| {
                let out = f.apply(&noisy).map_err(|e| Error::Filter {
                    label: f.label(),
                    source: Box::new(e),
                })?;
                Ok((snr_db(u0, &out)?, mse(u0, &out)?))
            })
            .collect()
    };
    let results: Vec<Result<Vec<(f64, f64)>>> = match execution {
        Execution::Sequential => tasks.iter().map(run_one).collect(),
        Execution::Parallel => tasks.par_iter().map(run_one).collect(),
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    // Fixed-order reduction: results are indexed by g * n + i.
    let curves = filters
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let mut mean_snr_db = Vec::with_capacity(input_snr_grid.len());
            let mut mean_mse = Vec::with_capacity(input_snr_grid.len());
            for g in 0..input_snr_grid.len() {
                let block = &results[g * n..(g + 1) * n];
                mean_snr_db.push(block.iter().map(|r| r[fi].0).sum::<f64>() / n as f64);
                mean_mse.push(block.iter().map(|r| r[fi].1).sum::<f64>() / n as f64);
            }
            FilterCurve {
                label: f.label(),
                config: f.clone(),
                mean_snr_db,
                mean_mse,
            }
        })
        .collect();

    Ok(BenchmarkReport {
        input_snr_grid: input_snr_grid.to_vec(),
        n_realizations: n,
        base_seed,
        filters: curves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub b_grid: Vec<f64>,
    pub mean_snr: Vec<f64>,
    /// Grid value with the highest mean SNR; ties go to the smallest `b`.
    pub best_b: f64,
}

/// Scans the anti-diffusion coefficient at a single input SNR. Every `b`
/// sees the same noise realisations.
#[allow(clippy::too_many_arguments)]
pub fn sweep_b(
    u0: &Signal,
    a: f64,
    lambda: f64,
    t: f64,
    b_grid: &[f64],
    input_snr_db: f64,
    n: usize,
    seed: u64,
) -> Result<SweepResult> {
    if b_grid.is_empty() {
        return invalid("b grid is empty");
    }
    let filters = b_grid
        .iter()
        .map(|&b| {
            Ok(FilterConfig::Fft {
                params: FilterParams::new(a, b, lambda, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = run_ensemble(u0, &filters, &[input_snr_db], n, seed)?;
    let mean_snr: Vec<f64> = report.filters.iter().map(|c| c.mean_snr_db[0]).collect();
    let mut best = 0;
    for i in 1..b_grid.len() {
        let better = mean_snr[i] > mean_snr[best];
        let tie_smaller = mean_snr[i] == mean_snr[best] && b_grid[i] < b_grid[best];
        if better || tie_smaller {
            best = i;
        }
    }
    Ok(SweepResult {
        b_grid: b_grid.to_vec(),
        mean_snr,
        best_b: b_grid[best],
    })
}
