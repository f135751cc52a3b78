//! Uniformly sampled signals, reference generators and calibrated noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A uniformly sampled real signal. Sample `i` sits at `x0 + i * dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    dx: f64,
    x0: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, dx: f64, x0: f64) -> Result<Self> {
        if samples.is_empty() {
            return invalid("signal must have at least one sample");
        }
        if !(dx.is_finite() && dx > 0.0) {
            return invalid(format!("grid spacing must be positive and finite, got {dx}"));
        }
        if !x0.is_finite() {
            return invalid("signal origin must be finite");
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {i} is not finite"));
        }
        Ok(Signal { samples, dx, x0 })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Coordinate of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    /// A new signal on the same grid.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Signal> {
        Signal::new(samples, self.dx, self.x0)
    }

    pub fn sum(&self) -> f64 {
        self.samples.iter().sum()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn sampled(n: usize, length: f64, f: impl Fn(f64) -> f64) -> Result<Signal> {
    if n < 2 {
        return invalid(format!("need at least 2 samples, got {n}"));
    }
    if !(length.is_finite() && length > 0.0) {
        return invalid(format!("domain length must be positive, got {length}"));
    }
    let dx = length / n as f64;
    let samples = (0..n).map(|i| f(i as f64 * length / n as f64)).collect();
    Signal::new(samples, dx, 0.0)
}

/// Step function on `[0, 2)`: -1 on `[0, 1)` and +1 on `[1, 2)`.
pub fn gen_step(n: usize) -> Result<Signal> {
    if n < 2 {
        return invalid(format!("step signal needs n >= 2, got {n}"));
    }
    // 2i < n  <=>  x_i = 2i/n < 1, decided in integers so the jump never rounds.
    let samples = (0..n).map(|i| if 2 * i < n { -1.0 } else { 1.0 }).collect();
    Signal::new(samples, 2.0 / n as f64, 0.0)
}

/// `cos(5 pi x) + cos(20 pi x)` at `x = i * length / n`.
pub fn gen_trig(n: usize, length: f64) -> Result<Signal> {
    sampled(n, length, |x| (5.0 * PI * x).cos() + (20.0 * PI * x).cos())
}

/// `amplitude * cos(x)` at `x = i * length / n`.
pub fn gen_attenuated_cosine(n: usize, length: f64, amplitude: f64) -> Result<Signal> {
    if !amplitude.is_finite() {
        return invalid("amplitude must be finite");
    }
    sampled(n, length, |x| amplitude * x.cos())
}

/// Synthetic ECG-like trace: a flat baseline with P, Q, R, S and T pulses
/// (narrow Gaussians) repeated every `beat_period` units.
///
/// This is a test fixture for self-contained runs, not a physiological model.
pub fn gen_ecg_like(n: usize, length: f64, beat_period: f64) -> Result<Signal> {
    if !(beat_period.is_finite() && beat_period > 0.0) {
        return invalid(format!("beat period must be positive, got {beat_period}"));
    }
    // (offset from beat centre, width, amplitude), all in units of the period.
    const WAVES: [(f64, f64, f64); 5] = [
        (-0.20, 0.025, 0.15),
        (-0.025, 0.008, -0.12),
        (0.0, 0.010, 1.0),
        (0.025, 0.008, -0.25),
        (0.25, 0.040, 0.30),
    ];
    sampled(n, length, |x| {
        let beat = (x / beat_period).floor();
        // Neighbouring beats contribute through the Gaussian tails.
        (-1..=1)
            .map(|k| {
                let centre = (beat + k as f64 + 0.5) * beat_period;
                WAVES
                    .iter()
                    .map(|&(off, w, amp)| {
                        let z = (x - centre - off * beat_period) / (w * beat_period);
                        amp * (-0.5 * z * z).exp()
                    })
                    .sum::<f64>()
            })
            .sum()
    })
}

/// Noise level: either an exact target SNR or an explicit standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    TargetSnrDb(f64),
    Sigma(f64),
}

/// Additive white Gaussian noise specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: NoiseLevel,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn snr_db(target_snr_db: f64, seed: u64) -> Self {
        NoiseSpec {
            level: NoiseLevel::TargetSnrDb(target_snr_db),
            seed,
        }
    }

    pub fn sigma(sigma: f64, seed: u64) -> Self {
        NoiseSpec {
            level: NoiseLevel::Sigma(sigma),
            seed,
        }
    }
}

/// Unit-variance Gaussian draws, fully determined by `seed`.
pub fn standard_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Returns `u0 + noise`.
///
/// In target-SNR mode the unit draw is rescaled so that the realised noise
/// vector hits the requested SNR exactly, not just in expectation.
pub fn add_noise(u0: &Signal, spec: &NoiseSpec) -> Result<Signal> {
    let mut noise = standard_normal(u0.len(), spec.seed);
    let scale = match spec.level {
        NoiseLevel::Sigma(sigma) => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return invalid(format!("noise sigma must be >= 0, got {sigma}"));
            }
            sigma
        }
        NoiseLevel::TargetSnrDb(snr) => {
            if !snr.is_finite() {
                return invalid("target SNR must be finite");
            }
            let power = u0.energy();
            if power == 0.0 {
                return invalid("cannot target an SNR on a zero-power signal");
            }
            let drawn: f64 = noise.iter().map(|v| v * v).sum();
            if drawn == 0.0 {
                return invalid("degenerate noise draw");
            }
            (power / (drawn * 10f64.powf(snr / 10.0))).sqrt()
        }
    };
    if scale == 0.0 {
        return Ok(u0.clone());
    }
    for (n, &u) in noise.iter_mut().zip(u0.samples()) {
        *n = u + scale * *n;
    }
    u0.with_samples(noise)
}
