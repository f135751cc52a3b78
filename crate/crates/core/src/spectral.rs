//! Exact solution of the filtering equation through its Fourier multiplier.
//!
//! With `F f(xi) = int e^{-2 i pi x xi} f(x) dx` the evolution multiplies each
//! mode by `exp(-t psi(xi))`, `psi(xi) = 4 pi^2 a xi^2 - b |xi|^lambda`. Low
//! frequencies below the neutral frequency `xi_1` are amplified, the peak sits
//! at `xi_M`, and everything above `xi_1` is damped.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::Signal;

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Coefficients of the filtering equation
/// `u_t - a u_xx + b I_lambda[u] = 0`, evolved up to time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FilterParams {
    a: f64,
    b: f64,
    lambda: f64,
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    lambda: f64,
    t: f64,
}

impl TryFrom<RawParams> for FilterParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        FilterParams::new(r.a, r.b, r.lambda, r.t)
    }
}

impl From<FilterParams> for RawParams {
    fn from(p: FilterParams) -> Self {
        RawParams {
            a: p.a,
            b: p.b,
            lambda: p.lambda,
            t: p.t,
        }
    }
}

impl FilterParams {
    pub fn new(a: f64, b: f64, lambda: f64, t: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return invalid(format!("diffusion coefficient a must be > 0, got {a}"));
        }
        if !(b.is_finite() && b >= 0.0) {
            return invalid(format!("anti-diffusion coefficient b must be >= 0, got {b}"));
        }
        if !(lambda.is_finite() && lambda > 0.0 && lambda < 2.0) {
            return invalid(format!("lambda must lie in (0, 2), got {lambda}"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return invalid(format!("evolution time must be >= 0, got {t}"));
        }
        Ok(FilterParams { a, b, lambda, t })
    }

    /// Parameters given as `4 pi^2 a`, the form used when tuning in frequency.
    pub fn from_a4pi2(a4pi2: f64, b: f64, lambda: f64, t: f64) -> Result<Self> {
        FilterParams::new(a4pi2 / FOUR_PI2, b, lambda, t)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn a4pi2(&self) -> f64 {
        FOUR_PI2 * self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_t(self, t: f64) -> Result<Self> {
        FilterParams::new(self.a, self.b, self.lambda, t)
    }

    pub fn with_b(self, b: f64) -> Result<Self> {
        FilterParams::new(self.a, b, self.lambda, self.t)
    }

    /// Multiplier applied to the mode of frequency `xi`.
    pub fn gain(&self, xi: f64) -> f64 {
        (-self.t * symbol_psi(xi, self)).exp()
    }
}

/// `psi(xi) = 4 pi^2 a xi^2 - b |xi|^lambda`.
pub fn symbol_psi(xi: f64, p: &FilterParams) -> f64 {
    FOUR_PI2 * p.a * xi * xi - p.b * xi.abs().powf(p.lambda)
}

/// Landmarks of the gain curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFrequencies {
    /// Frequency of maximal gain.
    pub xi_m: f64,
    /// Neutral frequency, where the gain returns to 1.
    pub xi_1: f64,
    /// `xi_1 / xi_M = (2 / lambda)^(1 / (2 - lambda))`.
    pub ratio: f64,
    /// Peak gain `exp(-t psi(xi_M))`.
    pub peak_gain: f64,
}

pub fn characteristic_frequencies(p: &FilterParams) -> Result<CharacteristicFrequencies> {
    if p.b == 0.0 {
        return Err(Error::NoAmplification);
    }
    let inv = 1.0 / (2.0 - p.lambda);
    let xi_m = (p.lambda * p.b / (2.0 * FOUR_PI2 * p.a)).powf(inv);
    let xi_1 = (p.b / (FOUR_PI2 * p.a)).powf(inv);
    Ok(CharacteristicFrequencies {
        xi_m,
        xi_1,
        ratio: xi_1 / xi_m,
        peak_gain: p.gain(xi_m),
    })
}

/// Sampled gain curve on `[0, xi_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub xis: Vec<f64>,
    pub gains: Vec<f64>,
    /// `None` when `b = 0` (pure heat semigroup).
    pub landmarks: Option<CharacteristicFrequencies>,
}

impl SpectralProfile {
    /// Index of the largest sampled gain.
    pub fn argmax(&self) -> usize {
        self.gains
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc })
            .0
    }

    /// First sample beyond the peak where the gain drops to 1 or below.
    pub fn unit_crossing(&self) -> Option<usize> {
        let start = self.argmax();
        (start..self.gains.len()).find(|&i| self.gains[i] <= 1.0)
    }
}

pub fn gain_profile(p: &FilterParams, xi_max: f64, n_points: usize) -> Result<SpectralProfile> {
    if n_points < 2 {
        return invalid("gain profile needs at least 2 points");
    }
    if !(xi_max.is_finite() && xi_max > 0.0) {
        return invalid(format!("xi_max must be positive, got {xi_max}"));
    }
    let step = xi_max / (n_points - 1) as f64;
    let xis: Vec<f64> = (0..n_points).map(|i| i as f64 * step).collect();
    let gains = xis.iter().map(|&xi| p.gain(xi)).collect();
    let landmarks = characteristic_frequencies(p).ok();
    Ok(SpectralProfile { xis, gains, landmarks })
}

/// Signed DFT frequency index for bin `m` of an `n`-point transform:
/// `k` in `[-floor(n/2), ceil(n/2) - 1]`.
pub fn signed_bin(m: usize, n: usize) -> isize {
    if m < n.div_ceil(2) {
        m as isize
    } else {
        m as isize - n as isize
    }
}

/// Frequency (cycles per unit length) of every DFT bin.
pub fn dft_frequencies(n: usize, dx: f64) -> Vec<f64> {
    (0..n).map(|m| signed_bin(m, n) as f64 / (n as f64 * dx)).collect()
}

/// Inverse DFT of `DFT(samples) * gain(xi_k)`, normalised, still complex.
pub(crate) fn apply_multiplier(samples: &[f64], dx: f64, gain: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for (c, xi) in buf.iter_mut().zip(dft_frequencies(n, dx)) {
        *c *= gain(xi);
    }
    inverse.process(&mut buf);
    let norm = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= norm;
    }
    buf
}

/// Solves the equation up to time `p.t()` treating `u` as periodic.
pub fn filter_fft(u: &Signal, p: &FilterParams) -> Result<Signal> {
    let out = apply_multiplier(u.samples(), u.dx(), |xi| p.gain(xi));
    u.with_samples(out.into_iter().map(|c| c.re).collect())
}

/// Physical-space kernel `K(t, .)` on `[-extent/2, extent/2)`, periodised
/// over the extent.
pub fn kernel_physical(p: &FilterParams, n: usize, extent: f64) -> Result<Signal> {
    if n < 16 {
        return invalid(format!("kernel grid needs n >= 16, got {n}"));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return invalid(format!("kernel extent must be positive, got {extent}"));
    }
    let dx = extent / n as f64;
    if p.b() == 0.0 {
        return Signal::new(periodic_heat_kernel(4.0 * p.a() * p.t(), n, extent), dx, -0.5 * extent);
    }
    // K(x_j) = (1/extent) sum_k gain(k/extent) e^{2 i pi k x_j / extent}, with
    // x_j = -extent/2 + j dx, so each bin picks up a factor (-1)^k.
    let mut spectrum: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = signed_bin(m, n);
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * p.gain(k as f64 / extent), 0.0)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut spectrum);
    let samples = spectrum.iter().map(|c| c.re / extent).collect();
    Signal::new(samples, dx, -0.5 * extent)
}

/// Heat kernel with variance `two_var / 2`, summed over periodic images.
/// Evaluated directly so that it stays non-negative to the last bit.
fn periodic_heat_kernel(two_var: f64, n: usize, extent: f64) -> Vec<f64> {
    let dx = extent / n as f64;
    let images = ((40.0 * two_var).sqrt() / extent).ceil() as i64 + 1;
    let norm = (PI * two_var).sqrt();
    (0..n)
        .map(|j| {
            let x = -0.5 * extent + j as f64 * dx;
            (-images..=images)
                .map(|m| {
                    let y = x + m as f64 * extent;
                    (-y * y / two_var).exp()
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// `(xi, gain)` for the non-negative bins of an `n`-point grid over `extent`.
pub fn kernel_gain_curve(p: &FilterParams, n: usize, extent: f64) -> Vec<(f64, f64)> {
    (0..=n / 2)
        .map(|k| {
            let xi = k as f64 / extent;
            (xi, p.gain(xi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::gen_trig;

    fn landmark_params() -> FilterParams {
        FilterParams::from_a4pi2(0.01, 0.05, 1.5, 1.0).unwrap()
    }

    #[test]
    fn psi_zeros() {
        let p = landmark_params();
        assert_eq!(symbol_psi(0.0, &p), 0.0);
        assert!(symbol_psi(25.0, &p).abs() < 1e-12);
        let cf = characteristic_frequencies(&p).unwrap();
        assert!(symbol_psi(cf.xi_1, &p).abs() < 1e-12);
    }

    #[test]
    fn reference_landmarks() {
        let cf = characteristic_frequencies(&landmark_params()).unwrap();
        assert!((cf.xi_m - 14.0625).abs() < 1e-12);
        assert!((cf.xi_1 - 25.0).abs() < 1e-12);
        assert!((cf.ratio - 16.0 / 9.0).abs() < 1e-12);
        // mpmath: exp(0.01 * 14.0625^2 * (2/1.5 - 1))
        assert!((cf.peak_gain - 1.933_205_850_860_321_2).abs() < 1e-12);
    }

    #[test]
    fn landmarks_need_anti_diffusion() {
        let p = FilterParams::new(1.0, 0.0, 1.5, 1.0).unwrap();
        assert!(matches!(characteristic_frequencies(&p), Err(Error::NoAmplification)));
    }

    #[test]
    fn ratio_closed_form_and_limits() {
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let l = i as f64 * 0.01;
            let p = FilterParams::new(0.3, 0.7, l, 1.0).unwrap();
            let cf = characteristic_frequencies(&p).unwrap();
            let closed = (2.0 / l).powf(1.0 / (2.0 - l));
            assert!((cf.ratio / closed - 1.0).abs() < 1e-10);
            assert!(cf.ratio >= std::f64::consts::E.sqrt());
            assert!(cf.ratio < prev);
            prev = cf.ratio;
        }
    }

    #[test]
    fn params_validation() {
        assert!(FilterParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(FilterParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(FilterParams::new(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(FilterParams::new(1.0, 1.0, 1.0, -1.0).is_err());
        let p: std::result::Result<FilterParams, _> = serde_json::from_str(r#"{"a":1.0,"b":1.0,"lambda":2.5,"t":1.0}"#);
        assert!(p.is_err());
    }

    #[test]
    fn identity_at_time_zero() {
        let u = gen_trig(128, 2.0).unwrap();
        let p = landmark_params().with_t(0.0).unwrap();
        let v = filter_fft(&u, &p).unwrap();
        for (a, b) in u.samples().iter().zip(v.samples()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_semigroup_contracts() {
        let u = gen_trig(256, 2.0).unwrap();
        let p = FilterParams::new(1e-3, 0.0, 1.5, 1.0).unwrap();
        let v = filter_fft(&u, &p).unwrap();
        assert!(v.energy() <= u.energy());
    }

    #[test]
    fn output_is_real_up_to_rounding() {
        for n in [127usize, 128, 255] {
            let u = Signal::new((0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect(), 0.01, 0.0).unwrap();
            let out = apply_multiplier(u.samples(), u.dx(), |xi| landmark_params().gain(xi));
            let residue = out.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
            assert!(residue <= 1e-12 * u.energy().sqrt(), "n={n}: {residue}");
        }
    }

    #[test]
    fn signed_bins() {
        assert_eq!((0..4).map(|m| signed_bin(m, 4)).collect::<Vec<_>>(), vec![0, 1, -2, -1]);
        assert_eq!(
            (0..5).map(|m| signed_bin(m, 5)).collect::<Vec<_>>(),
            vec![0, 1, 2, -2, -1]
        );
    }

    #[test]
    fn pure_mode_scaled_by_peak_gain() {
        // L = 16 puts xi_M = 14.0625 on bin 225.
        let n = 1024;
        let dx = 16.0 / n as f64;
        let p = landmark_params();
        let cf = characteristic_frequencies(&p).unwrap();
        let u = Signal::new(
            (0..n).map(|j| (2.0 * PI * cf.xi_m * j as f64 * dx).cos()).collect(),
            dx,
            0.0,
        )
        .unwrap();
        let v = filter_fft(&u, &p).unwrap();
        let err: f64 = u
            .samples()
            .iter()
            .zip(v.samples())
            .map(|(a, b)| (cf.peak_gain * a - b).powi(2))
            .sum();
        assert!(err.sqrt() <= 1e-10 * cf.peak_gain * u.energy().sqrt());
    }

    #[test]
    fn kernel_has_unit_mass() {
        for (a, b, l, t) in [(0.5, 2.0, 1.5, 0.1), (0.1, 0.0, 1.0, 1.0), (0.01, 0.3, 0.4, 2.0)] {
            let p = FilterParams::new(a, b, l, t).unwrap();
            let k = kernel_physical(&p, 512, 20.0).unwrap();
            assert!((k.sum() * k.dx() - 1.0).abs() < 1e-8);
        }
        assert!(kernel_physical(&landmark_params(), 8, 1.0).is_err());
        assert!(kernel_physical(&landmark_params(), 64, 0.0).is_err());
    }

    #[test]
    fn heat_kernel_is_positive() {
        let p = FilterParams::new(0.5, 0.0, 1.5, 0.5).unwrap();
        let k = kernel_physical(&p, 1024, 20.0).unwrap();
        assert!(k.samples().iter().all(|&v| v > 0.0));
        // and matches the Gaussian (4 pi a t)^(-1/2) exp(-x^2 / 4at) at the centre
        let centre = k.samples()[512];
        assert!((centre - 1.0 / (4.0 * PI * 0.25).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kernel_goes_negative_under_strong_antidiffusion() {
        for t in [0.1, 0.5] {
            let p = FilterParams::new(0.5, 2.0, 1.5, t).unwrap();
            let k = kernel_physical(&p, 4096, 40.0).unwrap();
            let min = k.samples().iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min < 0.0, "t={t}: min={min}");
        }
    }

    #[test]
    fn profile_band_structure() {
        let p = landmark_params();
        let prof = gain_profile(&p, 50.0, 1 << 14).unwrap();
        assert_eq!(prof.gains[0], 1.0);
        let cf = prof.landmarks.unwrap();
        for (&xi, &g) in prof.xis.iter().zip(&prof.gains).skip(1) {
            if xi < cf.xi_1 * (1.0 - 1e-9) {
                assert!(g > 1.0, "xi={xi}");
            } else if xi > cf.xi_1 * (1.0 + 1e-9) {
                assert!(g < 1.0, "xi={xi}");
            }
        }
        let step = prof.xis[1];
        assert!((prof.xis[prof.argmax()] - cf.xi_m).abs() <= step);
        assert!((prof.xis[prof.unit_crossing().unwrap()] - cf.xi_1).abs() <= step);
    }
}
