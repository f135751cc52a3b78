//! The nonlocal anti-diffusive operator `I_lambda`.
//!
//! On the Fourier side `I_lambda` multiplies by `-|xi|^lambda` (frequency in
//! cycles per unit length). In physical space it is a weighted mean of second
//! derivatives:
//!
//! ```text
//! I[phi](x) = alpha * int_R phi''(x - z) |z|^(1 - lambda) dz          (1 < lambda < 2)
//! I[phi](x) = C * int_R (phi(x+z) - phi(x) [- phi'(x) z]) / |z|^(1+lambda) dz
//! ```
//!
//! This module provides the constants, the discrete sums used by the explicit
//! solver, and a quadrature reference used to validate them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use quadrature::double_exponential;

use crate::boundary::BoundaryPolicy;
use crate::error::{invalid, Error, Result};

/// Fractional order `lambda` in the open interval `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 && lambda < 2.0 {
            Ok(FractionalOrder(lambda))
        } else {
            invalid(format!("fractional order must lie in (0, 2), got {lambda}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        FractionalOrder::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(o: FractionalOrder) -> f64 {
        o.0
    }
}

/// Which discrete form of `I_lambda` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlocalMode {
    /// One-sided (Riemann-Liouville style) sum over past samples, with the
    /// constant absorbed in `b`.
    #[default]
    Causal,
    /// Two-sided sum scaled by `alpha_lambda`; consistent with the Fourier
    /// symbol `-|xi|^lambda`. Requires `1 < lambda < 2`.
    Symmetric,
}

impl fmt::Display for NonlocalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlocalMode::Causal => f.write_str("causal"),
            NonlocalMode::Symmetric => f.write_str("symmetric"),
        }
    }
}

impl FromStr for NonlocalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "causal" => Ok(NonlocalMode::Causal),
            "symmetric" => Ok(NonlocalMode::Symmetric),
            other => invalid(format!("unknown nonlocal mode `{other}` (expected causal|symmetric)")),
        }
    }
}

/// `C_lambda = lambda Gamma((1+lambda)/2) / (2 pi^(1/2+lambda) Gamma(1-lambda/2))`.
pub fn c_lambda(order: FractionalOrder) -> f64 {
    let l = order.value();
    l * gamma(0.5 * (1.0 + l)) / (2.0 * PI.powf(0.5 + l) * gamma(1.0 - 0.5 * l))
}

/// `alpha_lambda = C_lambda / (lambda (lambda - 1))`, defined for `1 < lambda < 2`.
pub fn alpha_lambda(order: FractionalOrder) -> Result<f64> {
    let l = order.value();
    if l <= 1.0 {
        return invalid(format!("alpha_lambda requires lambda > 1, got {l}"));
    }
    Ok(c_lambda(order) / (l * (l - 1.0)))
}

/// Default truncation of the nonlocal sum: `max(100, ceil(10 / lambda))`.
pub fn truncation_a(order: FractionalOrder) -> usize {
    let tail = (10.0 / order.value()).ceil() as usize;
    tail.max(100)
}

/// Integral of `|z|^(1-lambda)` over the cell `[-1/2, 1/2]`, where the
/// midpoint weight is singular.
fn centre_cell_weight(lambda: f64) -> f64 {
    0.5f64.powf(1.0 - lambda) / (2.0 - lambda)
}

/// Second differences padded so that `pad[k + a]` holds `D2 v_k` for
/// `k` in `[-a, n + a)`.
fn padded_second_differences(v: &[f64], a: usize, boundary: BoundaryPolicy) -> Vec<f64> {
    let n = v.len();
    let d2: Vec<f64> = (0..n as isize)
        .map(|k| boundary.sample(v, k + 1) - 2.0 * v[k as usize] + boundary.sample(v, k - 1))
        .collect();
    let mut pad = vec![0.0; n + 2 * a];
    match boundary {
        // D2 of a constant extension vanishes outside the signal.
        BoundaryPolicy::ConstantExtension => pad[a..a + n].copy_from_slice(&d2),
        BoundaryPolicy::Periodic => {
            for (i, p) in pad.iter_mut().enumerate() {
                *p = d2[(i as isize - a as isize).rem_euclid(n as isize) as usize];
            }
        }
    }
    pad
}

/// Discrete nonlocal operator on a sample vector.
///
/// * causal: `w_j = dx^-lambda * sum_{l=1..A} l^(1-lambda) D2 v_{j-l}`
/// * symmetric: `w_j = alpha * dx^-lambda * (c0 D2 v_j + sum_{l=1..A} l^(1-lambda) (D2 v_{j-l} + D2 v_{j+l}))`
///
/// with `D2 v_k = v_{k+1} - 2 v_k + v_{k-1}`. In symmetric mode `c0` is the
/// exact integral of the weight over the centre cell; the causal sum starts at
/// `l = 1`.
pub fn apply_nonlocal_discrete(
    v: &[f64],
    order: FractionalOrder,
    dx: f64,
    a: usize,
    mode: NonlocalMode,
    boundary: BoundaryPolicy,
) -> Result<Vec<f64>> {
    if v.len() < 3 {
        return invalid(format!("nonlocal operator needs at least 3 samples, got {}", v.len()));
    }
    if !(dx.is_finite() && dx > 0.0) {
        return invalid(format!("grid spacing must be positive, got {dx}"));
    }
    if a < 1 {
        return invalid("truncation A must be at least 1");
    }
    let lambda = order.value();
    let scale = match mode {
        NonlocalMode::Causal => dx.powf(-lambda),
        NonlocalMode::Symmetric => alpha_lambda(order)? * dx.powf(-lambda),
    };
    let weights: Vec<f64> = (1..=a).map(|l| (l as f64).powf(1.0 - lambda)).collect();
    let pad = padded_second_differences(v, a, boundary);
    let n = v.len();

    let kernel = |j: usize| -> f64 {
        // pad[a + j] is D2 v_j
        let c = a + j;
        let s = match mode {
            NonlocalMode::Causal => {
                let mut s = 0.0;
                for (l, w) in weights.iter().enumerate() {
                    s += w * pad[c - l - 1];
                }
                s
            }
            NonlocalMode::Symmetric => {
                let mut s = centre_cell_weight(lambda) * pad[c];
                for (l, w) in weights.iter().enumerate() {
                    s += w * (pad[c - l - 1] + pad[c + l + 1]);
                }
                s
            }
        };
        scale * s
    };

    const PAR_THRESHOLD: usize = 1 << 16;
    let out = if n.saturating_mul(a) >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(kernel).collect()
    } else {
        (0..n).map(kernel).collect()
    };
    Ok(out)
}

/// A smooth, effectively compactly supported test function with the
/// derivatives needed to integrate through the singularity.
pub trait SmoothProfile: Sync {
    fn value(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d4(&self, x: f64) -> f64;
    /// Interval outside which the function is negligible.
    fn support(&self) -> (f64, f64);
    /// Length scale on which the function varies.
    fn scale(&self) -> f64;
}

/// `amplitude * exp(-(x - centre)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub centre: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianProfile {
    pub fn new(centre: f64, width: f64, amplitude: f64) -> Self {
        GaussianProfile {
            centre,
            width,
            amplitude,
        }
    }

    /// Samples the profile on a grid.
    pub fn sample(&self, xs: impl Iterator<Item = f64>) -> Vec<f64> {
        xs.map(|x| self.value(x)).collect()
    }
}

impl SmoothProfile for GaussianProfile {
    fn value(&self, x: f64) -> f64 {
        let u = (x - self.centre) / self.width;
        self.amplitude * (-0.5 * u * u).exp()
    }

    fn d2(&self, x: f64) -> f64 {
        let u = (x - self.centre) / self.width;
        self.value(x) * (u * u - 1.0) / self.width.powi(2)
    }

    fn d4(&self, x: f64) -> f64 {
        let u = (x - self.centre) / self.width;
        let u2 = u * u;
        self.value(x) * (u2 * u2 - 6.0 * u2 + 3.0) / self.width.powi(4)
    }

    fn support(&self) -> (f64, f64) {
        (self.centre - 12.0 * self.width, self.centre + 12.0 * self.width)
    }

    fn scale(&self) -> f64 {
        self.width
    }
}

/// Reference evaluation of `I_lambda[phi]` at the points `xs` from the
/// singular-integral representation, folded onto the half line:
///
/// `C * int_0^inf (phi(x+z) + phi(x-z) - 2 phi(x)) / z^(1+lambda) dz`.
///
/// Near `z = 0` the integrand is replaced by its Taylor expansion and
/// integrated in closed form; the far tail of `-2 phi(x)` is also closed form.
pub fn quadrature_oracle(phi: &impl SmoothProfile, xs: &[f64], order: FractionalOrder) -> Result<Vec<f64>> {
    let lambda = order.value();
    if lambda == 1.0 {
        return Err(Error::Unsupported(
            "the singular-integral representation is not available at lambda = 1".into(),
        ));
    }
    let c = c_lambda(order);
    let (lo, hi) = phi.support();
    let scale = phi.scale();
    let delta = 1e-3 * scale;

    let eval = |x: f64| {
        let f0 = phi.value(x);
        // phi(x+z) + phi(x-z) - 2 phi(x) = phi'' z^2 + phi'''' z^4 / 12 + O(z^6)
        let near = phi.d2(x) * delta.powf(2.0 - lambda) / (2.0 - lambda)
            + phi.d4(x) / 12.0 * delta.powf(4.0 - lambda) / (4.0 - lambda);
        let reach = (x - lo).abs().max((hi - x).abs()).max(2.0 * scale);
        // Log substitution z = e^s smooths the algebraic decay of the weight.
        let g = |s: f64| {
            let z = s.exp();
            (phi.value(x + z) + phi.value(x - z) - 2.0 * f0) * (-lambda * s).exp()
        };
        let mut mid = 0.0;
        let cuts = [delta.ln(), scale.ln(), reach.ln()];
        for w in cuts.windows(2) {
            mid += double_exponential::integrate(g, w[0], w[1], 1e-14).integral;
        }
        let tail = -2.0 * f0 * reach.powf(-lambda) / lambda;
        c * (near + mid + tail)
    };
    Ok(xs.par_iter().map(|&x| eval(x)).collect())
}
