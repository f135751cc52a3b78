//! Savitzky-Golay smoothing, the comparison baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPolicy;
use crate::error::{invalid, Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct SavGolSpec {
    window: usize,
    poly_order: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    window: usize,
    poly_order: usize,
}

impl TryFrom<RawSpec> for SavGolSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        SavGolSpec::new(r.window, r.poly_order)
    }
}

impl From<SavGolSpec> for RawSpec {
    fn from(s: SavGolSpec) -> Self {
        RawSpec {
            window: s.window,
            poly_order: s.poly_order,
        }
    }
}

impl Default for SavGolSpec {
    fn default() -> Self {
        SavGolSpec {
            window: 11,
            poly_order: 3,
        }
    }
}

impl SavGolSpec {
    pub fn new(window: usize, poly_order: usize) -> Result<Self> {
        if window < 3 || window.is_multiple_of(2) {
            return invalid(format!("window must be odd and >= 3, got {window}"));
        }
        if poly_order >= window {
            return invalid(format!("polynomial order {poly_order} must be below window {window}"));
        }
        Ok(SavGolSpec { window, poly_order })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn poly_order(&self) -> usize {
        self.poly_order
    }

    pub fn half_width(&self) -> usize {
        self.window / 2
    }
}

/// Convolution weights evaluating the least-squares polynomial fit at the
/// centre of the window.
///
/// Offsets are symmetric, so the normal equations split into even and odd
/// powers and only the even block reaches the centre value. Offsets are
/// scaled to `[-1, 1]` to keep the Gram matrix well conditioned.
pub fn savgol_coeffs(spec: &SavGolSpec) -> Result<Vec<f64>> {
    let h = spec.half_width() as isize;
    let z: Vec<f64> = (-h..=h).map(|i| i as f64 / h as f64).collect();
    let powers: Vec<i32> = (0..=spec.poly_order as i32).step_by(2).collect();
    let m = powers.len();
    let gram = DMatrix::from_fn(m, m, |r, c| z.iter().map(|&x| x.powi(powers[r] + powers[c])).sum());
    let mut rhs = DVector::zeros(m);
    rhs[0] = 1.0;
    let c = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular Savitzky-Golay normal equations".into()))?;
    Ok(z.iter()
        .map(|&x| powers.iter().zip(c.iter()).map(|(&p, &ck)| ck * x.powi(p)).sum())
        .collect())
}

pub fn filter_savgol(u: &Signal, spec: &SavGolSpec, boundary: BoundaryPolicy) -> Result<Signal> {
    if u.len() < spec.window() {
        return invalid(format!(
            "signal of {} samples is shorter than the window {}",
            u.len(),
            spec.window()
        ));
    }
    let w = savgol_coeffs(spec)?;
    let h = spec.half_width() as isize;
    let v = u.samples();
    let out = (0..v.len() as isize)
        .map(|j| {
            w.iter()
                .enumerate()
                .map(|(i, &wi)| wi * boundary.sample(v, j + i as isize - h))
                .sum()
        })
        .collect();
    u.with_samples(out)
}
